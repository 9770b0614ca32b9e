// SPDX-License-Identifier: Apache-2.0

//! Append-only record of accepted gateway updates.
//!
//! ```text
//! NODE <id> <role>
//! CHANGE <ts_ms> <subject> <from|-> <to>
//! SENSORS <ts_ms> <node> <channel>=<value>:<label> ...
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! replaying a journal rebuilds the same records bit for bit.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use crate::detector::StateChange;
use crate::model::{NodeId, NodeRole, Timestamp};
use crate::sensor::{Channel, ContextSnapshot, ContextValue};
use crate::textfmt::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum JournalRecord {
    Node { node: NodeId, role: NodeRole },
    Change(StateChange),
    Sensors(ContextSnapshot),
}

impl JournalRecord {
    pub fn to_line(&self) -> String {
        match self {
            JournalRecord::Node { node, role } => format!("NODE {node} {role}"),
            JournalRecord::Change(c) => {
                let from = c.from.as_ref().map_or("-", NodeId::as_str);
                format!("CHANGE {} {} {} {}", c.at, c.subject, from, c.to)
            }
            JournalRecord::Sensors(s) => {
                let mut line = format!("SENSORS {} {}", s.at, s.node);
                for (ch, v) in &s.values {
                    line.push_str(&format!(" {ch}={:?}:{}", v.value, v.label));
                }
                line
            }
        }
    }

    pub fn parse_line(n: usize, line: &str) -> Result<JournalRecord, ParseError> {
        let err = |m: String| ParseError::new(n, m);
        let f: Vec<&str> = line.split_whitespace().collect();
        let node = |s: &str| NodeId::new(s).map_err(|e| err(e.to_string()));
        let ts = |s: &str| {
            s.parse()
                .map(Timestamp)
                .map_err(|_| err(format!("bad timestamp {s:?}")))
        };
        match f.as_slice() {
            ["NODE", id, role] => Ok(JournalRecord::Node {
                node: node(id)?,
                role: role
                    .parse()
                    .map_err(|e: crate::model::ModelError| err(e.to_string()))?,
            }),
            ["CHANGE", at, subject, from, to] => {
                if subject == to {
                    return Err(err(format!("{subject} cannot be located at itself")));
                }
                Ok(JournalRecord::Change(StateChange {
                    subject: node(subject)?,
                    from: if *from == "-" { None } else { Some(node(from)?) },
                    to: node(to)?,
                    at: ts(at)?,
                }))
            }
            ["SENSORS", at, id, fields @ ..] => {
                let mut values = BTreeMap::new();
                for field in fields {
                    let bad = || err(format!("bad sensor field {field:?}"));
                    let (ch, rest) = field.split_once('=').ok_or_else(bad)?;
                    let (value, label) = rest.split_once(':').ok_or_else(bad)?;
                    let ch: Channel = ch.parse().map_err(|_| bad())?;
                    let value: f64 = value.parse().map_err(|_| bad())?;
                    values.insert(
                        ch,
                        ContextValue {
                            value,
                            label: label.to_string(),
                        },
                    );
                }
                Ok(JournalRecord::Sensors(ContextSnapshot {
                    node: node(id)?,
                    at: ts(at)?,
                    values,
                }))
            }
            _ => Err(err(format!("unrecognised journal line {line:?}"))),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Vec<JournalRecord>, ParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| JournalRecord::parse_line(i + 1, l))
        .collect()
}

#[derive(Debug)]
pub struct JournalWriter {
    file: File,
}

impl JournalWriter {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(JournalWriter { file })
    }

    /// Writes one record and flushes it before returning.
    pub fn append(&mut self, rec: &JournalRecord) -> io::Result<()> {
        let mut line = rec.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()
    }
}
