// SPDX-License-Identifier: Apache-2.0

//! Trace and change-log files.
//!
//! A trace file carries sightings and, when produced by the simulator, the
//! walker's ground truth:
//!
//! ```text
//! M <subject> <speed_ftps> <initial|->     # truth header
//! S <ts_ms> <subject> <observer> <rssi>
//! X <ts_ms> <from> <to>                    # truth crossing
//! ```
//!
//! A change log has one confirmed location change per line,
//! `C <ts_ms> <from|-> <to>`. Fields are separated by one space and lines end
//! in `\n`, so writers are byte-for-byte reproducible.

use std::fmt::Write as _;

use crate::detector::StateChange;
use crate::model::{NodeId, Sighting, SignalStrength, Timestamp};
use crate::sim::{Crossing, GroundTruth};
use crate::textfmt::ParseError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceFile {
    pub sightings: Vec<Sighting>,
    pub truth: Option<GroundTruth>,
}

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn node(n: usize, s: &str) -> Result<NodeId, ParseError> {
    NodeId::new(s).map_err(|e| ParseError::new(n, e.to_string()))
}

fn opt_node(n: usize, s: &str) -> Result<Option<NodeId>, ParseError> {
    if s == "-" {
        Ok(None)
    } else {
        node(n, s).map(Some)
    }
}

fn millis(n: usize, s: &str) -> Result<Timestamp, ParseError> {
    s.parse()
        .map(Timestamp)
        .map_err(|_| ParseError::new(n, format!("bad timestamp {s:?}")))
}

impl TraceFile {
    pub fn parse(text: &str) -> Result<TraceFile, ParseError> {
        let mut sightings = Vec::new();
        let mut header: Option<(NodeId, f64, Option<NodeId>)> = None;
        let mut crossings = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = content(raw);
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            match (f[0], f.len()) {
                ("S", 5) => {
                    let rssi: u8 = f[4]
                        .parse()
                        .map_err(|_| ParseError::new(n, format!("bad rssi {:?}", f[4])))?;
                    let s = Sighting::new(
                        node(n, f[2])?,
                        node(n, f[3])?,
                        SignalStrength(rssi),
                        millis(n, f[1])?,
                    )
                    .map_err(|e| ParseError::new(n, e.to_string()))?;
                    sightings.push(s);
                }
                ("M", 4) => {
                    if header.is_some() {
                        return Err(ParseError::new(n, "duplicate M header"));
                    }
                    let speed: f64 = f[2]
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite() && *v > 0.0)
                        .ok_or_else(|| ParseError::new(n, format!("bad speed {:?}", f[2])))?;
                    header = Some((node(n, f[1])?, speed, opt_node(n, f[3])?));
                }
                ("X", 4) => {
                    if header.is_none() {
                        return Err(ParseError::new(n, "X line before the M header"));
                    }
                    crossings.push(Crossing {
                        at: millis(n, f[1])?,
                        from: node(n, f[2])?,
                        to: node(n, f[3])?,
                    });
                }
                ("S" | "M" | "X", got) => {
                    return Err(ParseError::new(
                        n,
                        format!("{} line has {} fields", f[0], got - 1),
                    ))
                }
                (other, _) => return Err(ParseError::new(n, format!("unknown line kind {other:?}"))),
            }
        }
        crossings.sort_by_key(|c| c.at);
        let truth = header
            .map(|(subject, speed, initial)| GroundTruth::from_parts(subject, speed, initial, crossings));
        Ok(TraceFile { sightings, truth })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(t) = &self.truth {
            let initial = t.initial().map_or("-", NodeId::as_str);
            let _ = writeln!(out, "M {} {} {}", t.subject(), t.speed_ftps(), initial);
        }
        for s in &self.sightings {
            let _ = writeln!(
                out,
                "S {} {} {} {}",
                s.at(),
                s.subject(),
                s.observer(),
                s.strength().value()
            );
        }
        if let Some(t) = &self.truth {
            for c in t.crossings() {
                let _ = writeln!(out, "X {} {} {}", c.at, c.from, c.to);
            }
        }
        out
    }
}

pub fn format_changes(changes: &[StateChange]) -> String {
    let mut out = String::new();
    for c in changes {
        let from = c.from.as_ref().map_or("-", NodeId::as_str);
        let _ = writeln!(out, "C {} {} {}", c.at, from, c.to);
    }
    out
}

/// Reads a change log. The file does not name the subject, so the caller
/// supplies it.
pub fn parse_changes(text: &str, subject: &NodeId) -> Result<Vec<StateChange>, ParseError> {
    let mut changes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let ["C", at, from, to] = f[..] else {
            return Err(ParseError::new(n, "expected C <ts_ms> <from|-> <to>"));
        };
        changes.push(StateChange {
            subject: subject.clone(),
            from: opt_node(n, from)?,
            to: node(n, to)?,
            at: millis(n, at)?,
        });
    }
    Ok(changes)
}
