// SPDX-License-Identifier: Apache-2.0

//! Beacon id to location description.
//!
//! ```text
//! BEACON <id> "<description>" [url:<url> | text:"<text>"]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{LocationInfo, LocationRef, NodeId};
use crate::textfmt::{quote, unquote, ParseError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BeaconDirectory {
    entries: BTreeMap<NodeId, LocationRef>,
}

impl BeaconDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the entry for `loc.beacon`.
    pub fn insert(&mut self, loc: LocationRef) {
        self.entries.insert(loc.beacon.clone(), loc);
    }

    pub fn lookup(&self, beacon: &NodeId) -> Option<&LocationRef> {
        self.entries.get(beacon)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut dir = BeaconDirectory::new();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| ParseError::new(n, m);
            let rest = line
                .strip_prefix("BEACON ")
                .ok_or_else(|| err("expected BEACON <id> \"<description>\" [info]"))?;
            let (id, rest) = rest
                .trim_start()
                .split_once(' ')
                .ok_or_else(|| err("missing description"))?;
            let beacon = NodeId::new(id).map_err(|e| ParseError::new(n, e.to_string()))?;
            let (description, rest) =
                unquote(rest.trim_start()).ok_or_else(|| err("description must be quoted"))?;
            let rest = rest.trim();
            let info = if rest.is_empty() {
                None
            } else if let Some(url) = rest.strip_prefix("url:") {
                if url.is_empty() || url.contains(char::is_whitespace) {
                    return Err(err("url must be a single non-empty word"));
                }
                Some(LocationInfo::Url(url.to_string()))
            } else if let Some(q) = rest.strip_prefix("text:") {
                match unquote(q) {
                    Some((t, tail)) if tail.trim().is_empty() => Some(LocationInfo::Text(t)),
                    _ => return Err(err("text info must be one quoted string")),
                }
            } else {
                return Err(err("info must start with url: or text:"));
            };
            dir.insert(LocationRef {
                beacon,
                description,
                info,
            });
        }
        Ok(dir)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for loc in self.entries.values() {
            let _ = write!(out, "BEACON {} {}", loc.beacon, quote(&loc.description));
            match &loc.info {
                Some(LocationInfo::Url(u)) => {
                    let _ = write!(out, " url:{u}");
                }
                Some(LocationInfo::Text(t)) => {
                    let _ = write!(out, " text:{}", quote(t));
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }
}
