// SPDX-License-Identifier: Apache-2.0

//! Nearest-beacon proximity detection with confirmation.
//!
//! Every sighting of the tracked subject goes through the same cycle:
//!
//! 1. the sighting arrives carrying its event timestamp;
//! 2. it is added to the [`MemoryWindow`], which evicts expired entries;
//! 3. the window is searched for a state change;
//! 4. on success the last confirmed location becomes the last known one;
//! 5. [`ProximityDetector::current_location`] reports the confirmed location.
//!
//! The *last known* location is the observer whose most recent sighting is
//! strongest. It flips freely when the subject sits between beacons. A state
//! change needs three things to hold at once:
//!
//! * (a) the last known location differs from the last confirmed one;
//! * (b) the window holds at least `k` sightings announcing the candidate;
//! * (c) the mean of the candidate's last `k` strengths is strictly greater
//!   than the mean of every other observer's last (up to) `k` strengths.
//!
//! A sighting *announces* its observer when, on arrival, it is that
//! observer's newest entry and makes the observer the last known location.
//! Evidence heard before the subject actually moved therefore does not count
//! towards (b). [`EvidenceRule::AnySighting`] relaxes (b) to "at least `k`
//! in-window sightings from the candidate".

use thiserror::Error;

use crate::memory::{MemoryWindow, DEFAULT_HORIZON_MS};
use crate::model::{NodeId, Sighting, Timestamp};

pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectorError {
    #[error("sighting of {got} fed to the detector tracking {expected}")]
    SubjectMismatch { expected: NodeId, got: NodeId },
    #[error("invalid detector config: {0}")]
    InvalidConfig(&'static str),
}

/// Which in-window sightings count towards criterion (b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvidenceRule {
    /// Only sightings that announced the candidate on arrival.
    #[default]
    Announcing,
    /// Every sighting from the candidate.
    AnySighting,
}

impl std::str::FromStr for EvidenceRule {
    type Err = DetectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "announcing" => Ok(EvidenceRule::Announcing),
            "any" => Ok(EvidenceRule::AnySighting),
            _ => Err(DetectorError::InvalidConfig("evidence rule is announcing or any")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorConfig {
    horizon_ms: u64,
    k: usize,
    evidence: EvidenceRule,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            horizon_ms: DEFAULT_HORIZON_MS,
            k: DEFAULT_K,
            evidence: EvidenceRule::default(),
        }
    }
}

impl DetectorConfig {
    pub fn new(horizon_ms: u64, k: usize) -> Result<Self, DetectorError> {
        if horizon_ms == 0 {
            return Err(DetectorError::InvalidConfig("horizon must be positive"));
        }
        if k == 0 {
            return Err(DetectorError::InvalidConfig("k must be at least 1"));
        }
        Ok(DetectorConfig {
            horizon_ms,
            k,
            evidence: EvidenceRule::default(),
        })
    }

    pub fn with_evidence(mut self, evidence: EvidenceRule) -> Self {
        self.evidence = evidence;
        self
    }

    pub fn evidence(&self) -> EvidenceRule {
        self.evidence
    }

    pub fn horizon_ms(&self) -> u64 {
        self.horizon_ms
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// A confirmed move of `subject` from one location to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateChange {
    pub subject: NodeId,
    pub from: Option<NodeId>,
    pub to: NodeId,
    pub at: Timestamp,
}

/// Detector state for one tracked subject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityDetector {
    subject: NodeId,
    config: DetectorConfig,
    window: MemoryWindow,
    last_confirmed: Option<NodeId>,
    confirmed_at: Option<Timestamp>,
}

impl ProximityDetector {
    pub fn new(subject: NodeId, config: DetectorConfig) -> Self {
        ProximityDetector {
            subject,
            config,
            window: MemoryWindow::new(config.horizon_ms),
            last_confirmed: None,
            confirmed_at: None,
        }
    }

    pub fn subject(&self) -> &NodeId {
        &self.subject
    }

    pub fn config(&self) -> DetectorConfig {
        self.config
    }

    pub fn window(&self) -> &MemoryWindow {
        &self.window
    }

    pub fn confirmed_at(&self) -> Option<Timestamp> {
        self.confirmed_at
    }

    /// Observer with the strongest most-recent sighting; ties go to the
    /// smallest id. No confidence is attached to this answer.
    pub fn last_known(&self) -> Option<&NodeId> {
        let mut best: Option<(&NodeId, u8)> = None;
        // Observers iterate in id order, so keeping the first maximum is the
        // lexicographic tie-break.
        for obs in self.window.observers(&self.subject) {
            let Some(latest) = self.window.latest(&self.subject, obs) else {
                continue;
            };
            let strength = latest.strength.value();
            if best.is_none_or(|(_, s)| strength > s) {
                best = Some((obs, strength));
            }
        }
        best.map(|(obs, _)| obs)
    }

    /// The candidate location if criteria (a), (b) and (c) all hold.
    pub fn check_state_change(&self) -> Option<&NodeId> {
        let candidate = self.last_known()?;
        if self.last_confirmed.as_ref() == Some(candidate) {
            return None;
        }

        let k = self.config.k;
        let evidence = match self.config.evidence {
            EvidenceRule::Announcing => self
                .window
                .history(&self.subject, candidate)
                .filter(|e| e.announced)
                .count(),
            EvidenceRule::AnySighting => self.window.count(&self.subject, candidate),
        };
        if evidence < k {
            return None;
        }
        let mine = self.window.last_k(&self.subject, candidate, k);
        let my_sum: u64 = mine.iter().map(|e| u64::from(e.strength.value())).sum();
        let my_n = mine.len() as u64;

        for other in self.window.observers(&self.subject) {
            if other == candidate {
                continue;
            }
            let theirs = self.window.last_k(&self.subject, other, k);
            let their_sum: u64 = theirs.iter().map(|e| u64::from(e.strength.value())).sum();
            let their_n = theirs.len() as u64;
            // mean(mine) > mean(theirs), cross-multiplied to stay exact.
            if my_sum * their_n <= their_sum * my_n {
                return None;
            }
        }
        Some(candidate)
    }

    /// Runs one full detection cycle for `s`.
    pub fn ingest(&mut self, s: &Sighting) -> Result<Option<StateChange>, DetectorError> {
        if s.subject() != &self.subject {
            return Err(DetectorError::SubjectMismatch {
                expected: self.subject.clone(),
                got: s.subject().clone(),
            });
        }
        let newest_for_pair = self
            .window
            .latest(&self.subject, s.observer())
            .is_none_or(|e| s.at() >= e.at);
        if !self.window.insert(s) {
            return Ok(None);
        }
        if newest_for_pair && self.last_known() == Some(s.observer()) {
            self.window.mark_latest_announced(&self.subject, s.observer());
        }
        let Some(to) = self.check_state_change().cloned() else {
            return Ok(None);
        };
        let from = self.last_confirmed.replace(to.clone());
        self.confirmed_at = Some(s.at());
        Ok(Some(StateChange {
            subject: self.subject.clone(),
            from,
            to,
            at: s.at(),
        }))
    }

    /// Last confirmed location, or `None` before the first confirmation.
    pub fn current_location(&self) -> Option<&NodeId> {
        self.last_confirmed.as_ref()
    }
}

/// Replays a trace that may interleave several subjects, running one
/// detector per subject. Changes are returned in trace order.
pub fn replay<'a, I>(sightings: I, config: DetectorConfig) -> Vec<StateChange>
where
    I: IntoIterator<Item = &'a Sighting>,
{
    let mut detectors = std::collections::BTreeMap::<NodeId, ProximityDetector>::new();
    let mut changes = Vec::new();
    for s in sightings {
        let det = detectors
            .entry(s.subject().clone())
            .or_insert_with(|| ProximityDetector::new(s.subject().clone(), config));
        if let Some(change) = det.ingest(s).expect("detector keyed by subject") {
            changes.push(change);
        }
    }
    changes
}
