// SPDX-License-Identifier: Apache-2.0

//! Event-time sighting history with horizon-based expiry.
//!
//! The window is keyed by `(subject, observer)`; each key holds the
//! timestamp-ordered strengths heard for that pair. Every accepted insert
//! advances the window's newest timestamp and evicts anything older than
//! `newest - horizon`. The lower bound is inclusive: a sighting exactly one
//! horizon old is kept.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{NodeId, Sighting, SignalStrength, Timestamp};

pub const DEFAULT_HORIZON_MS: u64 = 6000;

/// One stored cell of the history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub strength: SignalStrength,
    pub at: Timestamp,
    /// Set by the detector when this sighting made its observer the
    /// strongest location on arrival.
    pub announced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryWindow {
    horizon_ms: u64,
    max_per_pair: Option<usize>,
    entries: BTreeMap<NodeId, BTreeMap<NodeId, VecDeque<Entry>>>,
    newest: Option<Timestamp>,
}

impl Default for MemoryWindow {
    fn default() -> Self {
        MemoryWindow::new(DEFAULT_HORIZON_MS)
    }
}

impl MemoryWindow {
    pub fn new(horizon_ms: u64) -> Self {
        MemoryWindow {
            horizon_ms,
            max_per_pair: None,
            entries: BTreeMap::new(),
            newest: None,
        }
    }

    /// Caps each `(subject, observer)` sequence, dropping its oldest entries
    /// first. Unlimited by default.
    pub fn with_max_per_pair(mut self, max: usize) -> Self {
        self.max_per_pair = Some(max.max(1));
        self
    }

    pub fn horizon_ms(&self) -> u64 {
        self.horizon_ms
    }

    /// Timestamp of the latest sighting ever accepted.
    pub fn newest(&self) -> Option<Timestamp> {
        self.newest
    }

    /// Oldest timestamp still admissible.
    pub fn cutoff(&self) -> Option<Timestamp> {
        self.newest.map(|n| n.saturating_sub(self.horizon_ms))
    }

    pub fn len(&self) -> usize {
        self.entries
            .values()
            .flat_map(|per_obs| per_obs.values())
            .map(VecDeque::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `s` unless it is older than the horizon. Returns whether it was
    /// accepted; a rejected sighting leaves the window untouched.
    pub fn insert(&mut self, s: &Sighting) -> bool {
        let newest = self.newest.map_or(s.at(), |n| n.max(s.at()));
        let cutoff = newest.saturating_sub(self.horizon_ms);
        if s.at() < cutoff {
            return false;
        }

        let seq = self
            .entries
            .entry(s.subject().clone())
            .or_default()
            .entry(s.observer().clone())
            .or_default();
        // Stable among equal timestamps: land after every entry with at <= s.at.
        let pos = seq.partition_point(|e| e.at <= s.at());
        seq.insert(
            pos,
            Entry {
                strength: s.strength(),
                at: s.at(),
                announced: false,
            },
        );
        if let Some(max) = self.max_per_pair {
            while seq.len() > max {
                seq.pop_front();
            }
        }

        self.newest = Some(newest);
        self.evict(cutoff);
        true
    }

    fn evict(&mut self, cutoff: Timestamp) {
        self.entries.retain(|_, per_obs| {
            per_obs.retain(|_, seq| {
                while seq.front().is_some_and(|e| e.at < cutoff) {
                    seq.pop_front();
                }
                !seq.is_empty()
            });
            !per_obs.is_empty()
        });
    }

    /// The `min(k, available)` most recent entries for the pair, newest last.
    pub fn last_k(&self, subject: &NodeId, observer: &NodeId, k: usize) -> Vec<Entry> {
        match self.sequence(subject, observer) {
            Some(seq) => seq.iter().skip(seq.len().saturating_sub(k)).copied().collect(),
            None => Vec::new(),
        }
    }

    /// Number of in-window entries for the pair.
    pub fn count(&self, subject: &NodeId, observer: &NodeId) -> usize {
        self.sequence(subject, observer).map_or(0, VecDeque::len)
    }

    /// Most recent entry for the pair.
    pub fn latest(&self, subject: &NodeId, observer: &NodeId) -> Option<Entry> {
        self.sequence(subject, observer)
            .and_then(|seq| seq.back().copied())
    }

    /// Flags the pair's most recent entry as announcing its observer.
    pub fn mark_latest_announced(&mut self, subject: &NodeId, observer: &NodeId) {
        if let Some(e) = self
            .entries
            .get_mut(subject)
            .and_then(|per_obs| per_obs.get_mut(observer))
            .and_then(VecDeque::back_mut)
        {
            e.announced = true;
        }
    }

    pub fn observers_of(&self, subject: &NodeId) -> BTreeSet<NodeId> {
        self.observers(subject).cloned().collect()
    }

    /// Observers with at least one in-window sighting of `subject`, in id order.
    pub fn observers<'a>(&'a self, subject: &NodeId) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.entries
            .get(subject)
            .into_iter()
            .flat_map(|per_obs| per_obs.keys())
    }

    /// All entries for the pair, oldest first.
    pub fn history<'a>(
        &'a self,
        subject: &NodeId,
        observer: &NodeId,
    ) -> impl DoubleEndedIterator<Item = &'a Entry> + 'a {
        self.sequence(subject, observer).into_iter().flatten()
    }

    fn sequence(&self, subject: &NodeId, observer: &NodeId) -> Option<&VecDeque<Entry>> {
        self.entries.get(subject)?.get(observer)
    }
}
