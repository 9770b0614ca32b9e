// SPDX-License-Identifier: Apache-2.0

//! Node-state database and the query service in front of it.
//!
//! The [`Gateway`] keeps one derived record per node: confirmed location,
//! sensor snapshot, and the event time of the last update. Records only move
//! forward in time; an update older than the stored one is refused and the
//! record is left as it was. All mutations go through a single lock, so
//! concurrent writers to one node serialize in acknowledgement order.
//!
//! The gateway has no wall clock. "Now" is the newest event time it has
//! seen, which keeps online/offline answers reproducible under replay.

mod directory;
mod journal;
mod protocol;
mod server;

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use thiserror::Error;

use crate::detector::StateChange;
use crate::model::{LocationRef, NodeId, NodeRole, Timestamp};
use crate::sensor::ContextSnapshot;

pub use directory::BeaconDirectory;
pub use journal::{JournalRecord, JournalWriter};
pub use protocol::{parse_request, respond, Request};
pub use server::{handle_session, query, Server};

/// Twice the default detector horizon.
pub const DEFAULT_OFFLINE_AFTER_MS: u64 = 12_000;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("update for {node} at {at} is older than its record at {updated_at}")]
    StaleUpdate {
        node: NodeId,
        at: Timestamp,
        updated_at: Timestamp,
    },
    #[error("{0} not found")]
    NotFound(NodeId),
    #[error("journal: {0}")]
    Journal(#[from] std::io::Error),
    #[error("journal {0}")]
    JournalParse(#[from] crate::textfmt::ParseError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub node: NodeId,
    pub role: NodeRole,
    pub confirmed_location: Option<NodeId>,
    pub online: bool,
    pub sensors: Option<ContextSnapshot>,
    pub updated_at: Timestamp,
}

impl NodeState {
    fn new(node: NodeId, role: NodeRole, at: Timestamp) -> Self {
        NodeState {
            node,
            role,
            confirmed_location: None,
            online: false,
            sensors: None,
            updated_at: at,
        }
    }
}

#[derive(Debug, Default)]
struct Inner {
    nodes: HashMap<NodeId, NodeState>,
    clock: Timestamp,
    journal: Option<JournalWriter>,
}

impl Inner {
    fn record(&mut self, rec: &JournalRecord) -> Result<(), GatewayError> {
        if let Some(j) = self.journal.as_mut() {
            j.append(rec)?;
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct Gateway {
    inner: Mutex<Inner>,
    directory: BeaconDirectory,
    offline_after_ms: u64,
}

impl Gateway {
    pub fn new(directory: BeaconDirectory) -> Self {
        Gateway {
            inner: Mutex::new(Inner::default()),
            directory,
            offline_after_ms: DEFAULT_OFFLINE_AFTER_MS,
        }
    }

    pub fn with_offline_after(mut self, ms: u64) -> Self {
        self.offline_after_ms = ms;
        self
    }

    /// Replays the journal at `path` if it exists, then appends every
    /// accepted update to it. Stale records in the journal are skipped.
    pub fn with_journal(self, path: &Path) -> Result<Self, GatewayError> {
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            for rec in journal::parse(&text)? {
                match self.apply_record(&rec) {
                    Ok(()) | Err(GatewayError::StaleUpdate { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        self.lock().journal = Some(JournalWriter::open(path)?);
        Ok(self)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        // A panicking session cannot leave a record half-written: every
        // mutation is a single assignment after validation.
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn directory(&self) -> &BeaconDirectory {
        &self.directory
    }

    pub fn offline_after_ms(&self) -> u64 {
        self.offline_after_ms
    }

    /// Newest event time applied so far.
    pub fn now(&self) -> Timestamp {
        self.lock().clock
    }

    pub fn apply_record(&self, rec: &JournalRecord) -> Result<(), GatewayError> {
        match rec {
            JournalRecord::Node { node, role } => self.register(node.clone(), *role),
            JournalRecord::Change(c) => self.apply_change(c).map(drop),
            JournalRecord::Sensors(s) => self.apply_sensors(s.clone()).map(drop),
        }
    }

    /// Sets a node's role, creating an empty record if needed.
    pub fn register(&self, node: NodeId, role: NodeRole) -> Result<(), GatewayError> {
        let mut inner = self.lock();
        inner.record(&JournalRecord::Node {
            node: node.clone(),
            role,
        })?;
        inner
            .nodes
            .entry(node.clone())
            .or_insert_with(|| NodeState::new(node, role, Timestamp(0)))
            .role = role;
        Ok(())
    }

    pub fn apply_change(&self, change: &StateChange) -> Result<NodeState, GatewayError> {
        let mut inner = self.lock();
        if let Some(existing) = inner.nodes.get(&change.subject) {
            if change.at < existing.updated_at {
                return Err(GatewayError::StaleUpdate {
                    node: change.subject.clone(),
                    at: change.at,
                    updated_at: existing.updated_at,
                });
            }
        }
        inner.record(&JournalRecord::Change(change.clone()))?;
        inner.clock = inner.clock.max(change.at);
        let rec = inner
            .nodes
            .entry(change.subject.clone())
            .or_insert_with(|| NodeState::new(change.subject.clone(), NodeRole::MobileMote, change.at));
        rec.confirmed_location = Some(change.to.clone());
        rec.updated_at = change.at;
        Ok(rec.clone())
    }

    /// Merges a snapshot. The stored snapshot is replaced only by one at
    /// least as new; older snapshots are accepted but change nothing.
    pub fn apply_sensors(&self, snap: ContextSnapshot) -> Result<NodeState, GatewayError> {
        let mut inner = self.lock();
        inner.record(&JournalRecord::Sensors(snap.clone()))?;
        inner.clock = inner.clock.max(snap.at);
        let rec = inner
            .nodes
            .entry(snap.node.clone())
            .or_insert_with(|| NodeState::new(snap.node.clone(), NodeRole::FixedMote, snap.at));
        rec.updated_at = rec.updated_at.max(snap.at);
        if rec.sensors.as_ref().is_none_or(|s| snap.at >= s.at) {
            rec.sensors = Some(snap);
        }
        Ok(rec.clone())
    }

    /// The node's record with `online` evaluated at `now`.
    pub fn lookup_state(&self, node: &NodeId, now: Timestamp) -> Result<NodeState, GatewayError> {
        let inner = self.lock();
        let mut rec = inner
            .nodes
            .get(node)
            .cloned()
            .ok_or_else(|| GatewayError::NotFound(node.clone()))?;
        rec.online = now.0.saturating_sub(rec.updated_at.0) <= self.offline_after_ms;
        Ok(rec)
    }

    /// Like [`Gateway::lookup_state`] at the gateway's own clock.
    pub fn lookup_state_now(&self, node: &NodeId) -> Result<NodeState, GatewayError> {
        let now = self.now();
        self.lookup_state(node, now)
    }

    pub fn lookup_beacon(&self, beacon: &NodeId) -> Result<LocationRef, GatewayError> {
        self.directory
            .lookup(beacon)
            .cloned()
            .ok_or_else(|| GatewayError::NotFound(beacon.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::{Channel, ContextValue};
    use std::collections::BTreeMap;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn change(at: u64, from: Option<&str>, to: &str) -> StateChange {
        StateChange {
            subject: id("m"),
            from: from.map(id),
            to: id(to),
            at: Timestamp(at),
        }
    }

    fn snap(node: &str, at: u64, value: f64) -> ContextSnapshot {
        let mut values = BTreeMap::new();
        values.insert(
            Channel::Photo,
            ContextValue {
                value,
                label: "dim".into(),
            },
        );
        ContextSnapshot {
            node: id(node),
            at: Timestamp(at),
            values,
        }
    }

    fn gateway() -> Gateway {
        Gateway::new(BeaconDirectory::default())
    }

    #[test]
    fn change_creates_mobile_record() {
        let gw = gateway();
        let rec = gw.apply_change(&change(5, None, "a")).unwrap();
        assert_eq!(rec.role, NodeRole::MobileMote);
        assert_eq!(rec.confirmed_location, Some(id("a")));
        assert_eq!(rec.updated_at, Timestamp(5));
    }

    #[test]
    fn stale_change_is_rejected() {
        let gw = gateway();
        gw.apply_change(&change(10, None, "a")).unwrap();
        let err = gw.apply_change(&change(5, Some("a"), "b")).unwrap_err();
        assert!(matches!(err, GatewayError::StaleUpdate { .. }));
        let rec = gw.lookup_state(&id("m"), Timestamp(10)).unwrap();
        assert_eq!(rec.confirmed_location, Some(id("a")));
        assert_eq!(rec.updated_at, Timestamp(10));
    }

    #[test]
    fn newer_change_moves_record() {
        let gw = gateway();
        gw.apply_change(&change(10, None, "a")).unwrap();
        let rec = gw.apply_change(&change(12, Some("a"), "b")).unwrap();
        assert_eq!(rec.confirmed_location, Some(id("b")));
        assert_eq!(rec.updated_at, Timestamp(12));
    }

    #[test]
    fn sensors_latest_wins_per_field() {
        let gw = gateway();
        let rec = gw.apply_sensors(snap("fms02", 100, 40.0)).unwrap();
        assert_eq!(rec.role, NodeRole::FixedMote);
        let rec = gw.apply_sensors(snap("fms02", 50, 10.0)).unwrap();
        assert_eq!(rec.updated_at, Timestamp(100));
        assert_eq!(rec.sensors.unwrap().at, Timestamp(100));
        let rec = gw.apply_sensors(snap("fms02", 150, 70.0)).unwrap();
        assert_eq!(rec.sensors.unwrap().values[&Channel::Photo].value, 70.0);
    }

    #[test]
    fn snapshot_then_change_then_query() {
        let gw = gateway();
        gw.apply_sensors(snap("m", 1000, 55.0)).unwrap();
        gw.apply_change(&change(2000, None, "a")).unwrap();
        let rec = gw.lookup_state(&id("m"), Timestamp(2000)).unwrap();
        assert_eq!(rec.confirmed_location, Some(id("a")));
        assert_eq!(rec.sensors.unwrap().values[&Channel::Photo].value, 55.0);
        assert_eq!(rec.updated_at, Timestamp(2000));
    }

    #[test]
    fn online_window() {
        let gw = gateway();
        assert!(matches!(
            gw.lookup_state(&id("m"), Timestamp(0)),
            Err(GatewayError::NotFound(_))
        ));
        gw.apply_change(&change(10_000, None, "a")).unwrap();
        assert!(gw.lookup_state(&id("m"), Timestamp(15_000)).unwrap().online);
        assert!(gw.lookup_state(&id("m"), Timestamp(22_000)).unwrap().online);
        assert!(!gw.lookup_state(&id("m"), Timestamp(23_000)).unwrap().online);
    }

    #[test]
    fn clock_is_newest_event() {
        let gw = gateway();
        assert_eq!(gw.now(), Timestamp(0));
        gw.apply_change(&change(7000, None, "a")).unwrap();
        gw.apply_sensors(snap("x", 3000, 1.0)).unwrap();
        assert_eq!(gw.now(), Timestamp(7000));
        // x last updated 4 s before the clock: still online.
        assert!(gw.lookup_state_now(&id("x")).unwrap().online);
    }

    #[test]
    fn register_sets_role() {
        let gw = gateway();
        gw.register(id("fbs01"), NodeRole::BaseStation).unwrap();
        assert_eq!(
            gw.lookup_state_now(&id("fbs01")).unwrap().role,
            NodeRole::BaseStation
        );
        gw.apply_change(&change(1, None, "a")).unwrap();
        gw.register(id("m"), NodeRole::WearableClient).unwrap();
        let rec = gw.lookup_state_now(&id("m")).unwrap();
        assert_eq!(rec.role, NodeRole::WearableClient);
        assert_eq!(rec.confirmed_location, Some(id("a")));
    }
}
