// SPDX-License-Identifier: Apache-2.0

//! Deterministic trace generator for a room of fixed motes and one walker.
//!
//! Every fixed node takes a reading of the mobile once per beacon interval.
//! Each node's ticks are offset by a phase drawn from the seed so that nodes
//! do not report in lockstep. The whole run is a pure function of the
//! [`Scenario`]: the same scenario always yields the same trace.

mod radio;
mod scenario_file;
mod score;
mod trajectory;
mod truth;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{NodeId, Sighting, Timestamp};

pub use radio::RadioModel;
pub use score::{score, Metrics, ScoreError};
pub use trajectory::{Point, Trajectory};
pub use truth::{Crossing, GroundTruth};

pub const DEFAULT_BEACON_INTERVAL_MS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("time {t} is before the trajectory start {start}")]
    BeforeStart { t: Timestamp, start: Timestamp },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedNode {
    pub id: NodeId,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomModel {
    width_ft: f64,
    depth_ft: f64,
    fixed_nodes: Vec<FixedNode>,
    base_station: NodeId,
}

impl RoomModel {
    pub fn new(
        width_ft: f64,
        depth_ft: f64,
        fixed_nodes: Vec<FixedNode>,
        base_station: NodeId,
    ) -> Result<Self, SimError> {
        if !(width_ft.is_finite() && width_ft > 0.0 && depth_ft.is_finite() && depth_ft > 0.0) {
            return Err(SimError::Invalid("room dimensions must be positive".into()));
        }
        if fixed_nodes.is_empty() {
            return Err(SimError::Invalid("room needs at least one fixed node".into()));
        }
        for (i, n) in fixed_nodes.iter().enumerate() {
            let p = n.position;
            if !(0.0..=width_ft).contains(&p.x) || !(0.0..=depth_ft).contains(&p.y) {
                return Err(SimError::Invalid(format!("node {} lies outside the room", n.id)));
            }
            if fixed_nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(SimError::Invalid(format!("duplicate node id {}", n.id)));
            }
        }
        if !fixed_nodes.iter().any(|n| n.id == base_station) {
            return Err(SimError::Invalid(format!(
                "base station {base_station} is not a fixed node"
            )));
        }
        Ok(RoomModel {
            width_ft,
            depth_ft,
            fixed_nodes,
            base_station,
        })
    }

    /// Rectangle with one node in each corner. The first id is the base
    /// station at the origin; the rest go counter-clockwise.
    pub fn corners(width_ft: f64, depth_ft: f64, ids: [NodeId; 4]) -> Result<Self, SimError> {
        let [a, b, c, d] = ids;
        let base = a.clone();
        RoomModel::new(
            width_ft,
            depth_ft,
            vec![
                FixedNode {
                    id: a,
                    position: Point::new(0.0, 0.0),
                },
                FixedNode {
                    id: b,
                    position: Point::new(width_ft, 0.0),
                },
                FixedNode {
                    id: c,
                    position: Point::new(width_ft, depth_ft),
                },
                FixedNode {
                    id: d,
                    position: Point::new(0.0, depth_ft),
                },
            ],
            base,
        )
    }

    pub fn width_ft(&self) -> f64 {
        self.width_ft
    }

    pub fn depth_ft(&self) -> f64 {
        self.depth_ft
    }

    pub fn fixed_nodes(&self) -> &[FixedNode] {
        &self.fixed_nodes
    }

    pub fn base_station(&self) -> &NodeId {
        &self.base_station
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub room: RoomModel,
    pub trajectory: Trajectory,
    pub radio: RadioModel,
    pub beacon_interval_ms: u64,
    pub duration_ms: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(
        room: RoomModel,
        trajectory: Trajectory,
        radio: RadioModel,
        beacon_interval_ms: u64,
        duration_ms: u64,
        seed: u64,
    ) -> Result<Self, SimError> {
        if beacon_interval_ms == 0 {
            return Err(SimError::Invalid("beacon interval must be positive".into()));
        }
        if duration_ms == 0 {
            return Err(SimError::Invalid("duration must be positive".into()));
        }
        if room.fixed_nodes.iter().any(|n| &n.id == trajectory.subject()) {
            return Err(SimError::Invalid(format!(
                "mobile {} shares an id with a fixed node",
                trajectory.subject()
            )));
        }
        Ok(Scenario {
            room,
            trajectory,
            radio,
            beacon_interval_ms,
            duration_ms,
            seed,
        })
    }

    pub fn end(&self) -> Timestamp {
        Timestamp(self.trajectory.start().0 + self.duration_ms)
    }

    pub fn mobile(&self) -> &NodeId {
        self.trajectory.subject()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub trace: Vec<Sighting>,
    pub truth: GroundTruth,
    /// Ticks whose reading was lost to `drop_prob`.
    pub dropped: usize,
}

impl SimOutput {
    /// Nearest fixed node at each trace event, aligned with `trace`.
    pub fn nearest_per_event(&self) -> Vec<Option<NodeId>> {
        self.trace
            .iter()
            .map(|s| self.truth.nearest_at(s.at()).cloned())
            .collect()
    }
}

pub fn run(scenario: &Scenario) -> SimOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let start = scenario.trajectory.start().0;
    let end = scenario.end().0;
    let interval = scenario.beacon_interval_ms;

    let mut ticks: Vec<(u64, usize)> = Vec::new();
    for (idx, _) in scenario.room.fixed_nodes.iter().enumerate() {
        let phase = rng.random_range(0..interval);
        let mut t = start + phase;
        while t < end {
            ticks.push((t, idx));
            t += interval;
        }
    }
    let nodes = &scenario.room.fixed_nodes;
    ticks.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| nodes[a.1].id.cmp(&nodes[b.1].id)));

    let mut trace = Vec::with_capacity(ticks.len());
    let mut dropped = 0;
    for (t, idx) in ticks {
        if rng.random_bool(scenario.radio.drop_prob()) {
            dropped += 1;
            continue;
        }
        let at = Timestamp(t);
        let pos = scenario.trajectory.position_at(at).expect("tick after start");
        let strength = scenario
            .radio
            .strength_at(pos.distance(nodes[idx].position), &mut rng);
        let s = Sighting::new(scenario.mobile().clone(), nodes[idx].id.clone(), strength, at)
            .expect("mobile id differs from fixed ids");
        trace.push(s);
    }

    SimOutput {
        trace,
        truth: GroundTruth::compute(&scenario.room, &scenario.trajectory, scenario.end()),
        dropped,
    }
}
