// SPDX-License-Identifier: Apache-2.0

//! Ground truth: which fixed node is Euclidean-nearest to the walker, and
//! when that changes.
//!
//! Along a straight leg the squared-distance difference to any two nodes is
//! linear in arc length, so every bisector crossing has a closed form. The
//! truth walks those breakpoints in order and switches the nearest node only
//! when another node is strictly closer; a tie keeps the previous answer.

use crate::model::{NodeId, Timestamp};

use super::trajectory::{Leg, Point, Trajectory};
use super::{FixedNode, RoomModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub at: Timestamp,
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    subject: NodeId,
    speed_ftps: f64,
    initial: Option<NodeId>,
    crossings: Vec<Crossing>,
}

impl GroundTruth {
    /// Assembles a truth record, e.g. one read back from a trace file.
    pub fn from_parts(
        subject: NodeId,
        speed_ftps: f64,
        initial: Option<NodeId>,
        crossings: Vec<Crossing>,
    ) -> Self {
        GroundTruth {
            subject,
            speed_ftps,
            initial,
            crossings,
        }
    }

    pub(crate) fn compute(room: &RoomModel, traj: &Trajectory, end: Timestamp) -> Self {
        let nodes = room.fixed_nodes();
        let start = traj.start();
        let mut current = nearest_strict(nodes, traj.position_at_arc(0.0), None);
        let initial = current;
        let mut crossings = Vec::new();

        let lap = traj.loop_length();
        let total = traj.speed_ftps() * (end.0.saturating_sub(start.0)) as f64 / 1000.0;
        let time_of = |s: f64| Timestamp(start.0 + (s / traj.speed_ftps() * 1000.0).round() as u64);

        if lap > 0.0 {
            let mut lap_start = 0.0;
            'walk: while lap_start < total {
                for leg in traj.legs() {
                    let leg_start = lap_start + leg.start_s;
                    if leg_start >= total {
                        break 'walk;
                    }
                    for (s, next) in leg_changes(nodes, &leg, current) {
                        let at_s = leg_start + s;
                        current = Some(next);
                        let at = time_of(at_s);
                        if at_s >= total || at >= end {
                            break 'walk;
                        }
                        let from = crossings
                            .last()
                            .map(|c: &Crossing| c.to.clone())
                            .or_else(|| initial.map(|i| nodes[i].id.clone()))
                            .expect("a crossing has a previous nearest");
                        crossings.push(Crossing {
                            at,
                            from,
                            to: nodes[next].id.clone(),
                        });
                    }
                }
                lap_start += lap;
            }
        }

        GroundTruth {
            subject: traj.subject().clone(),
            speed_ftps: traj.speed_ftps(),
            initial: initial.map(|i| nodes[i].id.clone()),
            crossings,
        }
    }

    pub fn subject(&self) -> &NodeId {
        &self.subject
    }

    pub fn speed_ftps(&self) -> f64 {
        self.speed_ftps
    }

    /// Nearest node at the trajectory start.
    pub fn initial(&self) -> Option<&NodeId> {
        self.initial.as_ref()
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// Nearest fixed node at `t`: the target of the last crossing at or
    /// before `t`, else the initial node.
    pub fn nearest_at(&self, t: Timestamp) -> Option<&NodeId> {
        let idx = self.crossings.partition_point(|c| c.at <= t);
        match idx {
            0 => self.initial.as_ref(),
            i => Some(&self.crossings[i - 1].to),
        }
    }
}

/// Index of the strictly nearest node. With `keep` given, that node is
/// returned unless another one is strictly closer. Without it, ties go to
/// the smallest id.
fn nearest_strict(nodes: &[FixedNode], p: Point, keep: Option<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = keep.map(|k| (k, p.distance_sq(nodes[k].position)));
    for (i, n) in nodes.iter().enumerate() {
        let d = p.distance_sq(n.position);
        best = match best {
            None => Some((i, d)),
            Some((_, bd)) if d < bd => Some((i, d)),
            Some((b, bd)) if d == bd && keep.is_none() && n.id < nodes[b].id => Some((i, d)),
            other => other,
        };
    }
    best.map(|(i, _)| i)
}

/// Arc-length offsets within `leg` where the nearest node changes, with the
/// node that takes over.
fn leg_changes(nodes: &[FixedNode], leg: &Leg, mut current: Option<usize>) -> Vec<(f64, usize)> {
    let ux = (leg.to.x - leg.from.x) / leg.len;
    let uy = (leg.to.y - leg.from.y) / leg.len;
    let at = |s: f64| Point::new(leg.from.x + s * ux, leg.from.y + s * uy);

    let mut breaks = vec![0.0];
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let (a, b) = (nodes[i].position, nodes[j].position);
            // |p-a|^2 - |p-b|^2 = d0 + 2 s u.(b - a)
            let d0 = leg.from.distance_sq(a) - leg.from.distance_sq(b);
            let slope = 2.0 * (ux * (b.x - a.x) + uy * (b.y - a.y));
            if slope != 0.0 {
                let s = -d0 / slope;
                if s > 0.0 && s < leg.len {
                    breaks.push(s);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks.push(leg.len);

    let mut changes = Vec::new();
    for w in breaks.windows(2) {
        let mid = at(0.5 * (w[0] + w[1]));
        let next = nearest_strict(nodes, mid, current);
        if next != current {
            if let Some(n) = next {
                changes.push((w[0], n));
            }
            current = next;
        }
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn room() -> RoomModel {
        RoomModel::corners(20.0, 15.0, [id("a"), id("b"), id("c"), id("d")]).unwrap()
    }

    fn walk(points: &[(f64, f64)], speed: f64) -> Trajectory {
        Trajectory::new(
            id("m"),
            points.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            speed,
            Timestamp(0),
        )
        .unwrap()
    }

    fn summary(t: &GroundTruth) -> Vec<(u64, &str, &str)> {
        t.crossings()
            .iter()
            .map(|c| (c.at.0, c.from.as_str(), c.to.as_str()))
            .collect()
    }

    #[test]
    fn perimeter_crosses_at_edge_midpoints() {
        let traj = walk(&[(0.0, 0.0), (20.0, 0.0), (20.0, 15.0), (0.0, 15.0)], 2.0);
        let truth = GroundTruth::compute(&room(), &traj, Timestamp(70_000));
        // Lap of 70 ft at 2 ft/s; edge midpoints at 10, 27.5, 45, 62.5 ft.
        assert_eq!(
            summary(&truth),
            vec![
                (5000, "a", "b"),
                (13_750, "b", "c"),
                (22_500, "c", "d"),
                (31_250, "d", "a"),
                (40_000, "a", "b"),
                (48_750, "b", "c"),
                (57_500, "c", "d"),
                (66_250, "d", "a"),
            ]
        );
        assert_eq!(truth.initial(), Some(&id("a")));
    }

    #[test]
    fn end_is_exclusive() {
        let traj = walk(&[(0.0, 0.0), (20.0, 0.0), (20.0, 15.0), (0.0, 15.0)], 2.0);
        let truth = GroundTruth::compute(&room(), &traj, Timestamp(40_000));
        assert_eq!(truth.crossings().len(), 4);
        let truth = GroundTruth::compute(&room(), &traj, Timestamp(40_001));
        assert_eq!(truth.crossings().len(), 5);
    }

    #[test]
    fn nearest_at_follows_crossings() {
        let traj = walk(&[(0.0, 0.0), (20.0, 0.0), (20.0, 15.0), (0.0, 15.0)], 2.0);
        let truth = GroundTruth::compute(&room(), &traj, Timestamp(35_000));
        assert_eq!(truth.nearest_at(Timestamp(0)), Some(&id("a")));
        assert_eq!(truth.nearest_at(Timestamp(4999)), Some(&id("a")));
        assert_eq!(truth.nearest_at(Timestamp(5000)), Some(&id("b")));
        assert_eq!(truth.nearest_at(Timestamp(34_000)), Some(&id("a")));
    }

    #[test]
    fn walking_along_a_bisector_does_not_chatter() {
        // x = 10 is the a/b and c/d bisector; start nearer a/b tie -> a.
        let traj = walk(&[(10.0, 1.0), (10.0, 14.0)], 1.0);
        let truth = GroundTruth::compute(&room(), &traj, Timestamp(26_000));
        assert_eq!(truth.initial(), Some(&id("a")));
        // Crossing y = 7.5 hands over to the top pair (c wins the c/d tie
        // as the first strictly closer node), then back on the return leg.
        let s = summary(&truth);
        assert_eq!(s.len(), 2, "{s:?}");
        assert_eq!(s[0].0, 6500);
        assert_eq!(s[1].0, 19_500);
    }

    #[test]
    fn diagonal_walk_matches_brute_force() {
        let traj = walk(&[(1.0, 2.0), (19.0, 13.0), (3.0, 14.0), (17.0, 1.0)], 1.5);
        let end = Timestamp(120_000);
        let truth = GroundTruth::compute(&room(), &traj, end);
        // Sample every 10 ms and compare with direct nearest computation.
        let nodes = room().fixed_nodes().to_vec();
        let mut mismatches = 0;
        for t in (0..end.0).step_by(10) {
            let p = traj.position_at(Timestamp(t)).unwrap();
            let dists: Vec<f64> = nodes.iter().map(|n| p.distance(n.position)).collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            let want = truth.nearest_at(Timestamp(t)).unwrap();
            let idx = nodes.iter().position(|n| &n.id == want).unwrap();
            if dists[idx] > min + 1e-9 {
                let near_crossing = truth.crossings().iter().any(|c| c.at.0.abs_diff(t) <= 1);
                if !near_crossing {
                    mismatches += 1;
                }
            }
        }
        assert_eq!(mismatches, 0);
        assert!(truth.crossings().len() >= 4);
    }
}
