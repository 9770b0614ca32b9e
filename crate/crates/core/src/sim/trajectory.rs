// SPDX-License-Identifier: Apache-2.0

use crate::model::{NodeId, Timestamp};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub(crate) fn distance_sq(self, other: Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }
}

/// A closed waypoint loop walked at constant speed. After the last waypoint
/// the walker heads back to the first one and starts over.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    subject: NodeId,
    waypoints: Vec<Point>,
    speed_ftps: f64,
    start: Timestamp,
    // cumulative[i] = arc length from waypoint 0 to waypoint i; the final
    // entry closes the loop.
    cumulative: Vec<f64>,
}

/// One leg of the loop, in arc-length coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Leg {
    pub from: Point,
    pub to: Point,
    pub start_s: f64,
    pub len: f64,
}

impl Trajectory {
    pub fn new(
        subject: NodeId,
        waypoints: Vec<Point>,
        speed_ftps: f64,
        start: Timestamp,
    ) -> Result<Self, SimError> {
        if waypoints.len() < 2 {
            return Err(SimError::Invalid(
                "trajectory needs at least two waypoints".into(),
            ));
        }
        if !(speed_ftps.is_finite() && speed_ftps > 0.0) {
            return Err(SimError::Invalid("speed must be positive".into()));
        }
        if waypoints.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(SimError::Invalid("waypoint coordinates must be finite".into()));
        }
        let mut cumulative = Vec::with_capacity(waypoints.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for i in 0..waypoints.len() {
            let next = waypoints[(i + 1) % waypoints.len()];
            acc += waypoints[i].distance(next);
            cumulative.push(acc);
        }
        Ok(Trajectory {
            subject,
            waypoints,
            speed_ftps,
            start,
            cumulative,
        })
    }

    pub fn subject(&self) -> &NodeId {
        &self.subject
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn speed_ftps(&self) -> f64 {
        self.speed_ftps
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    /// Length of one full lap in feet.
    pub fn loop_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Distance walked since `start`, without wrapping.
    pub fn path_length_at(&self, t: Timestamp) -> Result<f64, SimError> {
        if t < self.start {
            return Err(SimError::BeforeStart { t, start: self.start });
        }
        Ok(self.speed_ftps * (t.0 - self.start.0) as f64 / 1000.0)
    }

    pub fn position_at(&self, t: Timestamp) -> Result<Point, SimError> {
        let s = self.path_length_at(t)?;
        Ok(self.position_at_arc(s))
    }

    pub(crate) fn position_at_arc(&self, s: f64) -> Point {
        let lap = self.loop_length();
        if lap == 0.0 {
            return self.waypoints[0];
        }
        let s = s.rem_euclid(lap);
        let leg = self.cumulative.partition_point(|&c| c <= s).saturating_sub(1);
        let leg = leg.min(self.waypoints.len() - 1);
        let from = self.waypoints[leg];
        let to = self.waypoints[(leg + 1) % self.waypoints.len()];
        let len = self.cumulative[leg + 1] - self.cumulative[leg];
        if len == 0.0 {
            return from;
        }
        let f = (s - self.cumulative[leg]) / len;
        Point::new(from.x + f * (to.x - from.x), from.y + f * (to.y - from.y))
    }

    /// Legs of one lap, in order, skipping zero-length ones.
    pub(crate) fn legs(&self) -> impl Iterator<Item = Leg> + '_ {
        (0..self.waypoints.len()).filter_map(move |i| {
            let len = self.cumulative[i + 1] - self.cumulative[i];
            (len > 0.0).then(|| Leg {
                from: self.waypoints[i],
                to: self.waypoints[(i + 1) % self.waypoints.len()],
                start_s: self.cumulative[i],
                len,
            })
        })
    }
}
