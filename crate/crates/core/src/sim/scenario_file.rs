// SPDX-License-Identifier: Apache-2.0

//! Line-oriented scenario description.
//!
//! ```text
//! ROOM <w> <d>
//! NODE <id> <x> <y>        # one per fixed node
//! BASE <id>
//! MOBILE <id>
//! WAYPOINT <x> <y>         # at least two, walked as a closed loop
//! SPEED <ftps>
//! RADIO <a> <b> <dmin> <sigma> <drop>   # optional, defaults 200 80 1 0 0
//! INTERVAL <ms>            # optional, default 1000
//! DURATION <ms>
//! SEED <n>                 # optional, default 0
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::model::{NodeId, Timestamp};
use crate::textfmt::ParseError;

use super::{FixedNode, Point, RadioModel, RoomModel, Scenario, Trajectory, DEFAULT_BEACON_INTERVAL_MS};

fn num<T: FromStr>(lineno: usize, what: &str, s: &str) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| ParseError::new(lineno, format!("{what}: cannot parse {s:?}")))
}

fn id(lineno: usize, s: &str) -> Result<NodeId, ParseError> {
    NodeId::new(s).map_err(|e| ParseError::new(lineno, e.to_string()))
}

fn once<T>(slot: &mut Option<T>, value: T, lineno: usize, directive: &str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(ParseError::new(
            lineno,
            format!("duplicate {directive} directive"),
        ));
    }
    *slot = Some(value);
    Ok(())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ParseError> {
        let mut room = None;
        let mut nodes: Vec<FixedNode> = Vec::new();
        let mut base = None;
        let mut mobile = None;
        let mut waypoints = Vec::new();
        let mut speed = None;
        let mut radio = None;
        let mut interval = None;
        let mut duration = None;
        let mut seed = None;

        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            last_line = n;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let arity = |want: usize| {
                if f.len() == want + 1 {
                    Ok(())
                } else {
                    Err(ParseError::new(n, format!("{} expects {want} argument(s)", f[0])))
                }
            };
            match f[0] {
                "ROOM" => {
                    arity(2)?;
                    let dims: (f64, f64) = (num(n, "width", f[1])?, num(n, "depth", f[2])?);
                    once(&mut room, dims, n, "ROOM")?;
                }
                "NODE" => {
                    arity(3)?;
                    nodes.push(FixedNode {
                        id: id(n, f[1])?,
                        position: Point::new(num(n, "x", f[2])?, num(n, "y", f[3])?),
                    });
                }
                "BASE" => {
                    arity(1)?;
                    once(&mut base, id(n, f[1])?, n, "BASE")?;
                }
                "MOBILE" => {
                    arity(1)?;
                    once(&mut mobile, id(n, f[1])?, n, "MOBILE")?;
                }
                "WAYPOINT" => {
                    arity(2)?;
                    waypoints.push(Point::new(num(n, "x", f[1])?, num(n, "y", f[2])?));
                }
                "SPEED" => {
                    arity(1)?;
                    once(&mut speed, num::<f64>(n, "speed", f[1])?, n, "SPEED")?;
                }
                "RADIO" => {
                    arity(5)?;
                    let r = RadioModel::new(
                        num(n, "a", f[1])?,
                        num(n, "b", f[2])?,
                        num(n, "dmin", f[3])?,
                        num(n, "sigma", f[4])?,
                        num(n, "drop", f[5])?,
                    )
                    .map_err(|e| ParseError::new(n, e.to_string()))?;
                    once(&mut radio, r, n, "RADIO")?;
                }
                "INTERVAL" => {
                    arity(1)?;
                    once(&mut interval, num::<u64>(n, "interval", f[1])?, n, "INTERVAL")?;
                }
                "DURATION" => {
                    arity(1)?;
                    once(&mut duration, num::<u64>(n, "duration", f[1])?, n, "DURATION")?;
                }
                "SEED" => {
                    arity(1)?;
                    once(&mut seed, num::<u64>(n, "seed", f[1])?, n, "SEED")?;
                }
                other => return Err(ParseError::new(n, format!("unknown directive {other:?}"))),
            }
        }

        let eof = last_line.max(1);
        let missing = |d: &str| ParseError::new(eof, format!("missing {d} directive"));
        let (w, d) = room.ok_or_else(|| missing("ROOM"))?;
        if nodes.is_empty() {
            return Err(missing("NODE"));
        }
        let base = base.ok_or_else(|| missing("BASE"))?;
        let mobile = mobile.ok_or_else(|| missing("MOBILE"))?;
        if waypoints.is_empty() {
            return Err(missing("WAYPOINT"));
        }
        let speed = speed.ok_or_else(|| missing("SPEED"))?;
        let duration = duration.ok_or_else(|| missing("DURATION"))?;

        let invalid = |e: super::SimError| ParseError::new(eof, e.to_string());
        let room = RoomModel::new(w, d, nodes, base).map_err(invalid)?;
        let trajectory = Trajectory::new(mobile, waypoints, speed, Timestamp(0)).map_err(invalid)?;
        Scenario::new(
            room,
            trajectory,
            radio.unwrap_or_default(),
            interval.unwrap_or(DEFAULT_BEACON_INTERVAL_MS),
            duration,
            seed.unwrap_or(0),
        )
        .map_err(invalid)
    }

    /// Renders the scenario in the format accepted by [`Scenario::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ROOM {} {}", self.room.width_ft(), self.room.depth_ft());
        for n in self.room.fixed_nodes() {
            let _ = writeln!(out, "NODE {} {} {}", n.id, n.position.x, n.position.y);
        }
        let _ = writeln!(out, "BASE {}", self.room.base_station());
        let _ = writeln!(out, "MOBILE {}", self.mobile());
        for p in self.trajectory.waypoints() {
            let _ = writeln!(out, "WAYPOINT {} {}", p.x, p.y);
        }
        let _ = writeln!(out, "SPEED {}", self.trajectory.speed_ftps());
        let r = &self.radio;
        let _ = writeln!(
            out,
            "RADIO {} {} {} {} {}",
            r.a(),
            r.b(),
            r.d_min_ft(),
            r.noise_sigma(),
            r.drop_prob()
        );
        let _ = writeln!(out, "INTERVAL {}", self.beacon_interval_ms);
        let _ = writeln!(out, "DURATION {}", self.duration_ms);
        let _ = writeln!(out, "SEED {}", self.seed);
        out
    }
}
