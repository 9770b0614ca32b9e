// SPDX-License-Identifier: Apache-2.0

//! Shared test support: a brute-force reference detector and a random
//! scenario generator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use proximity::detector::EvidenceRule;
use proximity::sim::{FixedNode, Point, RadioModel, RoomModel, Scenario, Trajectory};
use proximity::{NodeId, Sighting, StateChange, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

struct Heard {
    observer: NodeId,
    strength: u8,
    at: u64,
    arrival: usize,
    announced: bool,
}

/// Re-derives everything from the full accepted history after every
/// sighting. Shares no code with the library's detector.
pub struct OracleDetector {
    subject: NodeId,
    horizon: u64,
    k: usize,
    rule: EvidenceRule,
    accepted: Vec<Heard>,
    newest: Option<u64>,
    confirmed: Option<NodeId>,
}

impl OracleDetector {
    pub fn new(subject: NodeId, horizon: u64, k: usize, rule: EvidenceRule) -> Self {
        OracleDetector {
            subject,
            horizon,
            k,
            rule,
            accepted: Vec::new(),
            newest: None,
            confirmed: None,
        }
    }

    /// The window rebuilt from scratch: every accepted sighting at or after
    /// the cutoff, grouped by observer, each group in (time, arrival) order.
    fn window(&self) -> BTreeMap<NodeId, Vec<&Heard>> {
        let cutoff = self.newest.map_or(0, |n| n.saturating_sub(self.horizon));
        let mut w: BTreeMap<NodeId, Vec<&Heard>> = BTreeMap::new();
        for h in self.accepted.iter().filter(|h| h.at >= cutoff) {
            w.entry(h.observer.clone()).or_default().push(h);
        }
        for v in w.values_mut() {
            v.sort_by_key(|h| (h.at, h.arrival));
        }
        w
    }

    fn strongest(window: &BTreeMap<NodeId, Vec<&Heard>>) -> Option<NodeId> {
        let mut cands: Vec<(u8, &NodeId)> = window
            .iter()
            .map(|(o, v)| (v.last().unwrap().strength, o))
            .collect();
        // Strongest first, then smallest id.
        cands.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        cands.first().map(|(_, o)| (*o).clone())
    }

    pub fn last_known(&self) -> Option<NodeId> {
        Self::strongest(&self.window())
    }

    fn tail(&self, seq: &[&Heard]) -> (u128, u128) {
        let tail = &seq[seq.len().saturating_sub(self.k)..];
        (tail.iter().map(|h| h.strength as u128).sum(), tail.len() as u128)
    }

    pub fn ingest(&mut self, s: &Sighting) -> Option<StateChange> {
        assert_eq!(s.subject(), &self.subject);
        let at = s.at().0;
        let newest = self.newest.map_or(at, |n| n.max(at));
        if at < newest.saturating_sub(self.horizon) {
            return None;
        }
        let newest_for_pair = self
            .accepted
            .iter()
            .filter(|h| &h.observer == s.observer())
            .all(|h| at >= h.at);
        self.newest = Some(newest);
        let arrival = self.accepted.len();
        self.accepted.push(Heard {
            observer: s.observer().clone(),
            strength: s.strength().value(),
            at,
            arrival,
            announced: false,
        });
        if newest_for_pair && Self::strongest(&self.window()).as_ref() == Some(s.observer()) {
            self.accepted[arrival].announced = true;
        }

        let window = self.window();
        let cand = Self::strongest(&window)?;
        if self.confirmed.as_ref() == Some(&cand) {
            return None;
        }
        let mine = &window[&cand];
        let evidence = match self.rule {
            EvidenceRule::Announcing => mine.iter().filter(|h| h.announced).count(),
            EvidenceRule::AnySighting => mine.len(),
        };
        if evidence < self.k {
            return None;
        }
        let (ms, mn) = self.tail(mine);
        for (o, theirs) in &window {
            if *o == cand {
                continue;
            }
            let (ts, tn) = self.tail(theirs);
            // ms/mn > ts/tn
            if ms * tn <= ts * mn {
                return None;
            }
        }
        let from = self.confirmed.replace(cand.clone());
        Some(StateChange {
            subject: self.subject.clone(),
            from,
            to: cand,
            at: s.at(),
        })
    }
}

pub fn oracle_replay(trace: &[Sighting], horizon: u64, k: usize, rule: EvidenceRule) -> Vec<StateChange> {
    let mut dets: std::collections::BTreeMap<NodeId, OracleDetector> = Default::default();
    let mut out = Vec::new();
    for s in trace {
        let det = dets
            .entry(s.subject().clone())
            .or_insert_with(|| OracleDetector::new(s.subject().clone(), horizon, k, rule));
        out.extend(det.ingest(s));
    }
    out
}

pub struct RandomScenario {
    pub scenario: Scenario,
    pub sigma: f64,
    pub drop: f64,
    pub observers: usize,
}

/// A room with 4 to 8 randomly placed observers and a random closed walk,
/// long enough for well over 1000 sightings.
pub fn random_scenario(seed: u64, sigma: f64, drop: f64) -> RandomScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
    let w = rng.random_range(10.0..40.0);
    let d = rng.random_range(10.0..40.0);
    let n = rng.random_range(4..=8usize);
    let nodes: Vec<FixedNode> = (0..n)
        .map(|i| FixedNode {
            id: id(&format!("f{i:02}")),
            position: Point::new(rng.random_range(0.0..w), rng.random_range(0.0..d)),
        })
        .collect();
    let base = nodes[0].id.clone();
    let room = RoomModel::new(w, d, nodes, base).unwrap();
    let waypoints: Vec<Point> = (0..rng.random_range(2..6))
        .map(|_| Point::new(rng.random_range(0.0..w), rng.random_range(0.0..d)))
        .collect();
    let speed = rng.random_range(0.5..4.0);
    let trajectory = Trajectory::new(id("mob"), waypoints, speed, Timestamp(0)).unwrap();
    let interval = rng.random_range(500..=1000u64);
    // Enough ticks for 1000 sightings even after 10% drops.
    let ticks = 1150usize.div_ceil(n) as u64 + 2;
    let duration = ticks * interval + rng.random_range(0..20_000);
    let radio = RadioModel::default().with_noise(sigma, drop).unwrap();
    RandomScenario {
        scenario: Scenario::new(room, trajectory, radio, interval, duration, seed).unwrap(),
        sigma,
        drop,
        observers: n,
    }
}

/// Number of times `values` changes from one element to the next,
/// starting from `None`.
pub fn transitions<T: PartialEq>(values: impl IntoIterator<Item = Option<T>>) -> usize {
    let mut prev = None;
    let mut n = 0;
    for v in values {
        if v != prev {
            n += 1;
            prev = v;
        }
    }
    n
}

pub mod gateway {
    use std::io::{BufRead, BufReader, Write};
    use std::net::{SocketAddr, TcpStream};
    use std::path::Path;
    use std::sync::Arc;
    use std::thread;

    use proximity::gateway::{handle_session, Server};
    use proximity::{BeaconDirectory, Gateway, NodeId, StateChange, Timestamp};

    pub const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

    pub fn data(name: &str) -> String {
        std::fs::read_to_string(Path::new(DATA).join(name)).unwrap()
    }

    /// Gateway rebuilt from the fixture journal. The journal is copied into
    /// `scratch` so the fixture itself is never appended to.
    pub fn fixture_gateway(scratch: &Path) -> Gateway {
        let journal = scratch.join("gateway.journal");
        std::fs::write(&journal, data("gateway.journal")).unwrap();
        let dir = BeaconDirectory::parse(&data("beacons.txt")).unwrap();
        Gateway::new(dir).with_journal(&journal).unwrap()
    }

    /// Runs the scripted session and returns (expected, actual).
    pub fn golden_transcript(scratch: &Path) -> (String, String) {
        let gw = fixture_gateway(scratch);
        let mut out = Vec::new();
        handle_session(&gw, data("session.in").as_bytes(), &mut out).unwrap();
        (data("session.out"), String::from_utf8(out).unwrap())
    }

    /// Same script over a real socket.
    pub fn golden_transcript_tcp(scratch: &Path) -> (String, String) {
        let gw = Arc::new(fixture_gateway(scratch));
        let server = Server::bind("127.0.0.1:0", gw).unwrap();
        let addr = server.local_addr().unwrap();
        server.spawn();
        let mut stream = TcpStream::connect(addr).unwrap();
        let script = data("session.in");
        stream.write_all(script.as_bytes()).unwrap();
        stream.shutdown(std::net::Shutdown::Write).unwrap();
        let mut actual = String::new();
        let mut reader = BufReader::new(stream);
        let mut line = String::new();
        while reader.read_line(&mut line).unwrap() > 0 {
            actual.push_str(&line);
            line.clear();
        }
        (data("session.out"), actual)
    }

    fn updated_field(reply: &str) -> Option<u64> {
        reply.rsplit_once(" updated=").and_then(|(_, v)| v.parse().ok())
    }

    pub struct Concurrency {
        pub sessions: usize,
        pub lookups: usize,
        pub applies: usize,
        pub violations: Vec<String>,
    }

    /// `writers` threads push changes with increasing timestamps for a few
    /// shared nodes (some stale on purpose) while `sessions` TCP clients
    /// poll STATE. Records every time a session sees `updated` go down.
    pub fn concurrent_sessions(writers: usize, sessions: usize, rounds: usize) -> Concurrency {
        let gw = Arc::new(Gateway::new(BeaconDirectory::default()));
        let nodes: Vec<NodeId> = (0..3).map(|i| NodeId::new(format!("m{i}")).unwrap()).collect();
        let to = NodeId::new("f0").unwrap();
        for n in &nodes {
            gw.apply_change(&StateChange {
                subject: n.clone(),
                from: None,
                to: to.clone(),
                at: Timestamp(0),
            })
            .unwrap();
        }
        let server = Server::bind("127.0.0.1:0", Arc::clone(&gw)).unwrap();
        let addr: SocketAddr = server.local_addr().unwrap();
        server.spawn();

        let mut handles = Vec::new();
        for w in 0..writers {
            let gw = Arc::clone(&gw);
            let nodes = nodes.clone();
            handles.push(thread::spawn(move || {
                let mut applied = 0;
                for r in 0..rounds {
                    for (i, n) in nodes.iter().enumerate() {
                        // Interleaved timestamps across writers; every fourth
                        // one goes backwards.
                        let mut at = (r * writers + w) as u64 * 10 + i as u64;
                        if r % 4 == 3 {
                            at = at.saturating_sub(500);
                        }
                        let loc = NodeId::new(format!("f{}", (r + w) % 4)).unwrap();
                        let change = StateChange {
                            subject: n.clone(),
                            from: None,
                            to: loc,
                            at: Timestamp(at),
                        };
                        if gw.apply_change(&change).is_ok() {
                            applied += 1;
                        }
                    }
                }
                (applied, Vec::new(), 0)
            }));
        }
        for _ in 0..sessions {
            let nodes = nodes.clone();
            handles.push(thread::spawn(move || {
                let stream = TcpStream::connect(addr).unwrap();
                stream.set_nodelay(true).unwrap();
                let mut writer = stream.try_clone().unwrap();
                let mut reader = BufReader::new(stream);
                let mut last = vec![0u64; nodes.len()];
                let mut violations = Vec::new();
                let mut lookups = 0;
                let mut line = String::new();
                for _ in 0..rounds {
                    for (i, n) in nodes.iter().enumerate() {
                        writeln!(writer, "STATE {n}").unwrap();
                        line.clear();
                        reader.read_line(&mut line).unwrap();
                        lookups += 1;
                        let Some(u) = updated_field(line.trim_end()) else {
                            violations.push(format!("unparseable reply {line:?}"));
                            continue;
                        };
                        if u < last[i] {
                            violations.push(format!("{n}: updated {u} after {}", last[i]));
                        }
                        last[i] = u;
                    }
                }
                (0, violations, lookups)
            }));
        }
        let mut result = Concurrency {
            sessions,
            lookups: 0,
            applies: 0,
            violations: Vec::new(),
        };
        for h in handles {
            let (a, v, l) = h.join().unwrap();
            result.applies += a;
            result.lookups += l;
            result.violations.extend(v);
        }
        result
    }
}
