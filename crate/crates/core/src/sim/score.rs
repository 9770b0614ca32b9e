// SPDX-License-Identifier: Apache-2.0

//! Detection metrics against ground truth.
//!
//! The subject's first confirmation (from no location to some location) is
//! not a change and is left out, as are truth crossings at or before it.
//! Each remaining change is matched to the latest earlier unmatched
//! crossing into the same node. A match is correct when the truth still
//! names that node at the moment of confirmation.

use std::fmt;

use thiserror::Error;

use crate::detector::StateChange;
use crate::textfmt::Trimmed;

use super::GroundTruth;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("truth has no crossings but the detector reported {0} change(s)")]
    NoCrossings(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Correctly detected crossings over all scored crossings.
    pub accuracy: f64,
    pub mean_latency_ms: f64,
    /// Path length walked between a crossing and its detection, maximised
    /// over matches.
    pub max_distance_ft: f64,
    pub crossings: usize,
    pub matched: usize,
    pub correct: usize,
}

impl Metrics {
    /// `accuracy=<r> mean_latency_ms=<n> max_distance_ft=<r>`
    pub fn report(&self) -> String {
        self.fields().join(" ")
    }

    /// Same fields, tab separated.
    pub fn machine_report(&self) -> String {
        self.fields().join("\t")
    }

    fn fields(&self) -> [String; 3] {
        let acc = Trimmed(self.accuracy, 4).to_string();
        let acc = if acc.contains('.') {
            acc
        } else {
            format!("{acc}.0")
        };
        [
            format!("accuracy={acc}"),
            format!("mean_latency_ms={}", self.mean_latency_ms.round() as i64),
            format!("max_distance_ft={}", Trimmed(self.max_distance_ft, 3)),
        ]
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.report())
    }
}

pub fn score(truth: &GroundTruth, changes: &[StateChange]) -> Result<Metrics, ScoreError> {
    let mut changes: Vec<&StateChange> = changes.iter().filter(|c| &c.subject == truth.subject()).collect();
    changes.sort_by_key(|c| c.at);

    let initial_at = changes.iter().find(|c| c.from.is_none()).map(|c| c.at);
    let moves: Vec<&StateChange> = changes.into_iter().filter(|c| c.from.is_some()).collect();
    let crossings: Vec<_> = truth
        .crossings()
        .iter()
        .filter(|x| initial_at.is_none_or(|t0| x.at > t0))
        .collect();

    if crossings.is_empty() {
        if !moves.is_empty() {
            return Err(ScoreError::NoCrossings(moves.len()));
        }
        return Ok(Metrics {
            accuracy: 1.0,
            mean_latency_ms: 0.0,
            max_distance_ft: 0.0,
            crossings: 0,
            matched: 0,
            correct: 0,
        });
    }

    let mut used = vec![false; crossings.len()];
    let mut latencies = Vec::new();
    let mut correct = 0;
    for change in &moves {
        let pick = crossings
            .iter()
            .enumerate()
            .rev()
            .find(|(i, x)| !used[*i] && x.at <= change.at && x.to == change.to);
        let Some((i, x)) = pick else { continue };
        used[i] = true;
        latencies.push(change.at.0 - x.at.0);
        if truth.nearest_at(change.at) == Some(&change.to) {
            correct += 1;
        }
    }

    let matched = latencies.len();
    let mean_latency_ms = if matched == 0 {
        0.0
    } else {
        latencies.iter().sum::<u64>() as f64 / matched as f64
    };
    let max_latency = latencies.iter().copied().max().unwrap_or(0);
    Ok(Metrics {
        accuracy: correct as f64 / crossings.len() as f64,
        mean_latency_ms,
        // Constant walking speed: path length is speed times elapsed time.
        max_distance_ft: truth.speed_ftps() * max_latency as f64 / 1000.0,
        crossings: crossings.len(),
        matched,
        correct,
    })
}
