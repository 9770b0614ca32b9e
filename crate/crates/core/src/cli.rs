// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. `main` only parses arguments and maps
//! [`CliError`] to an exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::detector::{replay, DetectorConfig, EvidenceRule, DEFAULT_K};
use crate::gateway::{
    query, BeaconDirectory, Gateway, JournalRecord, JournalWriter, Server, DEFAULT_OFFLINE_AFTER_MS,
};
use crate::memory::DEFAULT_HORIZON_MS;
use crate::model::NodeId;
use crate::sim::{self, score, Scenario, ScoreError};
use crate::trace::{format_changes, parse_changes, TraceFile};

#[derive(Debug, Parser)]
#[command(name = "proximity", version, about = "Beacon proximity detection toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a sighting trace with ground truth from a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's INTERVAL, in ms.
        #[arg(long)]
        interval: Option<u64>,
    },
    /// Run the detector over a trace and write its state changes.
    Detect {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_HORIZON_MS)]
        horizon: u64,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Evidence::Announcing)]
        evidence: Evidence,
        /// Required when the trace tracks more than one subject.
        #[arg(long)]
        subject: Option<NodeId>,
        /// Also append each change to a gateway journal.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
    /// Compare a change log with the trace's ground truth.
    Score {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        changes: PathBuf,
        #[arg(long, value_enum, default_value_t = Report::Text)]
        report: Report,
    },
    /// Answer gateway queries over TCP until killed.
    Serve {
        #[arg(long)]
        bind: String,
        #[arg(long)]
        directory: PathBuf,
        #[arg(long)]
        journal: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_OFFLINE_AFTER_MS)]
        offline_after: u64,
    },
    /// Send one request line to a gateway and print the response.
    Query {
        #[arg(long)]
        address: String,
        #[arg(long)]
        request: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Evidence {
    Announcing,
    Any,
}

impl From<Evidence> for EvidenceRule {
    fn from(e: Evidence) -> Self {
        match e {
            Evidence::Announcing => EvidenceRule::Announcing,
            Evidence::Any => EvidenceRule::AnySighting,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Text,
    Machine,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Semantic(_) => 3,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

/// Runs one command, writing reports to `stdout`.
pub fn run(cmd: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out = |stdout: &mut dyn Write, line: String| {
        writeln!(stdout, "{line}").map_err(|e| CliError::Io(format!("stdout: {e}")))
    };
    match cmd {
        Command::Simulate {
            scenario,
            out: out_path,
            seed,
            interval,
        } => {
            let mut sc = Scenario::parse(&read(&scenario)?).map_err(|e| parse_err(&scenario, e))?;
            if let Some(seed) = seed {
                sc.seed = seed;
            }
            if let Some(ms) = interval {
                if ms == 0 {
                    return Err(CliError::Parse("--interval must be positive".into()));
                }
                sc.beacon_interval_ms = ms;
            }
            let result = sim::run(&sc);
            let n = result.trace.len();
            let file = TraceFile {
                sightings: result.trace,
                truth: Some(result.truth),
            };
            write(&out_path, &file.to_text())?;
            out(stdout, format!("sightings={n}"))
        }
        Command::Detect {
            trace,
            out: out_path,
            horizon,
            k,
            evidence,
            subject,
            journal,
        } => {
            let config = DetectorConfig::new(horizon, k)
                .map_err(|e| CliError::Parse(e.to_string()))?
                .with_evidence(evidence.into());
            let file = TraceFile::parse(&read(&trace)?).map_err(|e| parse_err(&trace, e))?;
            let subjects: std::collections::BTreeSet<&NodeId> =
                file.sightings.iter().map(|s| s.subject()).collect();
            let subject = match subject {
                Some(s) => s,
                None if subjects.len() <= 1 => match subjects.first() {
                    Some(s) => (*s).clone(),
                    None => {
                        write(&out_path, "")?;
                        return Ok(());
                    }
                },
                None => {
                    return Err(CliError::Semantic(format!(
                        "trace tracks {} subjects; choose one with --subject",
                        subjects.len()
                    )))
                }
            };
            let changes = replay(file.sightings.iter().filter(|s| s.subject() == &subject), config);
            write(&out_path, &format_changes(&changes))?;
            if let Some(path) = journal {
                let mut j = JournalWriter::open(&path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                for c in &changes {
                    j.append(&JournalRecord::Change(c.clone()))
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                }
            }
            for c in &changes {
                out(stdout, format!("{} {} at {}", c.at, c.subject, c.to))?;
            }
            Ok(())
        }
        Command::Score {
            trace,
            changes,
            report,
        } => {
            let file = TraceFile::parse(&read(&trace)?).map_err(|e| parse_err(&trace, e))?;
            let truth = file
                .truth
                .ok_or_else(|| parse_err(&trace, "no ground truth (M header) in trace"))?;
            let log = parse_changes(&read(&changes)?, truth.subject()).map_err(|e| parse_err(&changes, e))?;
            let m = score(&truth, &log).map_err(|e: ScoreError| CliError::Semantic(e.to_string()))?;
            out(
                stdout,
                match report {
                    Report::Text => m.report(),
                    Report::Machine => m.machine_report(),
                },
            )
        }
        Command::Serve {
            bind,
            directory,
            journal,
            offline_after,
        } => {
            let dir = BeaconDirectory::parse(&read(&directory)?).map_err(|e| parse_err(&directory, e))?;
            let mut gw = Gateway::new(dir).with_offline_after(offline_after);
            if let Some(path) = journal {
                gw = gw.with_journal(&path).map_err(|e| match e {
                    crate::gateway::GatewayError::JournalParse(p) => parse_err(&path, p),
                    other => CliError::Io(format!("{}: {other}", path.display())),
                })?;
            }
            let server = Server::bind(bind.as_str(), Arc::new(gw))
                .map_err(|e| CliError::Io(format!("{bind}: {e}")))?;
            let addr = server.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
            eprintln!("listening on {addr}");
            server.run().map_err(|e| CliError::Io(e.to_string()))
        }
        Command::Query { address, request } => {
            let reply =
                query(address.as_str(), &request).map_err(|e| CliError::Io(format!("{address}: {e}")))?;
            out(stdout, reply)
        }
    }
}
