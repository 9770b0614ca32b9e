// SPDX-License-Identifier: Apache-2.0

//! Raw ADC readings to engineering units to context labels.
//!
//! Conversion is affine per channel. The slope is kept as a numerator and
//! denominator so that calibrations such as `100/1023` hit their full-scale
//! value exactly. Classification walks a list of exclusive upper bounds: a
//! value equal to a bound belongs to the next label up.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{NodeId, Timestamp};
use crate::textfmt::{is_token, ParseError};

pub const DEFAULT_MAX_RAW: u16 = 1023;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensorError {
    #[error("raw value {raw} exceeds the {max} maximum")]
    RawOutOfRange { raw: u16, max: u16 },
    #[error("aux channel index {0} outside 1..=5")]
    BadAuxIndex(u8),
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("invalid calibration: {0}")]
    InvalidCalibration(&'static str),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(&'static str),
    #[error("no calibration for channel {0}")]
    MissingCalibration(Channel),
    #[error("no thresholds for channel {0}")]
    MissingThresholds(Channel),
    #[error("no readings to summarize")]
    EmptyInput,
    #[error("readings mix nodes {0} and {1}")]
    MixedNodes(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Temperature,
    Photo,
    Aux(u8),
}

impl Channel {
    pub fn aux(index: u8) -> Result<Channel, SensorError> {
        if (1..=5).contains(&index) {
            Ok(Channel::Aux(index))
        } else {
            Err(SensorError::BadAuxIndex(index))
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Temperature => f.write_str("temperature"),
            Channel::Photo => f.write_str("photo"),
            Channel::Aux(i) => write!(f, "aux{i}"),
        }
    }
}

impl FromStr for Channel {
    type Err = SensorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temperature" => Ok(Channel::Temperature),
            "photo" => Ok(Channel::Photo),
            _ => match s.strip_prefix("aux").and_then(|i| i.parse::<u8>().ok()) {
                Some(i) => Channel::aux(i),
                None => Err(SensorError::UnknownChannel(s.to_string())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawReading {
    node: NodeId,
    channel: Channel,
    raw: u16,
    at: Timestamp,
}

impl RawReading {
    pub fn new(node: NodeId, channel: Channel, raw: u16, at: Timestamp) -> Result<Self, SensorError> {
        Self::with_max_raw(node, channel, raw, at, DEFAULT_MAX_RAW)
    }

    pub fn with_max_raw(
        node: NodeId,
        channel: Channel,
        raw: u16,
        at: Timestamp,
        max_raw: u16,
    ) -> Result<Self, SensorError> {
        if raw > max_raw {
            return Err(SensorError::RawOutOfRange { raw, max: max_raw });
        }
        Ok(RawReading {
            node,
            channel,
            raw,
            at,
        })
    }

    pub fn node(&self) -> &NodeId {
        &self.node
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn raw(&self) -> u16 {
        self.raw
    }

    pub fn at(&self) -> Timestamp {
        self.at
    }
}

/// `value = raw * slope_num / slope_den + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    slope_num: f64,
    slope_den: f64,
    intercept: f64,
    unit: String,
}

impl Calibration {
    pub fn new(slope: f64, intercept: f64, unit: &str) -> Result<Self, SensorError> {
        Self::rational(slope, 1.0, intercept, unit)
    }

    pub fn rational(num: f64, den: f64, intercept: f64, unit: &str) -> Result<Self, SensorError> {
        if !num.is_finite() || !den.is_finite() || den == 0.0 {
            return Err(SensorError::InvalidCalibration("slope must be finite"));
        }
        if !intercept.is_finite() {
            return Err(SensorError::InvalidCalibration("intercept must be finite"));
        }
        if !is_token(unit) {
            return Err(SensorError::InvalidCalibration("unit must be a single token"));
        }
        Ok(Calibration {
            slope_num: num,
            slope_den: den,
            intercept,
            unit: unit.to_string(),
        })
    }

    /// Raw 10-bit photo reading to percent of full scale.
    pub fn photo_percent() -> Self {
        Calibration::rational(100.0, f64::from(DEFAULT_MAX_RAW), 0.0, "%").unwrap()
    }

    pub fn slope(&self) -> f64 {
        self.slope_num / self.slope_den
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn apply(&self, raw: u16) -> f64 {
        f64::from(raw) * self.slope_num / self.slope_den + self.intercept
    }
}

pub fn convert(reading: &RawReading, cal: &Calibration) -> f64 {
    cal.apply(reading.raw)
}

/// Ordered label bands. Each band covers values below its bound; the top
/// label takes everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextThresholds {
    bands: Vec<(String, f64)>,
    top: String,
}

impl ContextThresholds {
    pub fn new(bands: Vec<(String, f64)>, top: &str) -> Result<Self, SensorError> {
        if bands.iter().any(|(_, b)| b.is_nan()) {
            return Err(SensorError::InvalidThresholds("bound is NaN"));
        }
        if bands.windows(2).any(|w| w[0].1 >= w[1].1) {
            return Err(SensorError::InvalidThresholds("bounds must strictly increase"));
        }
        if bands.last().is_some_and(|(_, b)| *b == f64::INFINITY) {
            return Err(SensorError::InvalidThresholds("only the top label is unbounded"));
        }
        if !bands.iter().map(|(l, _)| l.as_str()).chain([top]).all(is_token) {
            return Err(SensorError::InvalidThresholds("labels must be single tokens"));
        }
        Ok(ContextThresholds {
            bands,
            top: top.to_string(),
        })
    }

    /// Cold below 60 F, hot from 78 F.
    pub fn fahrenheit_comfort() -> Self {
        ContextThresholds::new(vec![("cold".into(), 60.0), ("moderate".into(), 78.0)], "hot").unwrap()
    }

    pub fn light_levels() -> Self {
        ContextThresholds::new(vec![("dark".into(), 20.0), ("dim".into(), 60.0)], "bright").unwrap()
    }

    pub fn bands(&self) -> &[(String, f64)] {
        &self.bands
    }

    pub fn top(&self) -> &str {
        &self.top
    }

    pub fn classify(&self, value: f64) -> &str {
        self.bands
            .iter()
            .find(|(_, bound)| *bound > value)
            .map_or(self.top.as_str(), |(label, _)| label.as_str())
    }
}

pub fn classify(value: f64, th: &ContextThresholds) -> &str {
    th.classify(value)
}

/// Calibrations and thresholds for every channel of a deployment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensorConfig {
    pub calibrations: BTreeMap<Channel, Calibration>,
    pub thresholds: BTreeMap<Channel, ContextThresholds>,
}

impl SensorConfig {
    /// Photo in percent with dark/dim/bright bands and temperature
    /// thresholds in Fahrenheit. Temperature has no calibration: the board's
    /// transfer curve is deployment specific.
    pub fn with_photo_defaults() -> Self {
        let mut cfg = SensorConfig::default();
        cfg.calibrations
            .insert(Channel::Photo, Calibration::photo_percent());
        cfg.thresholds
            .insert(Channel::Photo, ContextThresholds::light_levels());
        cfg.thresholds
            .insert(Channel::Temperature, ContextThresholds::fahrenheit_comfort());
        cfg
    }

    /// Parses the line-oriented config format:
    ///
    /// ```text
    /// CAL <channel> <slope> <intercept> <unit>
    /// TH <channel> <label>:<bound> ... <label>:inf
    /// ```
    ///
    /// Slopes may be decimals or `num/den`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cfg = SensorConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ParseError::new(lineno, msg);
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "CAL" => {
                    let [_, channel, slope, intercept, unit] = fields[..] else {
                        return Err(err("CAL expects <channel> <slope> <intercept> <unit>".into()));
                    };
                    let channel: Channel = channel.parse().map_err(|e: SensorError| err(e.to_string()))?;
                    let (num, den) = parse_slope(slope).ok_or_else(|| err(format!("bad slope {slope:?}")))?;
                    let intercept: f64 = intercept
                        .parse()
                        .map_err(|_| err(format!("bad intercept {intercept:?}")))?;
                    let cal =
                        Calibration::rational(num, den, intercept, unit).map_err(|e| err(e.to_string()))?;
                    cfg.calibrations.insert(channel, cal);
                }
                "TH" => {
                    if fields.len() < 3 {
                        return Err(err("TH expects <channel> followed by label:bound pairs".into()));
                    }
                    let channel: Channel = fields[1].parse().map_err(|e: SensorError| err(e.to_string()))?;
                    let mut bands = Vec::new();
                    let mut top = None;
                    for (i, pair) in fields[2..].iter().enumerate() {
                        let (label, bound) = pair
                            .split_once(':')
                            .ok_or_else(|| err(format!("expected label:bound, got {pair:?}")))?;
                        let last = i == fields.len() - 3;
                        if bound == "inf" {
                            if !last {
                                return Err(err("only the final label may be unbounded".into()));
                            }
                            top = Some(label);
                        } else {
                            if last {
                                return Err(err("final label must have bound inf".into()));
                            }
                            let v: f64 = bound
                                .parse()
                                .ok()
                                .filter(|v: &f64| v.is_finite())
                                .ok_or_else(|| err(format!("bad bound {bound:?}")))?;
                            bands.push((label.to_string(), v));
                        }
                    }
                    let th = ContextThresholds::new(bands, top.unwrap_or_default())
                        .map_err(|e| err(e.to_string()))?;
                    cfg.thresholds.insert(channel, th);
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        Ok(cfg)
    }
}

fn parse_slope(s: &str) -> Option<(f64, f64)> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.parse().ok()?, d.parse().ok()?),
        None => (s.parse().ok()?, 1.0),
    };
    (f64::is_finite(num) && f64::is_finite(den) && den != 0.0).then_some((num, den))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextValue {
    pub value: f64,
    pub label: String,
}

/// Latest converted and labelled value per channel for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextSnapshot {
    pub node: NodeId,
    pub at: Timestamp,
    pub values: BTreeMap<Channel, ContextValue>,
}

/// Converts and labels the latest reading on each channel. Among readings
/// with equal timestamps the later one in `readings` wins.
pub fn snapshot(readings: &[RawReading], cfg: &SensorConfig) -> Result<ContextSnapshot, SensorError> {
    let first = readings.first().ok_or(SensorError::EmptyInput)?;
    let mut latest: BTreeMap<Channel, &RawReading> = BTreeMap::new();
    let mut at = first.at;
    for r in readings {
        if r.node != first.node {
            return Err(SensorError::MixedNodes(first.node.clone(), r.node.clone()));
        }
        at = at.max(r.at);
        let slot = latest.entry(r.channel).or_insert(r);
        if r.at >= slot.at {
            *slot = r;
        }
    }

    let mut values = BTreeMap::new();
    for (channel, reading) in latest {
        let cal = cfg
            .calibrations
            .get(&channel)
            .ok_or(SensorError::MissingCalibration(channel))?;
        let th = cfg
            .thresholds
            .get(&channel)
            .ok_or(SensorError::MissingThresholds(channel))?;
        let value = convert(reading, cal);
        values.insert(
            channel,
            ContextValue {
                value,
                label: th.classify(value).to_string(),
            },
        );
    }
    Ok(ContextSnapshot {
        node: first.node.clone(),
        at,
        values,
    })
}
