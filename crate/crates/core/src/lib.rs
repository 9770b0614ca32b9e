// SPDX-License-Identifier: Apache-2.0

//! Nearest-beacon proximity detection for wireless sensor networks.
//!
//! A mobile node is located by the fixed node that hears it loudest. Raw
//! signal strength flaps from message to message, so the
//! [`ProximityDetector`] only confirms a new location after it has been the
//! strongest observer for `k` messages and its recent mean beats every
//! competitor. Around the detector sit a [`sim`]ulator that produces sighting
//! traces with exact ground truth, a [`sensor`] pipeline that turns raw ADC
//! readings into labelled context, and a [`gateway`] that keeps per-node
//! state and answers queries over a line protocol.
//!
//! ```
//! use proximity::{DetectorConfig, NodeId, ProximityDetector, SignalStrength, Sighting, Timestamp};
//!
//! let id = |s: &str| NodeId::new(s).unwrap();
//! let mut det = ProximityDetector::new(id("mms05"), DetectorConfig::default());
//! let mut changes = Vec::new();
//! for t in [0, 1000, 2000] {
//!     let s = Sighting::new(id("mms05"), id("fms02"), SignalStrength(180), Timestamp(t)).unwrap();
//!     changes.extend(det.ingest(&s).unwrap());
//! }
//! assert_eq!(changes.len(), 1);
//! assert_eq!(changes[0].at, Timestamp(2000));
//! assert_eq!(det.current_location(), Some(&id("fms02")));
//! ```
//!
//! All time is event time in milliseconds carried on the data; nothing reads
//! a wall clock, so every run over the same input gives the same output.

pub mod cli;
pub mod detector;
pub mod gateway;
pub mod memory;
pub mod model;
pub mod sensor;
pub mod sim;
pub mod textfmt;
pub mod trace;

pub use detector::{replay, DetectorConfig, DetectorError, EvidenceRule, ProximityDetector, StateChange};
pub use gateway::{BeaconDirectory, Gateway, GatewayError, NodeState};
pub use memory::MemoryWindow;
pub use model::{
    format_gua, parse_gua, GlobalUniqueAddress, LocationInfo, LocationRef, ModelError, NodeId, NodeRole,
    Sighting, SignalStrength, Timestamp,
};
pub use sensor::{Calibration, Channel, ContextSnapshot, ContextThresholds, RawReading, SensorConfig};
pub use sim::{Metrics, Scenario};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/addresses.md")]
    mod addresses {}
    #[doc = include_str!("../../../book/src/memory.md")]
    mod memory {}
    #[doc = include_str!("../../../book/src/detector.md")]
    mod detector {}
    #[doc = include_str!("../../../book/src/sensors.md")]
    mod sensors {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/gateway.md")]
    mod gateway {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
