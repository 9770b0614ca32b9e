// SPDX-License-Identifier: Apache-2.0

//! Domain types shared by every stage of the pipeline.
//!
//! All constructors validate their inputs, so a value of any type in this
//! module is always well formed.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Maximum length of a node id or address component.
pub const MAX_TOKEN_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid node id {0:?}: expected 1-64 characters from [A-Za-z0-9_-]")]
    InvalidNodeId(String),
    #[error("sighting subject and observer are both {0}")]
    SelfSighting(NodeId),
    #[error("malformed address {text:?}: {reason}")]
    MalformedAddress { text: String, reason: &'static str },
    #[error("unknown node role {0:?}")]
    UnknownRole(String),
}

fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= MAX_TOKEN_LEN
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Identity of a mote, beacon or client.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if is_token(&id) {
            Ok(NodeId(id))
        } else {
            Err(ModelError::InvalidNodeId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NodeId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    BaseStation,
    FixedMote,
    MobileMote,
    WearableClient,
}

impl NodeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::BaseStation => "base-station",
            NodeRole::FixedMote => "fixed-mote",
            NodeRole::MobileMote => "mobile-mote",
            NodeRole::WearableClient => "wearable-client",
        }
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeRole {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base-station" => Ok(NodeRole::BaseStation),
            "fixed-mote" => Ok(NodeRole::FixedMote),
            "mobile-mote" => Ok(NodeRole::MobileMote),
            "wearable-client" => Ok(NodeRole::WearableClient),
            other => Err(ModelError::UnknownRole(other.to_string())),
        }
    }
}

/// Event time in milliseconds since the scenario epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn millis(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, ms: u64) -> Timestamp {
        Timestamp(self.0.saturating_sub(ms))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Raw received signal strength. Larger is stronger, and stronger is nearer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignalStrength(pub u8);

impl SignalStrength {
    pub fn value(self) -> u8 {
        self.0
    }

    /// Clamps an arbitrary reading into the raw `0..=255` range.
    pub fn saturating_from(v: i64) -> Self {
        SignalStrength(v.clamp(0, 255) as u8)
    }
}

/// One reception event: `observer` measured `subject` at `strength`.
///
/// Both radio directions (a fixed mote hearing the mobile, or the mobile
/// hearing a beacon) are stored with the mobile as `subject`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sighting {
    subject: NodeId,
    observer: NodeId,
    strength: SignalStrength,
    at: Timestamp,
}

impl Sighting {
    pub fn new(
        subject: NodeId,
        observer: NodeId,
        strength: SignalStrength,
        at: Timestamp,
    ) -> Result<Self, ModelError> {
        if subject == observer {
            return Err(ModelError::SelfSighting(subject));
        }
        Ok(Sighting {
            subject,
            observer,
            strength,
            at,
        })
    }

    pub fn subject(&self) -> &NodeId {
        &self.subject
    }

    pub fn observer(&self) -> &NodeId {
        &self.observer
    }

    pub fn strength(&self) -> SignalStrength {
        self.strength
    }

    pub fn at(&self) -> Timestamp {
        self.at
    }
}

/// What a client gets back when it asks about a beacon it heard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocationInfo {
    Url(String),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocationRef {
    pub beacon: NodeId,
    pub description: String,
    pub info: Option<LocationInfo>,
}

/// Hierarchical address `country.state.city.network.building.local_id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalUniqueAddress {
    country: String,
    state: String,
    city: String,
    network: String,
    building: String,
    local_id: NodeId,
}

impl GlobalUniqueAddress {
    pub fn new(
        country: &str,
        state: &str,
        city: &str,
        network: &str,
        building: &str,
        local_id: NodeId,
    ) -> Result<Self, ModelError> {
        for part in [country, state, city, network, building] {
            if !is_token(part) {
                return Err(ModelError::MalformedAddress {
                    text: part.to_string(),
                    reason: "component is not a valid token",
                });
            }
        }
        Ok(GlobalUniqueAddress {
            country: country.to_string(),
            state: state.to_string(),
            city: city.to_string(),
            network: network.to_string(),
            building: building.to_string(),
            local_id,
        })
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn state(&self) -> &str {
        &self.state
    }

    pub fn city(&self) -> &str {
        &self.city
    }

    pub fn network(&self) -> &str {
        &self.network
    }

    pub fn building(&self) -> &str {
        &self.building
    }

    pub fn local_id(&self) -> &NodeId {
        &self.local_id
    }
}

/// Splits a dotted address into its six components.
pub fn parse_gua(text: &str) -> Result<GlobalUniqueAddress, ModelError> {
    let malformed = |reason| ModelError::MalformedAddress {
        text: text.to_string(),
        reason,
    };
    let parts: Vec<&str> = text.split('.').collect();
    if parts.len() != 6 {
        return Err(malformed("expected exactly six dot-separated components"));
    }
    if parts.iter().any(|p| p.is_empty()) {
        return Err(malformed("empty component"));
    }
    if !parts.iter().all(|p| is_token(p)) {
        return Err(malformed("illegal character in component"));
    }
    let local_id = NodeId::new(parts[5]).map_err(|_| malformed("illegal local id"))?;
    GlobalUniqueAddress::new(parts[0], parts[1], parts[2], parts[3], parts[4], local_id)
}

pub fn format_gua(addr: &GlobalUniqueAddress) -> String {
    addr.to_string()
}

impl fmt::Display for GlobalUniqueAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{}.{}.{}.{}.{}",
            self.country, self.state, self.city, self.network, self.building, self.local_id
        )
    }
}

impl FromStr for GlobalUniqueAddress {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_gua(s)
    }
}
