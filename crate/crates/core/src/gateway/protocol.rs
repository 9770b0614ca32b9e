// SPDX-License-Identifier: Apache-2.0

//! One-line request/response protocol.
//!
//! ```text
//! STATE <id>    -> OK node=<id> role=<role> loc=<id|-> online=<0|1> updated=<ts_ms>
//! BEACON <id>   -> OK desc="<text>" [info=url:<url> | info=text:"<text>"]
//! SENSORS <id>  -> OK <channel>=<value>:<label> ...
//! ```
//!
//! Failures are `ERR NOT_FOUND` and `ERR BAD_REQUEST`. A request is a verb,
//! one space and a node id, nothing else.

use std::fmt::Write as _;

use crate::model::{LocationInfo, NodeId};
use crate::textfmt::quote;

use super::{Gateway, GatewayError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    State(NodeId),
    Beacon(NodeId),
    Sensors(NodeId),
}

pub const NOT_FOUND: &str = "ERR NOT_FOUND";
pub const BAD_REQUEST: &str = "ERR BAD_REQUEST";

/// Parses one request line. The line terminator is expected to be removed
/// already; a lone trailing `\r` is tolerated for terminal clients.
pub fn parse_request(line: &str) -> Option<Request> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let (verb, arg) = line.split_once(' ')?;
    let id = NodeId::new(arg).ok()?;
    match verb {
        "STATE" => Some(Request::State(id)),
        "BEACON" => Some(Request::Beacon(id)),
        "SENSORS" => Some(Request::Sensors(id)),
        _ => None,
    }
}

/// Answers one request line against `gw`. Never fails: every problem is
/// reported in-band.
pub fn respond(gw: &Gateway, line: &str) -> String {
    let Some(req) = parse_request(line) else {
        return BAD_REQUEST.to_string();
    };
    match answer(gw, &req) {
        Ok(s) => s,
        Err(GatewayError::NotFound(_)) => NOT_FOUND.to_string(),
        // Lookups raise nothing else.
        Err(_) => BAD_REQUEST.to_string(),
    }
}

fn answer(gw: &Gateway, req: &Request) -> Result<String, GatewayError> {
    let mut out = String::from("OK");
    match req {
        Request::State(id) => {
            let s = gw.lookup_state_now(id)?;
            let loc = s.confirmed_location.as_ref().map_or("-", NodeId::as_str);
            let _ = write!(
                out,
                " node={} role={} loc={} online={} updated={}",
                s.node,
                s.role,
                loc,
                u8::from(s.online),
                s.updated_at
            );
        }
        Request::Beacon(id) => {
            let loc = gw.lookup_beacon(id)?;
            let _ = write!(out, " desc={}", quote(&loc.description));
            match &loc.info {
                Some(LocationInfo::Url(u)) => {
                    let _ = write!(out, " info=url:{u}");
                }
                Some(LocationInfo::Text(t)) => {
                    let _ = write!(out, " info=text:{}", quote(t));
                }
                None => {}
            }
        }
        Request::Sensors(id) => {
            let s = gw.lookup_state_now(id)?;
            for (ch, v) in s.sensors.iter().flat_map(|snap| &snap.values) {
                let _ = write!(out, " {ch}={:.2}:{}", v.value, v.label);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_grammar() {
        let id = NodeId::new("mms05").unwrap();
        assert_eq!(parse_request("STATE mms05"), Some(Request::State(id.clone())));
        assert_eq!(parse_request("BEACON mms05\r"), Some(Request::Beacon(id.clone())));
        assert_eq!(parse_request("SENSORS mms05"), Some(Request::Sensors(id)));
        for bad in [
            "",
            "STATE",
            "STATE ",
            "state mms05",
            "STATE  mms05",
            "STATE mms05 x",
            "STATE a.b",
            "PING x",
        ] {
            assert_eq!(parse_request(bad), None, "{bad:?}");
        }
    }
}
