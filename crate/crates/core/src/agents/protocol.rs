//! Newline-delimited JSON messages exchanged with external agents.
//!
//! Every line is an envelope `{"type", "period", "payload"}`. The harness
//! sends `hello`, one `observe` per decision and a closing `end`; the agent
//! answers `hello` with `ready` and each `observe` with `act`.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::AgentError;
use crate::memory::MemoryEntry;
use crate::model::{EnvId, Framing, Observation};
use crate::money::Money;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hello {
    pub protocol_version: u32,
    pub env_id: EnvId,
    pub role_id: String,
    pub horizon: u32,
    pub framing: Framing,
    pub cognitive_reflection: bool,
    pub info_sharing: bool,
    pub memory_window: usize,
}

/// Handshake reply. An empty payload means version 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ready {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_version: Option<u32>,
    /// Free-form agent description, recorded but not interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observe {
    pub observation: Observation,
    pub memory: Vec<MemoryEntry>,
    /// Plain-text rendering of the observation and memory.
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Act {
    pub orders: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct End {
    pub totals: BTreeMap<String, Money>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello(Hello),
    Ready(Ready),
    Observe { period: u32, body: Box<Observe> },
    Act { period: u32, body: Act },
    End { period: u32, body: End },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    period: u32,
    #[serde(default)]
    payload: Value,
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello(_) => "hello",
            Message::Ready(_) => "ready",
            Message::Observe { .. } => "observe",
            Message::Act { .. } => "act",
            Message::End { .. } => "end",
        }
    }

    pub fn period(&self) -> u32 {
        match self {
            Message::Hello(_) | Message::Ready(_) => 0,
            Message::Observe { period, .. } | Message::Act { period, .. } | Message::End { period, .. } => {
                *period
            }
        }
    }

    /// One JSON line, without the trailing newline.
    pub fn encode(&self) -> String {
        let payload = match self {
            Message::Hello(m) => serde_json::to_value(m),
            Message::Ready(m) => serde_json::to_value(m),
            Message::Observe { body, .. } => serde_json::to_value(body),
            Message::Act { body, .. } => serde_json::to_value(body),
            Message::End { body, .. } => serde_json::to_value(body),
        }
        .expect("protocol payloads serialize");
        let env = Envelope { kind: self.kind().to_string(), period: self.period(), payload };
        serde_json::to_string(&env).expect("envelope serializes")
    }

    /// Parses one line. Syntax errors are [`AgentError::MalformedJson`];
    /// well-formed JSON of the wrong shape is [`AgentError::SchemaViolation`].
    pub fn decode(line: &str) -> Result<Message, AgentError> {
        let value: Value =
            serde_json::from_str(line.trim_end()).map_err(|e| AgentError::MalformedJson(e.to_string()))?;
        let env: Envelope = from_value(value, "envelope")?;
        let period = env.period;
        Ok(match env.kind.as_str() {
            "hello" => Message::Hello(from_value(env.payload, "hello")?),
            "ready" => {
                let payload = if env.payload.is_null() { Value::Object(Default::default()) } else { env.payload };
                Message::Ready(from_value(payload, "ready")?)
            }
            "observe" => Message::Observe { period, body: Box::new(from_value(env.payload, "observe")?) },
            "act" => Message::Act { period, body: from_value(env.payload, "act")? },
            "end" => Message::End { period, body: from_value(env.payload, "end")? },
            other => return Err(AgentError::SchemaViolation(format!("unknown message type `{other}`"))),
        })
    }
}

fn from_value<T: DeserializeOwned>(value: Value, what: &str) -> Result<T, AgentError> {
    serde_json::from_value(value).map_err(|e| AgentError::SchemaViolation(format!("{what}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvParams;
    use crate::model::Action;

    fn observe_message() -> Message {
        let env = EnvParams::default_for(EnvId::Bg).build(10, 3).unwrap();
        let observation = env.observe(1, true);
        let memory = vec![MemoryEntry { observation: observation.clone(), action: Action::single("order", 4) }];
        Message::Observe { period: 1, body: Box::new(Observe { observation, memory, context: "ctx".into() }) }
    }

    fn samples() -> Vec<Message> {
        vec![
            Message::Hello(Hello {
                protocol_version: 1,
                env_id: EnvId::Nvp,
                role_id: "newsvendor".into(),
                horizon: 20,
                framing: Framing::Negative,
                cognitive_reflection: true,
                info_sharing: false,
                memory_window: 5,
            }),
            Message::Ready(Ready::default()),
            Message::Ready(Ready { protocol_version: Some(1), agent: Some("stub".into()) }),
            observe_message(),
            Message::Act { period: 3, body: Act { orders: BTreeMap::from([("order".into(), 42)]) } },
            Message::End {
                period: 20,
                body: End { totals: BTreeMap::from([("newsvendor".into(), Money::from_raw(-12_345))]) },
            },
        ]
    }

    #[test]
    fn round_trip_every_type() {
        for m in samples() {
            let line = m.encode();
            assert!(!line.contains('\n'));
            assert_eq!(Message::decode(&line).unwrap(), m, "{line}");
        }
    }

    #[test]
    fn empty_ready_is_accepted() {
        assert_eq!(Message::decode(r#"{"type":"ready"}"#).unwrap(), Message::Ready(Ready::default()));
        assert_eq!(
            Message::decode(r#"{"type":"ready","payload":{}}"#).unwrap(),
            Message::Ready(Ready::default())
        );
    }

    #[test]
    fn error_classes() {
        let code = |s: &str| Message::decode(s).unwrap_err().code();
        assert_eq!(code("{not json"), "malformed_json");
        assert_eq!(code(""), "malformed_json");
        assert_eq!(code("[1,2]"), "schema_violation");
        assert_eq!(code(r#"{"type":"act","period":1,"payload":{}}"#), "schema_violation");
        assert_eq!(code(r#"{"type":"act","period":1,"payload":{"orders":{"order":1.5}}}"#), "schema_violation");
        assert_eq!(code(r#"{"type":"act","period":1,"payload":{"orders":{"order":"3"}}}"#), "schema_violation");
        assert_eq!(code(r#"{"type":"dance","period":1}"#), "schema_violation");
        assert_eq!(code(r#"{"type":"act","period":1,"payload":{"orders":{}},"extra":1}"#), "schema_violation");
    }

    #[test]
    fn negative_orders_parse() {
        // rejected later against the channel list, never clamped here
        let m = Message::decode(r#"{"type":"act","period":2,"payload":{"orders":{"order":-1}}}"#).unwrap();
        assert_eq!(m, Message::Act { period: 2, body: Act { orders: BTreeMap::from([("order".into(), -1)]) } });
    }
}
