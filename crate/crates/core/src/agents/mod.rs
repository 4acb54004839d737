//! Decision makers: scripted baseline policies and out-of-process agents
//! speaking the line-delimited JSON protocol.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::memory::MemoryWindow;
use crate::model::{Action, ActionError, EnvId, Framing, Observation};
use crate::money::Money;

pub mod context;
pub mod external;
pub mod protocol;
pub mod scripted;
pub mod transport;

pub use external::ExternalAgent;
pub use scripted::ScriptedAgent;

/// Default per-decision timeout for external agents.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

/// Failure of an agent to produce a valid decision. Each variant has a
/// stable [`code`](AgentError::code).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("no reply within {0:?}")]
    Timeout(Duration),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("agent closed the stream")]
    StreamClosed,
    #[error("protocol version mismatch: expected {expected}, agent speaks {got}")]
    VersionMismatch { expected: u32, got: u32 },
    #[error("expected `{expected}` message, got `{got}`")]
    UnexpectedMessage { expected: &'static str, got: String },
    #[error("reply for period {got}, expected {expected}")]
    PeriodMismatch { expected: u32, got: u32 },
    #[error("invalid action: {0}")]
    InvalidAction(#[from] ActionError),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("{0}")]
    Unsupported(String),
}

impl AgentError {
    pub fn code(&self) -> &'static str {
        match self {
            AgentError::Timeout(_) => "timeout",
            AgentError::MalformedJson(_) => "malformed_json",
            AgentError::SchemaViolation(_) => "schema_violation",
            AgentError::StreamClosed => "stream_closed",
            AgentError::VersionMismatch { .. } => "version_mismatch",
            AgentError::UnexpectedMessage { .. } => "unexpected_message",
            AgentError::PeriodMismatch { .. } => "period_mismatch",
            AgentError::InvalidAction(_) => "invalid_action",
            AgentError::Transport(_) => "transport",
            AgentError::Unsupported(_) => "unsupported",
        }
    }
}

/// What an agent is told before period 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionInfo {
    pub env: EnvId,
    pub role: String,
    pub horizon: u32,
    pub framing: Framing,
    pub cognitive_reflection: bool,
    pub info_sharing: bool,
    pub memory_window: usize,
}

pub trait Agent: Send {
    fn start(&mut self, _session: &SessionInfo) -> Result<(), AgentError> {
        Ok(())
    }

    fn decide(&mut self, obs: &Observation, memory: &MemoryWindow) -> Result<Action, AgentError>;

    /// Called once after the last period with every role's total cost.
    fn finish(&mut self, _totals: &BTreeMap<String, Money>) -> Result<(), AgentError> {
        Ok(())
    }
}

/// How to reach an out-of-process agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transport", rename_all = "snake_case", deny_unknown_fields)]
pub enum Endpoint {
    /// Child process speaking the protocol over stdin/stdout.
    Command {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
    /// Each message is POSTed; the response body carries the reply.
    Http { url: String },
}

/// Agent roster entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentSpec {
    /// Orders the critical-fractile quantity every round (newsvendor only).
    OptimalNvp,
    /// Replays precomputed ex-post optimal orders. Left empty in a config,
    /// the harness fills them from the oracle.
    ExpostReplay {
        #[serde(default)]
        orders: Vec<i64>,
    },
    /// Orders up to a fixed inventory position `level`.
    BaseStock { level: i64 },
    /// Orders up to `cover` periods of the last observed demand.
    OrderUpTo {
        #[serde(default)]
        cover: Option<u32>,
    },
    /// Anchors on mean demand, adjusting a fraction `1 - alpha` toward the optimum.
    MeanAnchored { alpha: f64 },
    /// Orders the previous period's demand.
    DemandChaser,
    Constant { quantity: i64 },
    /// Independent uniform orders on `low..=high`.
    Random { low: i64, high: i64 },
    External {
        endpoint: Endpoint,
        #[serde(default)]
        timeout_secs: Option<f64>,
    },
}

impl AgentSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AgentSpec::OptimalNvp => "optimal_nvp",
            AgentSpec::ExpostReplay { .. } => "expost_replay",
            AgentSpec::BaseStock { .. } => "base_stock",
            AgentSpec::OrderUpTo { .. } => "order_up_to",
            AgentSpec::MeanAnchored { .. } => "mean_anchored",
            AgentSpec::DemandChaser => "demand_chaser",
            AgentSpec::Constant { .. } => "constant",
            AgentSpec::Random { .. } => "random",
            AgentSpec::External { .. } => "external",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            AgentSpec::MeanAnchored { alpha } if !(0.0..=1.5).contains(alpha) => {
                Err(format!("mean_anchored alpha must lie in [0, 1.5], got {alpha}"))
            }
            AgentSpec::BaseStock { level } if *level < 0 => {
                Err(format!("base_stock level must be >= 0, got {level}"))
            }
            AgentSpec::OrderUpTo { cover: Some(0) } => Err("order_up_to cover must be >= 1".into()),
            AgentSpec::Constant { quantity } if *quantity < 0 => {
                Err(format!("constant quantity must be >= 0, got {quantity}"))
            }
            AgentSpec::Random { low, high } if *low < 0 || low > high => {
                Err(format!("random range must satisfy 0 <= low <= high, got {low}..={high}"))
            }
            AgentSpec::ExpostReplay { orders } if orders.iter().any(|q| *q < 0) => {
                Err("expost_replay orders must be >= 0".into())
            }
            AgentSpec::External { timeout_secs: Some(t), .. } if !(t.is_finite() && *t > 0.0) => {
                Err(format!("timeout_secs must be positive, got {t}"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, AgentSpec::External { .. })
    }

    /// Instantiates the agent. `seed` feeds agents with their own randomness.
    pub fn build(&self, role: &str, seed: u64) -> Result<Box<dyn Agent>, AgentError> {
        self.validate().map_err(AgentError::Unsupported)?;
        match self {
            AgentSpec::External { endpoint, timeout_secs } => {
                let timeout = timeout_secs.map(Duration::from_secs_f64).unwrap_or(DEFAULT_TIMEOUT);
                Ok(Box::new(ExternalAgent::connect(endpoint, timeout)?))
            }
            other => Ok(Box::new(ScriptedAgent::new(other.clone(), role, seed)?)),
        }
    }
}
