//! Out-of-process agent driven over a [`Transport`].

use std::collections::BTreeMap;
use std::time::Duration;

use super::context::render_context;
use super::protocol::{Act, End, Hello, Message, Observe, PROTOCOL_VERSION};
use super::transport::{Http, Subprocess, Transport};
use super::{Agent, AgentError, Endpoint, SessionInfo};
use crate::memory::MemoryWindow;
use crate::model::{Action, Observation};
use crate::money::Money;

pub struct ExternalAgent {
    transport: Box<dyn Transport>,
    timeout: Duration,
    period: u32,
    description: Option<String>,
}

impl ExternalAgent {
    pub fn connect(endpoint: &Endpoint, timeout: Duration) -> Result<Self, AgentError> {
        let transport: Box<dyn Transport> = match endpoint {
            Endpoint::Command { program, args } => Box::new(Subprocess::spawn(program, args)?),
            Endpoint::Http { url } => Box::new(Http::new(url, timeout)),
        };
        Ok(Self::with_transport(transport, timeout))
    }

    pub fn with_transport(transport: Box<dyn Transport>, timeout: Duration) -> Self {
        ExternalAgent { transport, timeout, period: 0, description: None }
    }

    /// The `agent` string from the peer's `ready`, if any.
    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    fn exchange(&mut self, msg: &Message) -> Result<Message, AgentError> {
        self.transport.send(&msg.encode())?;
        let line = self.transport.recv(self.timeout)?;
        Message::decode(&line)
    }
}

impl Agent for ExternalAgent {
    fn start(&mut self, s: &SessionInfo) -> Result<(), AgentError> {
        let hello = Message::Hello(Hello {
            protocol_version: PROTOCOL_VERSION,
            env_id: s.env,
            role_id: s.role.clone(),
            horizon: s.horizon,
            framing: s.framing,
            cognitive_reflection: s.cognitive_reflection,
            info_sharing: s.info_sharing,
            memory_window: s.memory_window,
        });
        match self.exchange(&hello)? {
            Message::Ready(r) => {
                let got = r.protocol_version.unwrap_or(PROTOCOL_VERSION);
                if got != PROTOCOL_VERSION {
                    return Err(AgentError::VersionMismatch { expected: PROTOCOL_VERSION, got });
                }
                self.description = r.agent;
                Ok(())
            }
            other => Err(AgentError::UnexpectedMessage { expected: "ready", got: other.kind().into() }),
        }
    }

    fn decide(&mut self, obs: &Observation, memory: &MemoryWindow) -> Result<Action, AgentError> {
        self.period = obs.period;
        let msg = Message::Observe {
            period: obs.period,
            body: Box::new(Observe {
                observation: obs.clone(),
                memory: memory.to_vec(),
                context: render_context(obs, memory),
            }),
        };
        match self.exchange(&msg)? {
            Message::Act { period, body: Act { orders } } => {
                if period != obs.period {
                    return Err(AgentError::PeriodMismatch { expected: obs.period, got: period });
                }
                let action = Action { orders };
                action.validate(&obs.channels)?;
                Ok(action)
            }
            other => Err(AgentError::UnexpectedMessage { expected: "act", got: other.kind().into() }),
        }
    }

    fn finish(&mut self, totals: &BTreeMap<String, Money>) -> Result<(), AgentError> {
        let end = Message::End { period: self.period, body: End { totals: totals.clone() } };
        self.transport.send(&end.encode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::transport::{FnTransport, Reply};
    use crate::env::EnvParams;
    use crate::model::{EnvId, Framing};

    fn session() -> SessionInfo {
        SessionInfo {
            env: EnvId::Nvp,
            role: "newsvendor".into(),
            horizon: 3,
            framing: Framing::Positive,
            cognitive_reflection: false,
            info_sharing: false,
            memory_window: 0,
        }
    }

    fn peer(act: &'static str) -> ExternalAgent {
        let t = FnTransport::new(move |line: &str| {
            let kind = Message::decode(line).unwrap().kind();
            match kind {
                "hello" => Reply::Line(r#"{"type":"ready","period":0,"payload":{}}"#.into()),
                "observe" if act == "silence" => Reply::Silence,
                "observe" if act == "close" => Reply::Close,
                "observe" => Reply::Line(act.into()),
                _ => Reply::Close,
            }
        });
        ExternalAgent::with_transport(Box::new(t), Duration::from_millis(10))
    }

    fn decide(act: &'static str) -> Result<Action, AgentError> {
        let env = EnvParams::default_for(EnvId::Nvp).build(3, 0).unwrap();
        let obs = env.observe(0, false);
        let mut a = peer(act);
        a.start(&session())?;
        a.decide(&obs, &MemoryWindow::new(0))
    }

    #[test]
    fn valid_reply() {
        let a = decide(r#"{"type":"act","period":1,"payload":{"orders":{"order":7}}}"#).unwrap();
        assert_eq!(a, Action::single("order", 7));
    }

    #[test]
    fn failure_codes() {
        let cases = [
            ("{oops", "malformed_json"),
            (r#"{"type":"act","period":1,"payload":{}}"#, "schema_violation"),
            (r#"{"type":"act","period":2,"payload":{"orders":{"order":7}}}"#, "period_mismatch"),
            (r#"{"type":"act","period":1,"payload":{"orders":{"order":-7}}}"#, "invalid_action"),
            (r#"{"type":"act","period":1,"payload":{"orders":{"bogus":7}}}"#, "invalid_action"),
            (r#"{"type":"ready","period":1}"#, "unexpected_message"),
            ("silence", "timeout"),
            ("close", "stream_closed"),
        ];
        for (reply, code) in cases {
            assert_eq!(decide(reply).unwrap_err().code(), code, "{reply}");
        }
    }

    #[test]
    fn version_mismatch() {
        let t = FnTransport::new(|_: &str| Reply::Line(r#"{"type":"ready","payload":{"protocol_version":2}}"#.into()));
        let mut a = ExternalAgent::with_transport(Box::new(t), Duration::from_millis(10));
        assert_eq!(a.start(&session()), Err(AgentError::VersionMismatch { expected: 1, got: 2 }));
    }
}
