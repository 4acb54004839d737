use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use invsim::agents::protocol::{Act, Message, Ready};
use invsim::agents::transport::{FnTransport, Reply};
use invsim::agents::ExternalAgent;
use invsim::{run_episode, Agent, EnvId, EnvParams, SimConfig};
use serde_json::Value;

fn schema() -> jsonschema::Validator {
    let text = include_str!("../../../docs/protocol.schema.json");
    let schema: Value = serde_json::from_str(text).expect("schema is JSON");
    jsonschema::validator_for(&schema).expect("schema compiles")
}

/// Every line exchanged during an episode, in both directions.
fn transcript(env: EnvId) -> Vec<String> {
    let lines = Arc::new(Mutex::new(Vec::new()));
    let mut config = SimConfig::new(EnvParams::default_for(env), 6, 2);
    config.memory_window = 2;
    config.info_sharing = config.env.is_multi_agent();
    let mut agents: Vec<Box<dyn Agent>> = config
        .env
        .roles()
        .iter()
        .map(|_| {
            let seen = Arc::clone(&lines);
            let transport = FnTransport::new(move |line: &str| {
                let reply = match Message::decode(line).unwrap() {
                    Message::Hello(_) => Some(Message::Ready(Ready::default()).encode()),
                    Message::Observe { period, body } => {
                        let orders: BTreeMap<_, _> = body.observation.channels.iter().map(|c| (c.clone(), 2)).collect();
                        Some(Message::Act { period, body: Act { orders } }.encode())
                    }
                    _ => None,
                };
                let mut seen = seen.lock().unwrap();
                seen.push(line.to_string());
                match reply {
                    Some(r) => {
                        seen.push(r.clone());
                        Reply::Line(r)
                    }
                    None => Reply::Close,
                }
            });
            Box::new(ExternalAgent::with_transport(Box::new(transport), Duration::from_secs(1))) as Box<dyn Agent>
        })
        .collect();
    run_episode(&config, &mut agents).unwrap();
    let out = lines.lock().unwrap().clone();
    out
}

#[test]
fn live_traffic_matches_schema() {
    let v = schema();
    for env in EnvId::ALL {
        let lines = transcript(env);
        let kinds: std::collections::BTreeSet<String> =
            lines.iter().map(|l| serde_json::from_str::<Value>(l).unwrap()["type"].as_str().unwrap().to_string()).collect();
        assert_eq!(kinds.len(), 5, "{env}: {kinds:?}");
        for line in lines {
            let value: Value = serde_json::from_str(&line).unwrap();
            let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{env}: {line}\n{errors:?}");
        }
    }
}

#[test]
fn minimal_ready_matches_schema() {
    let v = schema();
    for line in [r#"{"type":"ready"}"#, r#"{"type":"ready","payload":{}}"#, r#"{"type":"ready","payload":null}"#] {
        assert!(v.is_valid(&serde_json::from_str(line).unwrap()), "{line}");
        assert!(Message::decode(line).is_ok());
    }
}

#[test]
fn schema_rejects_what_the_decoder_rejects() {
    let v = schema();
    for line in [
        r#"{"type":"act","period":1,"payload":{}}"#,
        r#"{"type":"act","period":1,"payload":{"orders":{"order":1.5}}}"#,
        r#"{"type":"act","period":1,"payload":{"orders":{"order":"3"}}}"#,
        r#"{"type":"act","period":1,"payload":{"orders":{}},"extra":1}"#,
        r#"{"type":"dance","period":1}"#,
        r#"[1,2]"#,
    ] {
        let value: Value = serde_json::from_str(line).unwrap();
        assert!(!v.is_valid(&value), "schema accepts {line}");
        assert_eq!(Message::decode(line).unwrap_err().code(), "schema_violation", "{line}");
    }
}
