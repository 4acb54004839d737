//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so they run on stable too.

use std::path::PathBuf;

use invsim::agents::protocol::Message;
use invsim::harness::{emit_tables, BatchSummary, ExperimentConfig};
use invsim::kernel::StepRecord;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .flatten()
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read_to_string(e.path()).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn protocol_seeds() {
    let mut decoded = 0;
    for (name, text) in seeds("protocol_message") {
        if let Ok(m) = Message::decode(&text) {
            assert_eq!(Message::decode(&m.encode()).unwrap(), m, "{name}");
            decoded += 1;
        }
    }
    assert!(decoded >= 5);
}

#[test]
fn config_seeds() {
    for (name, text) in seeds("experiment_config") {
        let config = ExperimentConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let problems = config.problems();
        assert_eq!(problems.is_empty(), !name.contains("problems"), "{name}: {problems:?}");
    }
}

#[test]
fn step_seeds() {
    for (name, text) in seeds("episode_step") {
        let step: StepRecord = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let back: StepRecord = serde_json::from_str(&serde_json::to_string(&step).unwrap()).unwrap();
        assert_eq!(back, step, "{name}");
    }
}

#[test]
fn summary_seeds() {
    let all: Vec<BatchSummary> = seeds("batch_summary")
        .into_iter()
        .map(|(name, text)| serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}")))
        .collect();
    let t = emit_tables(&all).unwrap();
    assert_eq!(t.table.len(), all.len());
}
