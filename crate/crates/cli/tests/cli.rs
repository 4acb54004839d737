use std::path::Path;
use std::process::{Command, Output};

fn invsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invsim")).args(args).output().expect("invsim runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const BG: &str = r#"
horizon = 12
seeds = [1, 2]
info_sharing = true
[env]
kind = "BG"
[agents]
"*" = { kind = "base_stock", level = 20 }
"#;

#[test]
fn validate_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.toml", BG);
    assert_eq!(invsim(&["validate", "--config", &ok]).status.code(), Some(0));

    let bad = write(
        dir.path(),
        "bad.toml",
        "horizon = 0\nseeds = [3, 3]\nframing = \"PF\"\n[env]\nkind = \"BG\"\n[agents]\nretailer = { kind = \"constant\", quantity = 1 }\n",
    );
    let out = invsim(&["validate", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for needle in ["horizon", "seed 3", "framing", "wholesaler"] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
    let missing = dir.path().join("nope.toml").display().to_string();
    assert_eq!(invsim(&["validate", "--config", &missing]).status.code(), Some(2));
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bg.toml", BG);
    let out = dir.path().join("runs").join("bg");
    let status = invsim(&["run", "--config", &cfg, "--seeds", "3", "--out", &out.display().to_string()]).status;
    assert_eq!(status.code(), Some(0));
    for f in ["metrics.csv", "summary.csv", "summary.json", "episodes/seed-3.jsonl", "episodes/seed-3.meta.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert!(!out.join("episodes/seed-4.jsonl").exists());

    let runs = dir.path().join("runs");
    let rep = invsim(&["report", "--in", &runs.display().to_string()]);
    assert_eq!(rep.status.code(), Some(0));
    let table = String::from_utf8(rep.stdout).unwrap();
    assert!(table.starts_with("agent,env,avg_cost,turnover_rate,stockout_rate,distance\nbase_stock,BG,"));
    let bw = std::fs::read_to_string(runs.join("bullwhip.csv")).unwrap();
    assert!(bw.lines().nth(1).unwrap().starts_with("base_stock,BG,true,"));

    let json = invsim(&["report", "--in", &runs.display().to_string(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["table"][0]["env"], "BG");
}

#[test]
fn failing_agent_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "horizon = 3\nseeds = [1]\n[env]\nkind = \"NVP\"\n[agents]\nnewsvendor = {{ kind = \"external\", timeout_secs = 5, endpoint = {{ transport = \"command\", program = {:?}, args = [\"--misbehave\", \"negative-order\"] }} }}\n",
        env!("CARGO_BIN_EXE_echo-agent")
    );
    let cfg = write(dir.path(), "ext.toml", &cfg);
    let out = invsim(&["run", "--config", &cfg, "--out", &dir.path().join("o").display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("invalid_action"));
}

#[test]
fn report_without_summaries_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invsim(&["report", "--in", &dir.path().display().to_string()]).status.code(), Some(2));
}
