//! Seed fan-out, log persistence and aggregation.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, ExperimentConfig};
use super::report::{emit_tables, write_file};
use crate::agents::{Agent, AgentSpec};
use crate::kernel::{run_episode, EpisodeLog, KernelError, SimConfig};
use crate::metrics::{population_std, MetricsReport};
use crate::model::{EnvId, Framing};
use crate::money::Money;
use crate::oracles::expost_optimal;

/// Version of the summary file layout.
pub const SUMMARY_SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigError>),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    /// Mean and population std of the defined values; `None` if there are none.
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Option<Stat> {
        let xs: Vec<f64> = values.into_iter().flatten().collect();
        if xs.is_empty() {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        Some(Stat { mean, std: population_std(&xs), n: xs.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub avg_cost: Option<Stat>,
    pub turnover_rate: Option<Stat>,
    pub stockout_rate: Vec<Option<Stat>>,
    pub stockout_rate_sum: Option<Stat>,
    pub anchoring_alpha: Option<Stat>,
    pub demand_chasing_rho: Option<Stat>,
    pub bullwhip_per_link: Vec<Option<Stat>>,
    pub bullwhip_end_to_end: Option<Stat>,
    pub distance: Option<Stat>,
    pub expost_cost: Option<Stat>,
}

impl Aggregate {
    /// Per-seed metrics averaged; nothing is pooled across seeds.
    pub fn of(reports: &[MetricsReport]) -> Aggregate {
        let field = |f: fn(&MetricsReport) -> Option<f64>| Stat::of(reports.iter().map(f));
        let width = |f: fn(&MetricsReport) -> usize| reports.iter().map(f).max().unwrap_or(0);
        let stockouts = width(|r| r.stockout_rate.len());
        let links = width(|r| r.bullwhip_per_link.len());
        Aggregate {
            avg_cost: field(|r| Some(r.avg_cost)),
            turnover_rate: field(|r| r.turnover_rate),
            stockout_rate: (0..stockouts)
                .map(|i| Stat::of(reports.iter().map(|r| r.stockout_rate.get(i).copied())))
                .collect(),
            stockout_rate_sum: field(|r| Some(r.stockout_rate_sum)),
            anchoring_alpha: field(|r| r.anchoring_alpha),
            demand_chasing_rho: field(|r| r.demand_chasing_rho),
            bullwhip_per_link: (0..links)
                .map(|i| Stat::of(reports.iter().map(|r| r.bullwhip_per_link.get(i).copied().flatten())))
                .collect(),
            bullwhip_end_to_end: field(|r| r.bullwhip_end_to_end),
            distance: field(|r| r.distance),
            expost_cost: field(|r| r.expost_cost),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub code: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub schema: u32,
    pub label: String,
    pub env: EnvId,
    pub framing: Framing,
    pub info_sharing: bool,
    pub cognitive_reflection: bool,
    pub horizon: u32,
    pub seeds: Vec<u64>,
    pub failures: Vec<SeedFailure>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub summary: BatchSummary,
    /// Successful seeds with their metrics, in seed-list order.
    pub per_seed: Vec<(u64, MetricsReport)>,
    pub out_dir: PathBuf,
}

impl BatchReport {
    pub fn failed(&self) -> bool {
        !self.summary.failures.is_empty()
    }
}

#[derive(Serialize)]
struct EpisodeMeta<'a> {
    label: &'a str,
    config: &'a SimConfig,
    roles: &'a [String],
    totals: &'a std::collections::BTreeMap<String, Money>,
}

fn failure_code(e: &KernelError) -> String {
    match e {
        KernelError::Protocol { source, .. } => source.code().to_string(),
        KernelError::InvalidConfig(_) => "invalid_config".into(),
        KernelError::Env(_) => "environment".into(),
        KernelError::AgentCount { .. } => "agent_count".into(),
    }
}

/// Fills empty `expost_replay` order lists with the oracle's orders for the
/// seed's realization. Arrival periods and demands do not depend on order
/// quantities, so a pilot run with zero orders reveals the realization.
fn resolve_replay(sim: &SimConfig, roster: &mut [(String, AgentSpec)]) -> Result<(), KernelError> {
    let needs = roster.iter().any(|(_, s)| matches!(s, AgentSpec::ExpostReplay { orders } if orders.is_empty()));
    if !needs {
        return Ok(());
    }
    let mut pilot: Vec<Box<dyn Agent>> = roster
        .iter()
        .map(|(r, _)| AgentSpec::Constant { quantity: 0 }.build(r, sim.seed))
        .collect::<Result<_, _>>()
        .map_err(|e| KernelError::InvalidConfig(e.to_string()))?;
    let log = run_episode(sim, &mut pilot)?;
    let inst = crate::metrics::mpr_instance(&log)
        .ok_or_else(|| KernelError::InvalidConfig("expost_replay needs the MPR environment".into()))?;
    let best = expost_optimal(&inst).map_err(|e| KernelError::InvalidConfig(e.to_string()))?;
    for (_, spec) in roster.iter_mut() {
        if let AgentSpec::ExpostReplay { orders } = spec {
            if orders.is_empty() {
                *orders = best.orders.clone();
            }
        }
    }
    Ok(())
}

/// Runs one seed with scripted or external agents as configured.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<EpisodeLog, KernelError> {
    let sim = config.sim_config(seed);
    let mut roster = config.roster().map_err(|e| KernelError::InvalidConfig(e.to_string()))?;
    resolve_replay(&sim, &mut roster)?;
    let mut agents: Vec<Box<dyn Agent>> = Vec::with_capacity(roster.len());
    for (role, spec) in &roster {
        let agent = spec
            .build(role, seed)
            .map_err(|source| KernelError::Protocol { period: 0, role: role.clone(), source })?;
        agents.push(agent);
    }
    let log = run_episode(&sim, &mut agents)?;
    log.check_consistency().map_err(KernelError::InvalidConfig)?;
    Ok(log)
}

pub fn episode_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join("episodes").join(format!("seed-{seed}.jsonl"))
}

/// One JSON object per period.
pub fn write_episode(dir: &Path, label: &str, log: &EpisodeLog) -> std::io::Result<()> {
    let path = episode_path(dir, log.config.seed);
    let mut w = BufWriter::new(File::create(&path)?);
    for step in &log.steps {
        serde_json::to_writer(&mut w, step)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let meta = EpisodeMeta { label, config: &log.config, roles: &log.roles, totals: &log.totals };
    let text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
    write_file(&path.with_extension("meta.json"), &(text + "\n"))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn per_seed_csv(rows: &[(u64, MetricsReport)]) -> Result<String, csv::Error> {
    let roles = rows.iter().map(|r| r.1.stockout_rate.len()).max().unwrap_or(0);
    let links = rows.iter().map(|r| r.1.bullwhip_per_link.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["seed", "avg_cost", "turnover_rate", "stockout_rate_sum", "anchoring_alpha", "demand_chasing_rho", "bullwhip_end_to_end", "distance", "expost_cost"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..roles).map(|i| format!("stockout_rate_{i}")));
    header.extend((0..links).map(|i| format!("bullwhip_link_{i}")));
    w.write_record(&header)?;
    for (seed, r) in rows {
        let mut rec = vec![
            seed.to_string(),
            r.avg_cost.to_string(),
            opt(r.turnover_rate),
            r.stockout_rate_sum.to_string(),
            opt(r.anchoring_alpha),
            opt(r.demand_chasing_rho),
            opt(r.bullwhip_end_to_end),
            opt(r.distance),
            opt(r.expost_cost),
        ];
        rec.extend((0..roles).map(|i| opt(r.stockout_rate.get(i).copied())));
        rec.extend((0..links).map(|i| opt(r.bullwhip_per_link.get(i).copied().flatten())));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

fn summary_csv(s: &BatchSummary) -> Result<String, csv::Error> {
    let a = &s.aggregate;
    let mut rows: Vec<(String, Option<Stat>)> = vec![
        ("avg_cost".into(), a.avg_cost),
        ("turnover_rate".into(), a.turnover_rate),
        ("stockout_rate_sum".into(), a.stockout_rate_sum),
        ("anchoring_alpha".into(), a.anchoring_alpha),
        ("demand_chasing_rho".into(), a.demand_chasing_rho),
        ("bullwhip_end_to_end".into(), a.bullwhip_end_to_end),
        ("distance".into(), a.distance),
        ("expost_cost".into(), a.expost_cost),
    ];
    rows.extend(a.stockout_rate.iter().enumerate().map(|(i, x)| (format!("stockout_rate_{i}"), *x)));
    rows.extend(a.bullwhip_per_link.iter().enumerate().map(|(i, x)| (format!("bullwhip_link_{i}"), *x)));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "env", "metric", "mean", "std", "n"])?;
    for (name, stat) in rows {
        let (mean, std, n) = match stat {
            Some(st) => (st.mean.to_string(), st.std.to_string(), st.n.to_string()),
            None => (String::new(), String::new(), "0".into()),
        };
        w.write_record([s.label.as_str(), s.env.as_str(), &name, &mean, &std, &n])?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

/// Runs every seed, writing logs and reports under `out_dir` (or the
/// configured directory). Failed seeds are reported, not fatal.
pub fn run_batch(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<BatchReport, BatchError> {
    config.validate().map_err(BatchError::Config)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(dir.join("episodes"))?;
    let label = config.label();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| BatchError::Pool(e.to_string()))?;
    let results: Vec<(u64, Result<EpisodeLog, KernelError>)> =
        pool.install(|| config.seeds.par_iter().map(|s| (*s, run_seed(config, *s))).collect());

    let mut per_seed = Vec::new();
    let mut failures = Vec::new();
    for (seed, result) in results {
        match result {
            Ok(log) => {
                write_episode(&dir, &label, &log)?;
                per_seed.push((seed, MetricsReport::from_log(&log)));
            }
            Err(e) => failures.push(SeedFailure { seed, code: failure_code(&e), error: e.to_string() }),
        }
    }
    let reports: Vec<MetricsReport> = per_seed.iter().map(|r| r.1.clone()).collect();
    let summary = BatchSummary {
        schema: SUMMARY_SCHEMA,
        label,
        env: config.env.id(),
        framing: config.framing,
        info_sharing: config.info_sharing,
        cognitive_reflection: config.cognitive_reflection,
        horizon: config.horizon,
        seeds: config.seeds.clone(),
        failures,
        aggregate: Aggregate::of(&reports),
    };

    let csv_err = |e: csv::Error| BatchError::Io(std::io::Error::other(e));
    write_file(&dir.join("metrics.csv"), &per_seed_csv(&per_seed).map_err(csv_err)?)?;
    write_file(&dir.join("summary.csv"), &summary_csv(&summary).map_err(csv_err)?)?;
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    write_file(&dir.join("summary.json"), &(json + "\n"))?;
    let tables = emit_tables(std::slice::from_ref(&summary)).map_err(|e| BatchError::Io(std::io::Error::other(e)))?;
    write_file(&dir.join("table.csv"), &tables.table_csv)?;
    write_file(&dir.join("bullwhip.csv"), &tables.bullwhip_csv)?;
    Ok(BatchReport { summary, per_seed, out_dir: dir })
}
