//! Cross-batch tables: cost and service per setting, and bullwhip per setting.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::batch::{BatchSummary, Stat, SUMMARY_SCHEMA};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("summary schema {found} differs from {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("no summary.json under {0}")]
    NoSummaries(String),
    #[error("{path}: {reason}")]
    Read { path: String, reason: String },
    #[error("csv: {0}")]
    Csv(String),
}

/// Writes `text` only when the file does not already hold it.
pub fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if fs::read_to_string(path).is_ok_and(|old| old == text) {
        return Ok(());
    }
    fs::write(path, text)
}

/// One row per batch: agent, env, average cost, turnover, stockout, distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub agent: String,
    pub env: String,
    pub avg_cost: Option<f64>,
    pub turnover_rate: Option<f64>,
    pub stockout_rate: Option<f64>,
    pub distance: Option<f64>,
}

/// End-to-end bullwhip ratio per setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BullwhipRow {
    pub agent: String,
    pub env: String,
    pub info_sharing: bool,
    pub beta_mean: f64,
    pub beta_std: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tables {
    pub table: Vec<TableRow>,
    pub bullwhip: Vec<BullwhipRow>,
    #[serde(skip)]
    pub table_csv: String,
    #[serde(skip)]
    pub bullwhip_csv: String,
}

fn mean(s: Option<Stat>) -> Option<f64> {
    s.map(|s| s.mean)
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn emit_tables(summaries: &[BatchSummary]) -> Result<Tables, ReportError> {
    for s in summaries {
        if s.schema != SUMMARY_SCHEMA {
            return Err(ReportError::SchemaMismatch { expected: SUMMARY_SCHEMA, found: s.schema });
        }
    }
    let table: Vec<TableRow> = summaries
        .iter()
        .map(|s| TableRow {
            agent: s.label.clone(),
            env: s.env.to_string(),
            avg_cost: mean(s.aggregate.avg_cost),
            turnover_rate: mean(s.aggregate.turnover_rate),
            stockout_rate: mean(s.aggregate.stockout_rate_sum),
            distance: mean(s.aggregate.distance),
        })
        .collect();
    let bullwhip: Vec<BullwhipRow> = summaries
        .iter()
        .filter_map(|s| {
            let b = s.aggregate.bullwhip_end_to_end?;
            Some(BullwhipRow {
                agent: s.label.clone(),
                env: s.env.to_string(),
                info_sharing: s.info_sharing,
                beta_mean: b.mean,
                beta_std: b.std,
                seeds: b.n,
            })
        })
        .collect();

    let csv_err = |e: csv::Error| ReportError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["agent", "env", "avg_cost", "turnover_rate", "stockout_rate", "distance"]).map_err(csv_err)?;
    for r in &table {
        w.write_record([
            r.agent.clone(),
            r.env.clone(),
            cell(r.avg_cost),
            cell(r.turnover_rate),
            cell(r.stockout_rate),
            cell(r.distance),
        ])
        .map_err(csv_err)?;
    }
    let table_csv = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8");

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["agent", "env", "info_sharing", "beta_mean", "beta_std", "seeds"]).map_err(csv_err)?;
    for r in &bullwhip {
        w.write_record([
            r.agent.clone(),
            r.env.clone(),
            r.info_sharing.to_string(),
            r.beta_mean.to_string(),
            r.beta_std.to_string(),
            r.seeds.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bullwhip_csv = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8");
    Ok(Tables { table, bullwhip, table_csv, bullwhip_csv })
}

/// `summary.json` in `dir` and in its immediate subdirectories, sorted by path.
pub fn find_summaries(dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let read_err = |e: std::io::Error| ReportError::Read { path: dir.display().to_string(), reason: e.to_string() };
    let mut found = Vec::new();
    let own = dir.join("summary.json");
    if own.is_file() {
        found.push(own);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(read_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        let p = d.join("summary.json");
        if p.is_file() {
            found.push(p);
        }
    }
    if found.is_empty() {
        return Err(ReportError::NoSummaries(dir.display().to_string()));
    }
    Ok(found)
}

pub fn load_summaries(dir: &Path) -> Result<Vec<BatchSummary>, ReportError> {
    find_summaries(dir)?
        .into_iter()
        .map(|p| {
            let err = |reason: String| ReportError::Read { path: p.display().to_string(), reason };
            let text = fs::read_to_string(&p).map_err(|e| err(e.to_string()))?;
            serde_json::from_str(&text).map_err(|e| err(e.to_string()))
        })
        .collect()
}
