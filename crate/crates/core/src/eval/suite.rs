//! Repeated-trial runs over several dataset and configuration pairs.
//!
//! A suite file is TOML with an optional `[defaults]` table and one
//! `[[run]]` table per row; each run overrides the defaults key by key.
//!
//! ```toml
//! [defaults]
//! seeds = [0, 1, 2]
//!
//! [[run]]
//! name = "OHK"
//! dataset = "zoo.csv"
//! alphas = "0"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::encoding::TokenSource;
use crate::error::{Error, Result};
use crate::eval::trials::{run_trials, Aggregate, MetricsReport};
use crate::TOOL_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub name: String,
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub report: MetricsReport,
    pub config_echo: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub tool_version: String,
}

/// Parses a suite into one config per run.
pub fn parse_suite(text: &str) -> Result<Vec<RunConfig>> {
    let mut doc: toml::Table =
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid suite: {e}")))?;
    let defaults = match doc.remove("defaults") {
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(Error::Config("suite `defaults` must be a table".into())),
        None => toml::Table::new(),
    };
    let runs = match doc.remove("run") {
        Some(toml::Value::Array(a)) => a,
        _ => return Err(Error::Config("suite has no [[run]] tables".into())),
    };
    if let Some(key) = doc.keys().next() {
        return Err(Error::Config(format!("unknown suite key {key:?}")));
    }
    runs.into_iter()
        .enumerate()
        .map(|(i, run)| {
            let toml::Value::Table(run) = run else {
                return Err(Error::Config(format!("run {} is not a table", i + 1)));
            };
            let mut merged = defaults.clone();
            merged.extend(run);
            let mut cfg: RunConfig = toml::Value::Table(merged)
                .try_into()
                .map_err(|e| Error::Config(format!("run {}: {e}", i + 1)))?;
            cfg.name.get_or_insert_with(|| format!("run{}", i + 1));
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

/// Runs every suite entry, resolving paths against `base`.
pub fn run_suite(configs: &[RunConfig], base: &Path) -> Result<SuiteReport> {
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let name = cfg.name.clone().unwrap_or_default();
        log::info!("suite run {name}");
        let ds = cfg.load_dataset(base)?;
        let bundle = cfg.open_bundle(base)?;
        let tokens = bundle.as_ref().map(|b| b as &dyn TokenSource);
        let report = run_trials(&ds, tokens, &cfg.cluster_params(), &cfg.seeds)?;
        rows.push(SuiteRow {
            name,
            dataset: ds.name.clone(),
            n: ds.n(),
            k: ds.k,
            report,
            config_echo: cfg.echo(),
        });
    }
    Ok(SuiteReport {
        rows,
        tool_version: TOOL_VERSION.into(),
    })
}

fn cell(a: &Aggregate) -> String {
    format!("{:.3}±{:.2}", a.mean, a.std)
}

impl SuiteReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Run | Dataset | N | K | Trials | ARI | NMI | ACC |\n|---|---|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} |\n",
                r.name,
                r.dataset,
                r.n,
                r.k,
                r.report.count,
                cell(&r.report.ari),
                cell(&r.report.nmi),
                cell(&r.report.acc)
            ));
        }
        out.push_str("\nMean±population std over trials; NMI uses the arithmetic-mean normalizer.\n");
        out
    }
}
