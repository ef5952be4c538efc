//! Runtime sweeps on synthetic categorical data.
//!
//! Offline time covers describing every distinct value with the stub source
//! and stub-encoding the descriptions. Online time covers pooling, view
//! assembly, the weight search and the final k-means.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{extract_vocabulary, Dataset, Labels};
use crate::encoding::StubEncoder;
use crate::error::{Error, Result};
use crate::fusion::{run_arise, ClusterParams};
use crate::par::Execution;
use crate::semantics::{
    enrich_vocabulary, DescriptionCache, EnrichOptions, PromptSpec, StubSource,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    M,
    /// Per-attribute cardinality, which drives `|V|`.
    V,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(Axis::N),
            "m" => Ok(Axis::M),
            "v" => Ok(Axis::V),
            other => Err(Error::Config(format!("unknown axis {other:?}; expected n, m or v"))),
        }
    }
}

/// Class-structured categorical table: every class has a prototype value per
/// attribute, kept with probability `purity` and otherwise redrawn uniformly.
pub fn synthetic_dataset(
    n: usize,
    m: usize,
    cardinality: usize,
    k: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || m == 0 || cardinality == 0 || k == 0 {
        return Err(Error::Config("synthetic sizes must be positive".into()));
    }
    let purity = 0.7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let protos: Vec<Vec<usize>> = (0..k)
        .map(|_| (0..m).map(|_| rng.random_range(0..cardinality)).collect())
        .collect();
    let names: Vec<String> = (0..m).map(|j| format!("a{j}")).collect();
    let mut rows = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        let row: Vec<String> = (0..m)
            .map(|j| {
                let v = if rng.random::<f64>() < purity {
                    protos[c][j]
                } else {
                    rng.random_range(0..cardinality)
                };
                format!("v{v}")
            })
            .collect();
        rows.push(row);
        classes.push(format!("c{c}"));
    }
    Dataset::from_rows(
        format!("synthetic-n{n}-m{m}-v{cardinality}"),
        &names,
        &rows,
        Some(Labels::from_raw(&classes)),
        k,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub axis: Axis,
    pub values: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub cardinality: usize,
    pub k: usize,
    pub dim: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    /// Each point is timed this many times; the minimum is reported.
    pub repeats: usize,
    pub exec: Execution,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            axis: Axis::N,
            values: vec![2000, 4000, 8000],
            n: 2000,
            m: 10,
            cardinality: 5,
            k: 4,
            dim: 8,
            grid: vec![0.0, 0.5, 1.0],
            seed: 0,
            repeats: 3,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub axis: Axis,
    pub value: usize,
    pub n: usize,
    pub m: usize,
    pub vocab: usize,
    pub offline_seconds: f64,
    pub online_seconds: f64,
    pub queries: usize,
}

pub fn run_scaling(cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    if cfg.values.is_empty() || cfg.repeats == 0 {
        return Err(Error::Config("scaling needs at least one value and one repeat".into()));
    }
    let encoder = StubEncoder::new(cfg.dim)?;
    let spec = PromptSpec::default();
    let params = ClusterParams {
        grid: cfg.grid.clone(),
        seed: cfg.seed,
        exec: cfg.exec,
        ..ClusterParams::default()
    };
    let mut rows = Vec::with_capacity(cfg.values.len());
    for &value in &cfg.values {
        let (n, m, card) = match cfg.axis {
            Axis::N => (value, cfg.m, cfg.cardinality),
            Axis::M => (cfg.n, value, cfg.cardinality),
            Axis::V => (cfg.n, cfg.m, value),
        };
        let ds = synthetic_dataset(n, m, card, cfg.k, cfg.seed)?;
        let vocab = extract_vocabulary(&ds);
        let mut offline = f64::INFINITY;
        let mut online = f64::INFINITY;
        let mut queries = 0;
        for _ in 0..cfg.repeats {
            let start = Instant::now();
            let mut cache = DescriptionCache::in_memory();
            let report = enrich_vocabulary(
                &ds,
                &vocab,
                &StubSource,
                &spec,
                &mut cache,
                &EnrichOptions::default(),
            )?;
            let tokens = encoder.encode_records(&report.records)?;
            offline = offline.min(start.elapsed().as_secs_f64());
            queries = report.queries;

            let start = Instant::now();
            run_arise(&ds, Some(&tokens), &params)?;
            online = online.min(start.elapsed().as_secs_f64());
        }
        log::info!("{:?}={value}: offline {offline:.3}s, online {online:.3}s", cfg.axis);
        rows.push(ScalingRow {
            axis: cfg.axis,
            value,
            n,
            m,
            vocab: vocab.len(),
            offline_seconds: offline,
            online_seconds: online,
            queries,
        });
    }
    Ok(rows)
}

pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Config(format!("cannot write scaling CSV: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("cannot write scaling CSV: {e}")))
}
