use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::encoding::TokenSource;
use crate::error::{Error, Result, Stage, StageExt};
use crate::eval::metrics::{score, Scores};
use crate::fusion::pipeline::{build_views, check_semantic_input, cluster_views, ClusterParams};
use crate::par;

/// Seeds `0..10`.
pub fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub alpha_star: f64,
    #[serde(flatten)]
    pub scores: Scores,
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub trials: Vec<TrialRecord>,
    pub ari: Aggregate,
    pub nmi: Aggregate,
    pub acc: Aggregate,
    pub count: usize,
    /// How NMI was normalized.
    pub nmi_normalizer: String,
}

impl MetricsReport {
    pub fn from_trials(trials: Vec<TrialRecord>) -> Self {
        let col = |f: fn(&TrialRecord) -> f64| -> Vec<f64> { trials.iter().map(f).collect() };
        Self {
            ari: Aggregate::of(&col(|t| t.scores.ari)),
            nmi: Aggregate::of(&col(|t| t.scores.nmi)),
            acc: Aggregate::of(&col(|t| t.scores.acc)),
            count: trials.len(),
            nmi_normalizer: "arithmetic".into(),
            trials,
        }
    }
}

/// Clusters once per seed and scores each partition against the labels.
///
/// The views are built once. Each trial uses its seed for the weight search
/// and derives its final k-means seed from it.
pub fn run_trials(
    ds: &Dataset,
    tokens: Option<&dyn TokenSource>,
    params: &ClusterParams,
    seeds: &[u64],
) -> Result<MetricsReport> {
    let truth = ds
        .labels
        .as_ref()
        .ok_or_else(|| Error::Config(format!("dataset {:?} has no label column", ds.name)))
        .stage(Stage::Evaluation)?;
    if seeds.is_empty() {
        return Err(Error::Config("no trial seeds given".into())).stage(Stage::Evaluation);
    }
    ds.validate_for_clustering().stage(Stage::Load)?;
    check_semantic_input(tokens, params)?;
    let views = build_views(ds, tokens, params.pooling, params.best_effort, params.exec)?;
    let trials = par::map_slice(params.exec, seeds, |&seed| -> Result<TrialRecord> {
        let p = ClusterParams {
            seed,
            final_seed: None,
            ..params.clone()
        };
        let r = cluster_views(ds.k, &views, &p)?;
        let scores = score(&truth.ids, &r.labels).stage(Stage::Evaluation)?;
        Ok(TrialRecord {
            seed,
            alpha_star: r.alpha_star,
            scores,
        })
    });
    Ok(MetricsReport::from_trials(
        trials.into_iter().collect::<Result<_>>()?,
    ))
}
