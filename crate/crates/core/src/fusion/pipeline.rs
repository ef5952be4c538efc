//! The full clustering pipeline from a loaded table and encoded descriptions.

use serde::{Deserialize, Serialize};

use crate::dataset::{extract_vocabulary, Dataset};
use crate::encoding::{
    assemble_semantic_matrix, one_hot_matrix, pool_vocabulary, Pooling, TokenSource,
};
use crate::error::{Error, Result, Stage, StageExt};
use crate::fusion::fuse::{fuse, FusedRepresentation};
use crate::fusion::kmeans::{kmeans, KMeansConfig};
use crate::fusion::normalize::zscore_normalize;
use crate::fusion::search::{default_grid, select_alpha, AlphaSearchTrace, SearchOptions};
use crate::fusion::silhouette::SilhouetteMode;
use crate::matrix::Matrix;
use crate::par::Execution;

const FINAL_SEED_SALT: u64 = 0xF1A1_5EED_0000_0001;

/// How the final partition on `Z_{α*}` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinalClustering {
    /// Re-run k-means on the selected representation with the final seed.
    #[default]
    Rerun,
    /// Keep the selected candidate's search-time partition.
    ReuseSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub grid: Vec<f64>,
    pub pooling: Pooling,
    pub seed: u64,
    /// Seed of the final k-means run; derived from `seed` when unset.
    pub final_seed: Option<u64>,
    pub final_clustering: FinalClustering,
    pub kmeans: KMeansConfig,
    pub silhouette: SilhouetteMode,
    /// Zero-fill values missing from the token source instead of failing.
    pub best_effort: bool,
    pub exec: Execution,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            pooling: Pooling::default(),
            seed: 0,
            final_seed: None,
            final_clustering: FinalClustering::default(),
            kmeans: KMeansConfig::default(),
            silhouette: SilhouetteMode::default(),
            best_effort: false,
            exec: Execution::default(),
        }
    }
}

impl ClusterParams {
    pub fn final_seed(&self) -> u64 {
        self.final_seed.unwrap_or(self.seed ^ FINAL_SEED_SALT)
    }

    fn needs_semantics(&self) -> bool {
        self.grid.iter().any(|&a| a > 0.0)
    }
}

/// Rejects a grid with positive weights when no token source is available.
pub(crate) fn check_semantic_input(
    tokens: Option<&dyn TokenSource>,
    params: &ClusterParams,
) -> Result<()> {
    if tokens.is_none() && params.needs_semantics() {
        return Err(Error::Config(
            "the alpha grid has weights above 0 but no token bundle was given".into(),
        ))
        .stage(Stage::Encoding);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub centroids: Matrix,
    pub inertia: f64,
    pub inertia_trace: Vec<f64>,
    pub alpha_star: f64,
    pub trace: AlphaSearchTrace,
    pub fused: FusedRepresentation,
    pub final_seed: Option<u64>,
    /// Values zero-filled under best-effort encoding.
    pub zero_filled: Vec<(String, String)>,
}

/// Normalized anchor and semantic views of a dataset.
#[derive(Debug, Clone)]
pub struct Views {
    pub anchor: Matrix,
    pub semantic: Matrix,
    pub zero_filled: Vec<(String, String)>,
}

/// Builds both normalized views. Without a token source the semantic view
/// has no columns.
pub fn build_views(
    ds: &Dataset,
    tokens: Option<&dyn TokenSource>,
    pooling: Pooling,
    best_effort: bool,
    exec: Execution,
) -> Result<Views> {
    let vocab = extract_vocabulary(ds);
    let (semantic, zero_filled) = match tokens {
        Some(src) => {
            let pooled = pool_vocabulary(ds, &vocab, src, pooling, best_effort, exec)
                .stage(Stage::Encoding)?;
            let s = assemble_semantic_matrix(ds, &vocab, &pooled.embeddings, exec)
                .stage(Stage::Encoding)?;
            (
                zscore_normalize(&s.matrix).stage(Stage::Fusion)?,
                pooled.zero_filled,
            )
        }
        None => (Matrix::zeros(ds.n(), 0), Vec::new()),
    };
    let anchor = one_hot_matrix(ds, &vocab).stage(Stage::Encoding)?;
    let anchor = zscore_normalize(&anchor.matrix).stage(Stage::Fusion)?;
    Ok(Views {
        anchor,
        semantic,
        zero_filled,
    })
}

/// Runs the online pipeline: views, weight search, final partition.
pub fn run_arise(
    ds: &Dataset,
    tokens: Option<&dyn TokenSource>,
    params: &ClusterParams,
) -> Result<ClusterResult> {
    ds.validate_for_clustering().stage(Stage::Load)?;
    check_semantic_input(tokens, params)?;
    let views = build_views(ds, tokens, params.pooling, params.best_effort, params.exec)?;
    cluster_views(ds.k, &views, params)
}

/// Weight search and final partition on prepared views.
pub fn cluster_views(k: usize, views: &Views, params: &ClusterParams) -> Result<ClusterResult> {
    let opts = SearchOptions {
        kmeans: params.kmeans,
        silhouette: params.silhouette,
        exec: params.exec,
    };
    let search = select_alpha(
        &views.anchor,
        &views.semantic,
        k,
        &params.grid,
        params.seed,
        &opts,
    )
    .stage(Stage::Clustering)?;
    let alpha_star = search.trace.alpha_star();
    let fused = fuse(&views.anchor, &views.semantic, alpha_star).stage(Stage::Fusion)?;
    let (km, final_seed) = match params.final_clustering {
        FinalClustering::Rerun => {
            let seed = params.final_seed();
            let km = kmeans(&fused.matrix, k, seed, &params.kmeans).stage(Stage::Clustering)?;
            (km, Some(seed))
        }
        FinalClustering::ReuseSearch => (search.best, None),
    };
    Ok(ClusterResult {
        labels: km.labels,
        centroids: km.centroids,
        inertia: km.inertia,
        inertia_trace: km.inertia_trace,
        alpha_star,
        trace: search.trace,
        fused,
        final_seed,
        zero_filled: views.zero_filled.clone(),
    })
}
