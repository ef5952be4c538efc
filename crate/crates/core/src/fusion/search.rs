use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::fuse::{check_alpha, fuse};
use crate::fusion::kmeans::{kmeans, KMeansConfig, KMeansResult};
use crate::fusion::silhouette::{silhouette, Silhouette, SilhouetteMode};
use crate::matrix::Matrix;
use crate::par::{self, Execution};

/// `{0.0, 0.1, ..., 1.0}`.
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCandidate {
    pub alpha: f64,
    /// `None` when the candidate's partition was degenerate.
    pub silhouette: Option<f64>,
    pub inertia: f64,
    pub seed: u64,
}

impl AlphaCandidate {
    pub fn is_degenerate(&self) -> bool {
        self.silhouette.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearchTrace {
    pub candidates: Vec<AlphaCandidate>,
    /// Index into `candidates` of the selected weight.
    pub selected: usize,
}

impl AlphaSearchTrace {
    pub fn alpha_star(&self) -> f64 {
        self.candidates[self.selected].alpha
    }
}

#[derive(Debug, Clone)]
pub struct AlphaSearch {
    pub trace: AlphaSearchTrace,
    /// The k-means run of the selected candidate.
    pub best: KMeansResult,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    pub kmeans: KMeansConfig,
    pub silhouette: SilhouetteMode,
    pub exec: Execution,
}

/// Improvements at or below this are treated as ties. Scaling `Z` leaves the
/// silhouette unchanged in exact arithmetic, so such candidates differ only
/// by rounding.
pub const SCORE_TIE_TOLERANCE: f64 = 1e-12;

/// Index of the first strict maximum among scored candidates.
pub fn first_strict_max(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.map_or(true, |(_, b)| s > b + SCORE_TIE_TOLERANCE) {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Fuses, clusters and scores every grid weight with the same seed, then keeps
/// the first weight with the highest silhouette.
pub fn select_alpha(
    anchor: &Matrix,
    semantic: &Matrix,
    k: usize,
    grid: &[f64],
    seed: u64,
    opts: &SearchOptions,
) -> Result<AlphaSearch> {
    if grid.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    for &a in grid {
        check_alpha(a)?;
    }
    let runs = par::map_slice(opts.exec, grid, |&alpha| -> Result<_> {
        let z = fuse(anchor, semantic, alpha)?;
        let km = kmeans(&z.matrix, k, seed, &opts.kmeans)?;
        let s = silhouette(&z.matrix, &km.labels, opts.silhouette, opts.exec)?;
        Ok((km, s))
    });
    let mut candidates = Vec::with_capacity(grid.len());
    let mut results = Vec::with_capacity(grid.len());
    for (&alpha, run) in grid.iter().zip(runs) {
        let (km, s) = run?;
        if s == Silhouette::Degenerate {
            log::info!("alpha = {alpha}: k-means produced a single cluster");
        }
        candidates.push(AlphaCandidate {
            alpha,
            silhouette: s.score(),
            inertia: km.inertia,
            seed,
        });
        results.push(km);
    }
    let scores: Vec<Option<f64>> = candidates.iter().map(|c| c.silhouette).collect();
    let selected = first_strict_max(&scores).ok_or(Error::Selection)?;
    Ok(AlphaSearch {
        best: results.swap_remove(selected),
        trace: AlphaSearchTrace {
            candidates,
            selected,
        },
    })
}
