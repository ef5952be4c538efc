use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::par::{self, Execution};

pub const DEFAULT_SUBSAMPLE_SIZE: usize = 2000;
pub const DEFAULT_SUBSAMPLE_SEED: u64 = 0x5111_0a77;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum SilhouetteMode {
    Exact,
    /// Score a fixed-seed uniform subsample once `N` exceeds `size`.
    Subsample { size: usize, seed: u64 },
}

impl Default for SilhouetteMode {
    fn default() -> Self {
        SilhouetteMode::Subsample {
            size: DEFAULT_SUBSAMPLE_SIZE,
            seed: DEFAULT_SUBSAMPLE_SEED,
        }
    }
}

/// A computed score, or the signal that every scored point shares one
/// cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Silhouette {
    Score(f64),
    Degenerate,
}

impl Silhouette {
    pub fn score(self) -> Option<f64> {
        match self {
            Silhouette::Score(s) => Some(s),
            Silhouette::Degenerate => None,
        }
    }
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

/// Per-point silhouette values, or `None` for a single-cluster partition.
/// Points alone in their cluster score 0.
pub fn silhouette_samples(
    z: &Matrix,
    labels: &[usize],
    exec: Execution,
) -> Result<Option<Vec<f64>>> {
    let n = z.rows();
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {n} rows",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::Contract("silhouette of an empty matrix".into()));
    }
    let (ids, c) = compact(labels);
    if c < 2 {
        return Ok(None);
    }
    let mut sizes = vec![0usize; c];
    ids.iter().for_each(|&l| sizes[l] += 1);
    let s = par::map_range(exec, n, |i| {
        let own = ids[i];
        if sizes[own] == 1 {
            return 0.0;
        }
        let xi = z.row(i);
        let mut sums = vec![0.0f64; c];
        for (j, &lj) in ids.iter().enumerate() {
            if j != i {
                sums[lj] += squared_distance(xi, z.row(j)).sqrt();
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..c)
            .filter(|&l| l != own)
            .map(|l| sums[l] / sizes[l] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            (b - a) / denom
        } else {
            0.0
        }
    });
    Ok(Some(s))
}

/// Mean silhouette over all points, Euclidean distance.
pub fn silhouette_exact(z: &Matrix, labels: &[usize], exec: Execution) -> Result<Silhouette> {
    Ok(match silhouette_samples(z, labels, exec)? {
        Some(s) => Silhouette::Score(s.iter().sum::<f64>() / s.len() as f64),
        None => Silhouette::Degenerate,
    })
}

/// Sorted indices of the points scored under `mode`.
pub fn scored_indices(n: usize, mode: SilhouetteMode) -> Option<Vec<usize>> {
    match mode {
        SilhouetteMode::Subsample { size, seed } if n > size => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, n, size).into_vec();
            idx.sort_unstable();
            Some(idx)
        }
        _ => None,
    }
}

pub fn silhouette(
    z: &Matrix,
    labels: &[usize],
    mode: SilhouetteMode,
    exec: Execution,
) -> Result<Silhouette> {
    if labels.len() != z.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            z.rows()
        )));
    }
    match scored_indices(z.rows(), mode) {
        Some(idx) => {
            let sub = z.select_rows(&idx);
            let sub_labels: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            silhouette_exact(&sub, &sub_labels, exec)
        }
        None => silhouette_exact(z, labels, exec),
    }
}
