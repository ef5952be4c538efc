//! Lloyd's k-means with k-means++ seeding.
//!
//! Each run is single-threaded and fully determined by the input and seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Stop once the Euclidean norm of the total centroid shift drops below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Matrix,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    /// Objective after every assignment step, ending with `inertia`.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Nearest centroid by squared distance; ties go to the lower index.
fn nearest(x: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter_rows().enumerate() {
        let d = squared_distance(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(z: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = z.rows();
    let mut centroids = Matrix::zeros(k, z.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(z.row(first));
    let mut d2: Vec<f64> = z.iter_rows().map(|x| squared_distance(x, z.row(first))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(z.row(pick));
        for (i, x) in z.iter_rows().enumerate() {
            d2[i] = d2[i].min(squared_distance(x, z.row(pick)));
        }
    }
    centroids
}

struct Assignment {
    labels: Vec<usize>,
    dist: Vec<f64>,
    inertia: f64,
}

fn assign(z: &Matrix, centroids: &Matrix) -> Assignment {
    let mut labels = Vec::with_capacity(z.rows());
    let mut dist = Vec::with_capacity(z.rows());
    for x in z.iter_rows() {
        let (c, d) = nearest(x, centroids);
        labels.push(c);
        dist.push(d);
    }
    let inertia = dist.iter().sum();
    Assignment {
        labels,
        dist,
        inertia,
    }
}

/// Cluster means. An empty cluster is moved onto the point farthest from its
/// current centroid, each such point used at most once.
fn update(z: &Matrix, k: usize, a: &Assignment, old: &Matrix) -> Matrix {
    let d = z.cols();
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (x, &l) in z.iter_rows().zip(&a.labels) {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(x) {
            *s += v;
        }
    }
    let mut taken = vec![false; z.rows()];
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let n = count as f64;
            sums.row_mut(c).iter_mut().for_each(|s| *s /= n);
            continue;
        }
        let far = (0..z.rows())
            .filter(|&i| !taken[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if a.dist[b] >= a.dist[i] => Some(b),
                _ => Some(i),
            });
        match far {
            Some(i) => {
                taken[i] = true;
                sums.row_mut(c).copy_from_slice(z.row(i));
            }
            None => sums.row_mut(c).copy_from_slice(old.row(c)),
        }
    }
    sums
}

pub fn kmeans(z: &Matrix, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = z.rows();
    if k < 2 {
        return Err(Error::Contract(format!("k-means needs k >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::Contract(format!(
            "k-means needs at least k = {k} rows, got {n}"
        )));
    }
    if cfg.max_iter == 0 || cfg.tol.is_nan() || cfg.tol < 0.0 {
        return Err(Error::Config(
            "k-means needs max_iter >= 1 and a non-negative tolerance".into(),
        ));
    }
    if let Some(p) = z.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(Error::Contract(format!(
            "k-means input has a non-finite entry at row {}",
            p / z.cols().max(1)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(z, k, &mut rng);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let a = assign(z, &centroids);
        trace.push(a.inertia);
        let next = update(z, k, &a, &centroids);
        let shift: f64 = next
            .iter_rows()
            .zip(centroids.iter_rows())
            .map(|(p, q)| squared_distance(p, q))
            .sum::<f64>()
            .sqrt();
        centroids = next;
        if shift < cfg.tol {
            converged = true;
            break;
        }
    }
    let a = assign(z, &centroids);
    trace.push(a.inertia);
    Ok(KMeansResult {
        labels: a.labels,
        centroids,
        inertia: a.inertia,
        inertia_trace: trace,
        iterations,
        converged,
    })
}
