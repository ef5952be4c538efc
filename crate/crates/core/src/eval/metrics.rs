//! External validation metrics. All three are invariant to renaming the
//! cluster ids on either side.

use std::collections::BTreeMap;

use pathfinding::kuhn_munkres::kuhn_munkres;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense contingency table between two labelings.
#[derive(Debug, Clone)]
pub struct Contingency {
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl Contingency {
    pub fn new(y_true: &[usize], y_pred: &[usize]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Contract(format!(
                "label vectors differ in length: {} vs {}",
                y_true.len(),
                y_pred.len()
            )));
        }
        let rows = index(y_true);
        let cols = index(y_pred);
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (t, p) in y_true.iter().zip(y_pred) {
            counts[rows[t]][cols[p]] += 1;
        }
        Ok(Self {
            counts,
            n: y_true.len() as u64,
        })
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let cols = self.counts.first().map_or(0, Vec::len);
        (0..cols)
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

fn index(labels: &[usize]) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for &l in labels {
        let next = m.len();
        m.entry(l).or_insert(next);
    }
    m
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand index. Returns 1 when the index is undefined because both
/// partitions are trivial in the same way.
pub fn ari(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let c = Contingency::new(y_true, y_pred)?;
    if c.n < 2 {
        return Err(Error::Contract("ARI needs at least 2 points".into()));
    }
    let index: f64 = c.counts.iter().flatten().map(|&x| pairs(x)).sum();
    let a: f64 = c.row_sums().into_iter().map(pairs).sum();
    let b: f64 = c.col_sums().into_iter().map(pairs).sum();
    let expected = a * b / pairs(c.n);
    let max = (a + b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the arithmetic mean of the two entropies.
/// Two constant labelings score 1.
pub fn nmi(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let c = Contingency::new(y_true, y_pred)?;
    if c.n == 0 {
        return Err(Error::Contract("NMI of empty labelings".into()));
    }
    let n = c.n as f64;
    let rows = c.row_sums();
    let cols = c.col_sums();
    let (ht, hp) = (entropy(&rows, n), entropy(&cols, n));
    if ht == 0.0 && hp == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in c.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let denom = (ht + hp) / 2.0;
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// Best accuracy over one-to-one maps from clusters to classes.
pub fn acc(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let c = Contingency::new(y_true, y_pred)?;
    if c.n == 0 {
        return Err(Error::Contract("ACC of empty labelings".into()));
    }
    let size = c.counts.len().max(c.col_sums().len());
    let mut weights = pathfinding::matrix::Matrix::new(size, size, 0i64);
    for (i, row) in c.counts.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            weights[(i, j)] = x as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / c.n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ari: f64,
    pub nmi: f64,
    pub acc: f64,
}

pub fn score(y_true: &[usize], y_pred: &[usize]) -> Result<Scores> {
    Ok(Scores {
        ari: ari(y_true, y_pred)?,
        nmi: nmi(y_true, y_pred)?,
        acc: acc(y_true, y_pred)?,
    })
}
