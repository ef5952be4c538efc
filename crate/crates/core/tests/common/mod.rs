//! Brute-force reference implementations used to check the library.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

/// ARI from the pair confusion counts, enumerating every pair of points.
pub fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let denom = (n11 + n01) * (n01 + n00) + (n11 + n10) * (n10 + n00);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (n11 * n00 - n01 * n10) / denom
}

fn probabilities<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>, n: f64) -> HashMap<K, f64> {
    let mut counts: HashMap<K, usize> = HashMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

/// NMI from explicit joint and marginal distributions, arithmetic-mean
/// normalizer.
pub fn nmi_entropy(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let pa = probabilities(a.iter().copied(), n);
    let pb = probabilities(b.iter().copied(), n);
    let pab = probabilities(a.iter().copied().zip(b.iter().copied()), n);
    let h = |p: &HashMap<usize, f64>| -> f64 { p.values().map(|&x| -x * x.ln()).sum() };
    let (ha, hb) = (h(&pa), h(&pb));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let mi: f64 = pab
        .iter()
        .map(|(&(x, y), &p)| p * (p / (pa[&x] * pb[&y])).ln())
        .sum();
    mi / ((ha + hb) / 2.0)
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut p in permutations(rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// ACC by trying every one-to-one map from clusters to classes.
pub fn acc_enumerate(truth: &[usize], pred: &[usize]) -> f64 {
    let mut classes: Vec<usize> = truth.to_vec();
    classes.sort();
    classes.dedup();
    let mut clusters: Vec<usize> = pred.to_vec();
    clusters.sort();
    clusters.dedup();
    let size = classes.len().max(clusters.len());
    let mut best = 0usize;
    for perm in permutations((0..size).collect()) {
        // cluster clusters[i] maps to class slot perm[i]; slots past the
        // class list match nothing
        let hits = truth
            .iter()
            .zip(pred)
            .filter(|(t, p)| {
                let ci = clusters.iter().position(|c| c == *p).unwrap();
                classes.get(perm[ci]) == Some(t)
            })
            .count();
        best = best.max(hits);
    }
    best as f64 / truth.len() as f64
}

/// Mean silhouette by direct double loop over points.
pub fn silhouette_naive(points: &[Vec<f64>], labels: &[usize]) -> Option<f64> {
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort();
    clusters.dedup();
    if clusters.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let own: Vec<usize> = (0..points.len())
            .filter(|&j| j != i && labels[j] == labels[i])
            .collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / own.len() as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| {
                let members: Vec<usize> = (0..points.len()).filter(|&j| labels[j] == c).collect();
                members.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>()
                    / members.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Some(total / points.len() as f64)
}

/// Softmax of row means with excluded rows, computed directly.
pub fn attention_naive(rows: &[Vec<f32>], special: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let scores: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).sum::<f64>() / r.len() as f64)
        .collect();
    let max = scores
        .iter()
        .zip(special)
        .filter(|(_, &s)| !s)
        .map(|(x, _)| *x)
        .fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores
        .iter()
        .zip(special)
        .map(|(x, &s)| if s { 0.0 } else { (x - max).exp() })
        .collect();
    let z: f64 = e.iter().sum();
    let w: Vec<f64> = e.iter().map(|x| x / z).collect();
    let d = rows[0].len();
    let pooled = (0..d)
        .map(|k| rows.iter().zip(&w).map(|(r, a)| a * r[k] as f64).sum())
        .collect();
    (w, pooled)
}

/// `(n, m, |V|)` rows of the published dataset statistics table.
pub const PUBLISHED_SIZES: [(&str, usize, usize, usize); 8] = [
    ("ZO", 101, 16, 36),
    ("LY", 148, 18, 59),
    ("BC", 286, 9, 51),
    ("SB", 307, 35, 133),
    ("DE", 366, 34, 133),
    ("SF", 1066, 10, 31),
    ("CA", 1728, 6, 21),
    ("MU", 8124, 22, 126),
];
