//! Parameter-free pooling of token states into one vector per value.
//!
//! Special tokens (sequence start/end, padding) never contribute to mean or
//! attention pooling; CLS pooling reads exactly the sequence-start state.
//! Token states are `f32`; every sum is accumulated in `f64`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoding::token::TokenMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Attention,
    Mean,
    Cls,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Attention => "attention",
            Pooling::Mean => "mean",
            Pooling::Cls => "cls",
        })
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "attention" => Ok(Pooling::Attention),
            "mean" => Ok(Pooling::Mean),
            "cls" => Ok(Pooling::Cls),
            other => Err(Error::Config(format!(
                "unknown pooling {other:?}; expected attention, mean or cls"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueEmbedding {
    pub vector: Vec<f64>,
    pub pooling: Pooling,
}

impl ValueEmbedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    fn checked(vector: Vec<f64>, pooling: Pooling) -> Result<Self> {
        if let Some(k) = vector.iter().position(|x| !x.is_finite()) {
            return Err(Error::BundleFormat(format!(
                "pooled vector has a non-finite entry at dimension {k}"
            )));
        }
        Ok(Self { vector, pooling })
    }
}

/// Mean activation of each token; special tokens score `-inf`.
pub fn token_scores(tm: &TokenMatrix) -> Result<Vec<f64>> {
    if tm.content_count() == 0 {
        return Err(Error::NoContent);
    }
    let d = tm.dim() as f64;
    Ok((0..tm.len())
        .map(|t| {
            if tm.is_special(t) {
                f64::NEG_INFINITY
            } else {
                tm.row(t).iter().map(|&x| x as f64).sum::<f64>() / d
            }
        })
        .collect())
}

/// Softmax of the token scores, max-subtracted. Special tokens get exactly 0.
pub fn attention_weights(tm: &TokenMatrix) -> Result<Vec<f64>> {
    let scores = token_scores(tm)?;
    let max = scores
        .iter()
        .copied()
        .filter(|s| s.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::BundleFormat(
            "token scores are not finite; hidden states contain inf or NaN".into(),
        ));
    }
    let mut w: Vec<f64> = scores
        .iter()
        .map(|&s| if s == f64::NEG_INFINITY { 0.0 } else { (s - max).exp() })
        .collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    Ok(w)
}

fn weighted_sum(tm: &TokenMatrix, weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; tm.dim()];
    for (t, &a) in weights.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (o, &h) in out.iter_mut().zip(tm.row(t)) {
            *o += a * h as f64;
        }
    }
    out
}

pub fn attention_pool(tm: &TokenMatrix) -> Result<ValueEmbedding> {
    let w = attention_weights(tm)?;
    ValueEmbedding::checked(weighted_sum(tm, &w), Pooling::Attention)
}

pub fn mean_pool(tm: &TokenMatrix) -> Result<ValueEmbedding> {
    let count = tm.content_count();
    if count == 0 {
        return Err(Error::NoContent);
    }
    let mut out = vec![0.0f64; tm.dim()];
    for t in (0..tm.len()).filter(|&t| !tm.is_special(t)) {
        for (o, &h) in out.iter_mut().zip(tm.row(t)) {
            *o += h as f64;
        }
    }
    let c = count as f64;
    out.iter_mut().for_each(|x| *x /= c);
    ValueEmbedding::checked(out, Pooling::Mean)
}

pub fn cls_pool(tm: &TokenMatrix) -> Result<ValueEmbedding> {
    let start = tm.start_index().ok_or_else(|| {
        Error::BundleFormat("CLS pooling needs a flagged sequence-start token".into())
    })?;
    let v = tm.row(start).iter().map(|&x| x as f64).collect();
    ValueEmbedding::checked(v, Pooling::Cls)
}

pub fn pool(tm: &TokenMatrix, pooling: Pooling) -> Result<ValueEmbedding> {
    match pooling {
        Pooling::Attention => attention_pool(tm),
        Pooling::Mean => mean_pool(tm),
        Pooling::Cls => cls_pool(tm),
    }
}
