use std::collections::HashMap;

use crate::dataset::{Dataset, Vocabulary};
use crate::encoding::bundle::TokenSource;
use crate::encoding::pooling::{pool, Pooling, ValueEmbedding};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::par::{self, Execution};

/// `N × (M·d)` matrix; attribute `j` occupies columns `[j·d, (j+1)·d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMatrix {
    pub matrix: Matrix,
    pub block_dim: usize,
}

/// `N × |V|` one-hot matrix with exactly `M` ones per row.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorMatrix {
    pub matrix: Matrix,
}

/// Pooled embeddings keyed by vocabulary id.
#[derive(Debug, Clone, Default)]
pub struct PooledVocabulary {
    pub embeddings: HashMap<usize, ValueEmbedding>,
    pub dim: usize,
    /// Values with no token states that were zero-filled.
    pub zero_filled: Vec<(String, String)>,
}

/// Pools token states for every vocabulary entry in parallel.
///
/// A value with no token states is a coverage error unless `best_effort`
/// is set, in which case it gets a zero vector and is listed in
/// `zero_filled`.
pub fn pool_vocabulary(
    ds: &Dataset,
    vocab: &Vocabulary,
    tokens: &dyn TokenSource,
    pooling: Pooling,
    best_effort: bool,
    exec: Execution,
) -> Result<PooledVocabulary> {
    let dim = tokens.dim();
    let pooled = par::map_slice(exec, vocab.entries(), |entry| {
        let attr = &ds.attributes[entry.attribute].name;
        match tokens.tokens(attr, &entry.value)? {
            Some(tm) => pool(&tm, pooling).map(Some),
            None => Ok(None),
        }
    });
    let mut out = PooledVocabulary {
        dim,
        ..Default::default()
    };
    for (id, res) in pooled.into_iter().enumerate() {
        let entry = &vocab.entries()[id];
        let attr = &ds.attributes[entry.attribute].name;
        match res? {
            Some(e) => {
                if e.dim() != dim {
                    return Err(Error::BundleFormat(format!(
                        "{attr}={} pooled to dim {}, expected {dim}",
                        entry.value,
                        e.dim()
                    )));
                }
                out.embeddings.insert(id, e);
            }
            None if best_effort => {
                log::warn!("no token states for {attr}={}; using a zero vector", entry.value);
                out.zero_filled.push((attr.clone(), entry.value.clone()));
                out.embeddings.insert(
                    id,
                    ValueEmbedding {
                        vector: vec![0.0; dim],
                        pooling,
                    },
                );
            }
            None => {
                return Err(Error::Coverage(format!(
                    "no token states for {attr}={}",
                    entry.value
                )))
            }
        }
    }
    Ok(out)
}

/// Concatenates each row's value embeddings attribute by attribute.
pub fn assemble_semantic_matrix(
    ds: &Dataset,
    vocab: &Vocabulary,
    embeddings: &HashMap<usize, ValueEmbedding>,
    exec: Execution,
) -> Result<SemanticMatrix> {
    let mut dim = None;
    for (id, entry) in vocab.entries().iter().enumerate() {
        let e = embeddings.get(&id).ok_or_else(|| {
            Error::Coverage(format!(
                "no embedding for {}={}",
                ds.attributes[entry.attribute].name, entry.value
            ))
        })?;
        match dim {
            None => dim = Some(e.dim()),
            Some(d) if d != e.dim() => {
                return Err(Error::BundleFormat(format!(
                    "embedding for {}={} has dim {}, others have {d}",
                    ds.attributes[entry.attribute].name,
                    entry.value,
                    e.dim()
                )))
            }
            _ => {}
        }
    }
    let d = dim.unwrap_or(0);
    if d == 0 {
        return Err(Error::BundleFormat("embeddings have dimension 0".into()));
    }
    let m = ds.m();
    let width = m * d;
    let mut matrix = Matrix::zeros(ds.n(), width);
    par::for_each_chunk_mut(exec, matrix.as_mut_slice(), width, |i, row| {
        for j in 0..m {
            let id = vocab.id(j, ds.cell(i, j));
            row[j * d..(j + 1) * d].copy_from_slice(&embeddings[&id].vector);
        }
    });
    Ok(SemanticMatrix {
        matrix,
        block_dim: d,
    })
}

pub fn one_hot_matrix(ds: &Dataset, vocab: &Vocabulary) -> Result<AnchorMatrix> {
    if vocab.num_attributes() != ds.m() {
        return Err(Error::Coverage(format!(
            "vocabulary covers {} attributes, dataset has {}",
            vocab.num_attributes(),
            ds.m()
        )));
    }
    let width = vocab.len();
    let mut matrix = Matrix::zeros(ds.n(), width);
    for i in 0..ds.n() {
        for j in 0..ds.m() {
            let (lo, hi) = vocab.span(j);
            let id = vocab.id(j, ds.cell(i, j));
            if id < lo || id >= hi {
                return Err(Error::Coverage(format!(
                    "{}={} is not in the vocabulary",
                    ds.attributes[j].name,
                    ds.cell_value(i, j)
                )));
            }
            matrix.set(i, id, 1.0);
        }
    }
    Ok(AnchorMatrix { matrix })
}
