use crate::error::{Error, Result};

/// Hidden states of one encoded description: `len` tokens of `dim` values.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    len: usize,
    dim: usize,
    states: Vec<f32>,
    special: Vec<bool>,
    start: Option<usize>,
}

impl TokenMatrix {
    pub fn new(
        len: usize,
        dim: usize,
        states: Vec<f32>,
        special: Vec<bool>,
        start: Option<usize>,
    ) -> Result<Self> {
        if len == 0 || dim == 0 {
            return Err(Error::BundleFormat(format!(
                "token matrix must be non-empty, got {len}x{dim}"
            )));
        }
        if states.len() != len * dim {
            return Err(Error::BundleFormat(format!(
                "{} hidden-state values for a {len}x{dim} matrix",
                states.len()
            )));
        }
        if special.len() != len {
            return Err(Error::BundleFormat(format!(
                "{} token flags for {len} tokens",
                special.len()
            )));
        }
        for (t, row) in states.chunks_exact(dim).enumerate() {
            if row.iter().all(|x| x.is_nan()) {
                return Err(Error::BundleFormat(format!("token {t} is all NaN")));
            }
        }
        if let Some(s) = start {
            if s >= len {
                return Err(Error::BundleFormat(format!(
                    "start token index {s} out of range for {len} tokens"
                )));
            }
            if !special[s] {
                return Err(Error::BundleFormat(format!(
                    "start token {s} is not flagged special"
                )));
            }
        }
        Ok(Self {
            len,
            dim,
            states,
            special,
            start,
        })
    }

    /// Content-only matrix from rows; no special tokens.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut states = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.as_ref().len() != dim {
                return Err(Error::BundleFormat("ragged token rows".into()));
            }
            states.extend_from_slice(r.as_ref());
        }
        Self::new(rows.len(), dim, states, vec![false; rows.len()], None)
    }

    /// Same states with a sequence-start token at `index`.
    pub fn with_start(mut self, index: usize) -> Result<Self> {
        if index >= self.len {
            return Err(Error::BundleFormat(format!(
                "start token index {index} out of range"
            )));
        }
        self.special[index] = true;
        self.start = Some(index);
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f32] {
        &self.states[t * self.dim..(t + 1) * self.dim]
    }

    #[inline]
    pub fn is_special(&self, t: usize) -> bool {
        self.special[t]
    }

    pub fn special_flags(&self) -> &[bool] {
        &self.special
    }

    pub fn start_index(&self) -> Option<usize> {
        self.start
    }

    pub fn states(&self) -> &[f32] {
        &self.states
    }

    pub fn content_count(&self) -> usize {
        self.special.iter().filter(|s| !**s).count()
    }
}
