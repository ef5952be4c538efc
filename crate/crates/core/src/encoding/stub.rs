//! Deterministic stand-in for a transformer encoder.
//!
//! Descriptions are split on whitespace. Each token's state is a seeded hash
//! vector of its normalized text plus a smaller hash vector of its position,
//! so descriptions that share words get correlated states. Row 0 is a
//! synthetic sequence-start token flagged special.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::encoding::bundle::{write_bundle, Manifest, MemoryTokens};
use crate::encoding::token::TokenMatrix;
use crate::error::{Error, Result};
use crate::semantics::DescriptionRecord;
use crate::TOOL_VERSION;

pub const STUB_ENCODER_MODEL: &str = "stub-hash-v1";
const START_TOKEN: &str = "<s>";
const POSITION_WEIGHT: f32 = 0.25;

#[derive(Debug, Clone, Copy)]
pub struct StubEncoder {
    dim: usize,
}

fn hash_vector(key: &str, dim: usize) -> Vec<f32> {
    let digest = Sha256::digest(key.as_bytes());
    let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect()
}

fn normalize_token(raw: &str) -> String {
    let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if t.is_empty() {
        raw.to_lowercase()
    } else {
        t.to_lowercase()
    }
}

impl StubEncoder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("stub encoder dim must be positive".into()));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encode(&self, text: &str) -> Result<TokenMatrix> {
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.is_empty() {
            return Err(Error::EmptyDescription);
        }
        let len = words.len() + 1;
        let mut states = Vec::with_capacity(len * self.dim);
        states.extend(hash_vector(&format!("tok:{START_TOKEN}"), self.dim));
        for (p, w) in words.iter().enumerate() {
            let tok = hash_vector(&format!("tok:{}", normalize_token(w)), self.dim);
            let pos = hash_vector(&format!("pos:{}", p + 1), self.dim);
            states.extend(tok.iter().zip(&pos).map(|(t, q)| t + POSITION_WEIGHT * q));
        }
        let mut special = vec![false; len];
        special[0] = true;
        TokenMatrix::new(len, self.dim, states, special, Some(0))
    }

    /// Encodes every record into memory.
    pub fn encode_records(&self, records: &[DescriptionRecord]) -> Result<MemoryTokens> {
        let mut out = MemoryTokens::new(self.dim);
        for r in records {
            out.insert(&r.attribute, &r.value, self.encode(&r.description)?)?;
        }
        Ok(out)
    }
}

/// Writes a stub bundle for the given descriptions, one entry per record in
/// record order.
pub fn export_stub_bundle(
    records: &[DescriptionRecord],
    out_dir: impl AsRef<Path>,
    dim: usize,
) -> Result<Manifest> {
    let enc = StubEncoder::new(dim)?;
    let items = records
        .iter()
        .map(|r| Ok((r.attribute.clone(), r.value.clone(), enc.encode(&r.description)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut extra = serde_json::Map::new();
    extra.insert("tool_version".into(), TOOL_VERSION.into());
    write_bundle(out_dir, STUB_ENCODER_MODEL, &items, extra)
}
