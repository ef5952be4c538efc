//! Token-embedding bundle: a `manifest.json` plus one binary file per value.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! b"ARTB" | 0x01 | u32 L | u32 d | L*d f32 (row-major) | L flag bytes
//! ```
//!
//! Flag byte 0 marks a content token, 1 a special token.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoding::token::TokenMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ARTB";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub attribute: String,
    pub value: String,
    pub file: String,
    pub num_tokens: usize,
    pub start_token_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub encoder_model: String,
    pub dim: usize,
    pub entries: Vec<ManifestEntry>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

pub fn encode_token_file(tm: &TokenMatrix) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + tm.states().len() * 4 + tm.len());
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.extend_from_slice(&(tm.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(tm.dim() as u32).to_le_bytes());
    for &x in tm.states() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf.extend(tm.special_flags().iter().map(|&s| s as u8));
    buf
}

/// Parses one token file. `start` comes from the manifest.
pub fn decode_token_file(bytes: &[u8], start: Option<usize>) -> Result<TokenMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::BundleFormat(format!(
            "file is {} bytes, shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BundleFormat("bad magic bytes".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::BundleFormat(format!(
            "unsupported version {}",
            bytes[4]
        )));
    }
    let len = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let dim = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
    let expected = len
        .checked_mul(dim)
        .and_then(|x| x.checked_mul(4))
        .and_then(|x| x.checked_add(HEADER_LEN + len))
        .ok_or_else(|| Error::BundleFormat("dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::BundleFormat(format!(
            "expected {expected} bytes for {len}x{dim}, found {}",
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..HEADER_LEN + len * dim * 4];
    let states = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let special = bytes[HEADER_LEN + len * dim * 4..]
        .iter()
        .enumerate()
        .map(|(t, &f)| match f {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::BundleFormat(format!(
                "token {t} has flag byte {other}"
            ))),
        })
        .collect::<Result<Vec<bool>>>()?;
    TokenMatrix::new(len, dim, states, special, start)
}

/// Anything that can hand out token states for a value.
pub trait TokenSource: Sync {
    fn dim(&self) -> usize;

    /// Token states for `(attribute, value)`, or `None` when absent.
    fn tokens(&self, attribute: &str, value: &str) -> Result<Option<TokenMatrix>>;
}

/// An on-disk bundle directory.
#[derive(Debug, Clone)]
pub struct Bundle {
    dir: PathBuf,
    manifest: Manifest,
    index: HashMap<(String, String), usize>,
}

impl Bundle {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::BundleFormat(format!("{}: {e}", path.display())))?;
        if manifest.dim == 0 {
            return Err(Error::BundleFormat("manifest dim is 0".into()));
        }
        let mut index = HashMap::new();
        for (i, e) in manifest.entries.iter().enumerate() {
            if index
                .insert((e.attribute.clone(), e.value.clone()), i)
                .is_some()
            {
                return Err(Error::BundleFormat(format!(
                    "manifest lists {}={} twice",
                    e.attribute, e.value
                )));
            }
        }
        Ok(Self {
            dir,
            manifest,
            index,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn contains(&self, attribute: &str, value: &str) -> bool {
        self.index
            .contains_key(&(attribute.to_string(), value.to_string()))
    }

    pub fn load_entry(&self, entry: &ManifestEntry) -> Result<TokenMatrix> {
        let path = self.dir.join(&entry.file);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let tm = decode_token_file(&bytes, entry.start_token_index)
            .map_err(|e| Error::BundleFormat(format!("{}: {e}", path.display())))?;
        if tm.len() != entry.num_tokens {
            return Err(Error::BundleFormat(format!(
                "{}: manifest says {} tokens, file has {}",
                path.display(),
                entry.num_tokens,
                tm.len()
            )));
        }
        if tm.dim() != self.manifest.dim {
            return Err(Error::BundleFormat(format!(
                "{}: dim {} differs from manifest dim {}",
                path.display(),
                tm.dim(),
                self.manifest.dim
            )));
        }
        Ok(tm)
    }

    /// Loads every entry, returning the first format problem found.
    pub fn validate(&self) -> Result<()> {
        for e in &self.manifest.entries {
            self.load_entry(e)?;
        }
        Ok(())
    }
}

impl TokenSource for Bundle {
    fn dim(&self) -> usize {
        self.manifest.dim
    }

    fn tokens(&self, attribute: &str, value: &str) -> Result<Option<TokenMatrix>> {
        match self.index.get(&(attribute.to_string(), value.to_string())) {
            Some(&i) => self.load_entry(&self.manifest.entries[i]).map(Some),
            None => Ok(None),
        }
    }
}

/// Writes a bundle. Files are named by entry position.
pub fn write_bundle(
    dir: impl AsRef<Path>,
    encoder_model: &str,
    items: &[(String, String, TokenMatrix)],
    extra: serde_json::Map<String, serde_json::Value>,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    let dim = items.first().map_or(0, |(_, _, tm)| tm.dim());
    if dim == 0 {
        return Err(Error::BundleFormat("cannot write an empty bundle".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(items.len());
    for (i, (attribute, value, tm)) in items.iter().enumerate() {
        if tm.dim() != dim {
            return Err(Error::BundleFormat(format!(
                "{attribute}={value} has dim {}, bundle dim is {dim}",
                tm.dim()
            )));
        }
        let file = format!("{i:05}.artb");
        let path = dir.join(&file);
        std::fs::write(&path, encode_token_file(tm)).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestEntry {
            attribute: attribute.clone(),
            value: value.clone(),
            file,
            num_tokens: tm.len(),
            start_token_index: tm.start_index(),
        });
    }
    let manifest = Manifest {
        encoder_model: encoder_model.to_string(),
        dim,
        entries,
        extra,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Token matrices held in memory, keyed by `(attribute, value)`.
#[derive(Debug, Clone, Default)]
pub struct MemoryTokens {
    dim: usize,
    map: HashMap<(String, String), TokenMatrix>,
}

impl MemoryTokens {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            map: HashMap::new(),
        }
    }

    pub fn insert(&mut self, attribute: &str, value: &str, tm: TokenMatrix) -> Result<()> {
        if tm.dim() != self.dim {
            return Err(Error::BundleFormat(format!(
                "dim {} differs from {}",
                tm.dim(),
                self.dim
            )));
        }
        self.map.insert((attribute.to_string(), value.to_string()), tm);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl TokenSource for MemoryTokens {
    fn dim(&self) -> usize {
        self.dim
    }

    fn tokens(&self, attribute: &str, value: &str) -> Result<Option<TokenMatrix>> {
        Ok(self
            .map
            .get(&(attribute.to_string(), value.to_string()))
            .cloned())
    }
}
