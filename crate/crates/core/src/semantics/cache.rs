//! Append-only JSON-lines store of value descriptions.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptionRecord {
    pub attribute: String,
    pub value: String,
    pub description: String,
    pub model: String,
    pub prompt_hash: String,
    pub created_at: String,
    /// Fields written by other tools; kept verbatim.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DescriptionRecord {
    pub fn key(&self) -> CacheKey {
        CacheKey {
            attribute: self.attribute.clone(),
            value: self.value.clone(),
            model: self.model.clone(),
            prompt_hash: self.prompt_hash.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub attribute: String,
    pub value: String,
    pub model: String,
    pub prompt_hash: String,
}

/// Description records keyed by `(attribute, value, model, prompt_hash)`.
///
/// File-backed caches append and flush one line per insert, so a crash
/// loses at most the record being written.
#[derive(Debug, Default)]
pub struct DescriptionCache {
    path: Option<PathBuf>,
    records: Vec<DescriptionRecord>,
    index: HashMap<CacheKey, usize>,
    writer: Option<BufWriter<File>>,
}

impl DescriptionCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or prepares to create) a cache file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut cache = DescriptionCache {
            path: Some(path.clone()),
            ..Self::default()
        };
        match File::open(&path) {
            Ok(f) => {
                for (i, line) in BufReader::new(f).lines().enumerate() {
                    let line = line.map_err(|e| Error::io(&path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let rec: DescriptionRecord =
                        serde_json::from_str(&line).map_err(|e| Error::Parse {
                            row: i + 1,
                            message: format!("{}: {e}", path.display()),
                        })?;
                    if rec.description.trim().is_empty() {
                        return Err(Error::Parse {
                            row: i + 1,
                            message: format!("{}: empty description", path.display()),
                        });
                    }
                    let key = rec.key();
                    if cache.index.contains_key(&key) {
                        log::warn!(
                            "{}:{}: duplicate record for {}={} ignored",
                            path.display(),
                            i + 1,
                            rec.attribute,
                            rec.value
                        );
                        continue;
                    }
                    cache.index.insert(key, cache.records.len());
                    cache.records.push(rec);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(&path, e)),
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[DescriptionRecord] {
        &self.records
    }

    pub fn get(
        &self,
        attribute: &str,
        value: &str,
        model: &str,
        prompt_hash: &str,
    ) -> Option<&DescriptionRecord> {
        let key = CacheKey {
            attribute: attribute.to_string(),
            value: value.to_string(),
            model: model.to_string(),
            prompt_hash: prompt_hash.to_string(),
        };
        self.index.get(&key).map(|&i| &self.records[i])
    }

    /// First record for a value, whatever model or prompt produced it.
    pub fn find(&self, attribute: &str, value: &str) -> Option<&DescriptionRecord> {
        self.records
            .iter()
            .find(|r| r.attribute == attribute && r.value == value)
    }

    /// One record per `(attribute, value)`, the first in file order,
    /// optionally restricted to one model.
    pub fn unique_values(&self, model: Option<&str>) -> Vec<DescriptionRecord> {
        let mut seen = std::collections::HashSet::new();
        self.records
            .iter()
            .filter(|r| model.map_or(true, |m| r.model == m))
            .filter(|r| seen.insert((r.attribute.as_str(), r.value.as_str())))
            .cloned()
            .collect()
    }

    /// Adds a record, persisting it first when file-backed.
    pub fn insert(&mut self, record: DescriptionRecord) -> Result<()> {
        if record.description.trim().is_empty() {
            return Err(Error::EmptyDescription);
        }
        let key = record.key();
        if self.index.contains_key(&key) {
            return Err(Error::Contract(format!(
                "cache already holds {}={} for model {}",
                record.attribute, record.value, record.model
            )));
        }
        if let Some(path) = &self.path {
            if self.writer.is_none() {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                let f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| Error::io(path, e))?;
                self.writer = Some(BufWriter::new(f));
            }
            let w = self.writer.as_mut().expect("writer opened above");
            let line = serde_json::to_string(&record)?;
            writeln!(w, "{line}")
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        self.index.insert(key, self.records.len());
        self.records.push(record);
        Ok(())
    }
}
