//! The `result.json` document written by a clustering run.
//!
//! The document holds no timestamps, so identical inputs give identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::ClusterResult;
use crate::TOOL_VERSION;

/// Score recorded for a degenerate candidate, flagged separately.
pub const DEGENERATE_SCORE: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub alpha: f64,
    pub s: f64,
    pub degenerate: bool,
    pub inertia: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub alpha_star: f64,
    pub silhouette_trace: Vec<TraceEntry>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub final_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_filled: Vec<(String, String)>,
    pub config_echo: serde_json::Value,
    pub tool_version: String,
}

impl ResultDocument {
    pub fn new(result: &ClusterResult, config_echo: serde_json::Value) -> Self {
        Self {
            alpha_star: result.alpha_star,
            silhouette_trace: result
                .trace
                .candidates
                .iter()
                .map(|c| TraceEntry {
                    alpha: c.alpha,
                    s: c.silhouette.unwrap_or(DEGENERATE_SCORE),
                    degenerate: c.is_degenerate(),
                    inertia: c.inertia,
                    seed: c.seed,
                })
                .collect(),
            labels: result.labels.clone(),
            inertia: result.inertia,
            final_seed: result.final_seed,
            zero_filled: result.zero_filled.clone(),
            config_echo,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes to JSON");
        s.push('\n');
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
