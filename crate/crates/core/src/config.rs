//! Run configuration shared by the command line, config files and suites.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{load_dataset, CsvOptions, Dataset};
use crate::encoding::{Bundle, Pooling};
use crate::error::{Error, Result, Stage, StageExt};
use crate::fusion::silhouette::{DEFAULT_SUBSAMPLE_SEED, DEFAULT_SUBSAMPLE_SIZE};
use crate::fusion::{default_grid, ClusterParams, FinalClustering, KMeansConfig, SilhouetteMode};
use crate::par::Execution;
use crate::semantics::llm::API_KEY_ENV;
use crate::semantics::{LlmEndpointConfig, PromptSpec};

/// Fusion weights to try, in order.
///
/// Parses `"0:1:0.1"` (inclusive range), `"0,0.5,1"` or `"0"`; config files
/// may also give a list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid(pub Vec<f64>);

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid(default_grid())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("alpha grid: {s:?} is not a number")))
}

/// Rounds away float noise from range arithmetic, e.g. `0.30000000000000004`.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl AlphaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("alpha grid is empty".into()));
        }
        if let Some(a) = values.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Config(format!("alpha {a} lies outside [0, 1]")));
        }
        Ok(AlphaGrid(values))
    }
}

impl FromStr for AlphaGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, end, step] = parts[..] else {
                return Err(Error::Config(format!(
                    "alpha range {s:?} must look like start:end:step"
                )));
            };
            let (start, end, step) = (parse_number(start)?, parse_number(end)?, parse_number(step)?);
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(Error::Config(format!(
                    "alpha range {s:?} needs a positive step and start <= end"
                )));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            return AlphaGrid::new((0..count).map(|i| tidy(start + i as f64 * step)).collect());
        }
        let values = s.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
        AlphaGrid::new(values)
    }
}

impl fmt::Display for AlphaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for AlphaGrid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlphaGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            One(f64),
            List(Vec<f64>),
        }
        let grid = match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse(),
            Raw::One(a) => AlphaGrid::new(vec![a]),
            Raw::List(v) => AlphaGrid::new(v),
        };
        grid.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlmProvider {
    #[default]
    Stub,
    /// Any OpenAI-compatible chat completions endpoint.
    Openai,
}

impl FromStr for LlmProvider {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stub" => Ok(LlmProvider::Stub),
            "openai" => Ok(LlmProvider::Openai),
            other => Err(Error::Config(format!(
                "unknown llm provider {other:?}; expected stub or openai"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub provider: LlmProvider,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_seconds: u64,
    pub parallelism: usize,
    pub prompt_template: Option<PathBuf>,
    pub max_words: usize,
}

impl Default for LlmSettings {
    fn default() -> Self {
        let endpoint = LlmEndpointConfig::new("", "");
        Self {
            provider: LlmProvider::Stub,
            endpoint: None,
            model: None,
            temperature: endpoint.temperature,
            max_retries: endpoint.max_retries,
            timeout_seconds: endpoint.timeout_seconds,
            parallelism: 4,
            prompt_template: None,
            max_words: crate::semantics::prompt::DEFAULT_MAX_WORDS,
        }
    }
}

impl LlmSettings {
    /// Endpoint settings for the remote provider, with the key read from
    /// the environment.
    pub fn endpoint_config(&self) -> Result<LlmEndpointConfig> {
        let base = self.endpoint.as_deref().ok_or_else(|| {
            Error::Config("the openai provider needs an endpoint URL (--endpoint)".into())
        })?;
        let model = self.model.as_deref().ok_or_else(|| {
            Error::Config("the openai provider needs a model name (--model)".into())
        })?;
        let mut cfg = LlmEndpointConfig::new(base, model);
        cfg.temperature = self.temperature;
        cfg.max_retries = self.max_retries;
        cfg.timeout_seconds = self.timeout_seconds;
        if cfg.api_key.is_none() {
            log::warn!("{API_KEY_ENV} is not set; sending requests without a key");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn prompt_spec(&self, base: &Path) -> Result<PromptSpec> {
        match &self.prompt_template {
            Some(p) => {
                let p = resolve(base, p);
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                PromptSpec::new(text, self.max_words)
            }
            None => PromptSpec::new(crate::semantics::prompt::DEFAULT_TEMPLATE, self.max_words),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SilhouetteChoice {
    Exact,
    #[default]
    Subsample,
}

/// Every setting of a run. Relative paths are resolved against a base
/// directory: the config file's directory, or the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Label for reports.
    pub name: Option<String>,
    pub dataset: Option<PathBuf>,
    /// Ground-truth column; `None` when the table has none.
    pub label_column: Option<String>,
    pub delimiter: Option<char>,
    /// JSON object mapping attribute names to their declared values.
    pub domains: Option<PathBuf>,
    pub k: Option<usize>,
    pub alphas: AlphaGrid,
    pub pooling: Pooling,
    pub seed: u64,
    /// Trial seeds for repeated runs.
    pub seeds: Vec<u64>,
    pub final_seed: Option<u64>,
    pub final_clustering: FinalClustering,
    pub silhouette: SilhouetteChoice,
    pub subsample_size: usize,
    pub subsample_seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub cache: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub best_effort: bool,
    pub execution: Execution,
    pub llm: LlmSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        let km = KMeansConfig::default();
        Self {
            name: None,
            dataset: None,
            label_column: Some("class".into()),
            delimiter: None,
            domains: None,
            k: None,
            alphas: AlphaGrid::default(),
            pooling: Pooling::default(),
            seed: 0,
            seeds: crate::eval::default_seeds(),
            final_seed: None,
            final_clustering: FinalClustering::default(),
            silhouette: SilhouetteChoice::default(),
            subsample_size: DEFAULT_SUBSAMPLE_SIZE,
            subsample_seed: DEFAULT_SUBSAMPLE_SEED,
            max_iter: km.max_iter,
            tol: km.tol,
            cache: None,
            bundle: None,
            out: None,
            best_effort: false,
            execution: Execution::default(),
            llm: LlmSettings::default(),
        }
    }
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.root())))
    }

    pub fn silhouette_mode(&self) -> SilhouetteMode {
        match self.silhouette {
            SilhouetteChoice::Exact => SilhouetteMode::Exact,
            SilhouetteChoice::Subsample => SilhouetteMode::Subsample {
                size: self.subsample_size,
                seed: self.subsample_seed,
            },
        }
    }

    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            grid: self.alphas.0.clone(),
            pooling: self.pooling,
            seed: self.seed,
            final_seed: self.final_seed,
            final_clustering: self.final_clustering,
            kmeans: KMeansConfig {
                max_iter: self.max_iter,
                tol: self.tol,
            },
            silhouette: self.silhouette_mode(),
            best_effort: self.best_effort,
            exec: self.execution,
        }
    }

    /// Checks settings that do not need any file.
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Config("tol must be non-negative".into()));
        }
        if self.silhouette == SilhouetteChoice::Subsample && self.subsample_size < 2 {
            return Err(Error::Config("subsample_size must be at least 2".into()));
        }
        if self.llm.parallelism == 0 {
            return Err(Error::Config("llm parallelism must be at least 1".into()));
        }
        if let Some(d) = self.delimiter {
            if !d.is_ascii() {
                return Err(Error::Config(format!("delimiter {d:?} is not ASCII")));
            }
        }
        AlphaGrid::new(self.alphas.0.clone())?;
        Ok(())
    }

    pub fn csv_options(&self, base: &Path) -> Result<CsvOptions> {
        let declared_domains = match &self.domains {
            Some(p) => load_declared_domains(resolve(base, p))?,
            None => BTreeMap::new(),
        };
        Ok(CsvOptions {
            delimiter: self.delimiter.map(|c| c as u8),
            label_column: self.label_column.clone().filter(|s| !s.is_empty()),
            declared_domains,
        })
    }

    /// Loads the dataset. Without an explicit `k` the number of label
    /// classes is used.
    pub fn load_dataset(&self, base: &Path) -> Result<Dataset> {
        let load = || -> Result<Dataset> {
            let path = self
                .dataset
                .as_ref()
                .ok_or_else(|| Error::Config("no dataset given (--dataset)".into()))?;
            let opts = self.csv_options(base)?;
            let ds = load_dataset(resolve(base, path), &opts, self.k.unwrap_or(1))?;
            match (self.k, &ds.labels) {
                (Some(_), _) => Ok(ds),
                (None, Some(l)) => {
                    let k = l.num_classes();
                    Ok(ds.with_k(k))
                }
                (None, None) => Err(Error::Config(
                    "no k given and the dataset has no label column to infer it from".into(),
                )),
            }
        };
        load().stage(Stage::Load)
    }

    pub fn open_bundle(&self, base: &Path) -> Result<Option<Bundle>> {
        self.bundle
            .as_ref()
            .map(|p| Bundle::open(resolve(base, p)))
            .transpose()
            .stage(Stage::Encoding)
    }

    /// The configuration as echoed into output artifacts.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes to JSON")
    }
}

/// Reads `{ "attribute": ["value", ...], ... }`.
pub fn load_declared_domains(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<String>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: invalid domain file: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        let g: AlphaGrid = "0:1:0.1".parse().unwrap();
        assert_eq!(g.0.len(), 11);
        assert_eq!(g.0[3], 0.3);
        assert_eq!(g.0[10], 1.0);
        assert_eq!("0,0.5".parse::<AlphaGrid>().unwrap().0, vec![0.0, 0.5]);
        assert_eq!("0".parse::<AlphaGrid>().unwrap().0, vec![0.0]);
        assert_eq!("0.2:0.2:0.1".parse::<AlphaGrid>().unwrap().0, vec![0.2]);
        for bad in ["", "0:1", "1:0:0.1", "0:1:0", "1.5", "x", "0,,1"] {
            assert!(bad.parse::<AlphaGrid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::from_toml_str(
            r#"
            dataset = "zoo.csv"
            k = 7
            alphas = "0,0.5"
            pooling = "mean"
            seeds = [1, 2]
            silhouette = "exact"

            [llm]
            provider = "openai"
            endpoint = "http://localhost:1"
            model = "m"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.alphas.0, vec![0.0, 0.5]);
        assert_eq!(cfg.pooling, Pooling::Mean);
        assert_eq!(cfg.silhouette_mode(), SilhouetteMode::Exact);
        assert_eq!(cfg.llm.provider, LlmProvider::Openai);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
        let list = RunConfig::from_toml_str("alphas = [0.0, 1.0]").unwrap();
        assert_eq!(list.alphas.0, vec![0.0, 1.0]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("alpha = 0.5").is_err());
        assert!(RunConfig::from_toml_str("alphas = 2.0").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.validate().unwrap();
        cfg.max_iter = 0;
        assert!(cfg.validate().is_err());
    }
}
