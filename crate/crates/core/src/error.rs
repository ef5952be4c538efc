use std::fmt;
use std::path::PathBuf;

/// Pipeline stage an error surfaced in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Enrichment,
    Encoding,
    Fusion,
    Clustering,
    Evaluation,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::Enrichment => "enrichment",
            Stage::Encoding => "encoding",
            Stage::Fusion => "fusion",
            Stage::Clustering => "clustering",
            Stage::Evaluation => "evaluation",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed token bundle: {0}")]
    BundleFormat(String),

    #[error("missing coverage: {0}")]
    Coverage(String),

    #[error("every token is flagged special; nothing to pool")]
    NoContent,

    #[error("transport error: {0}")]
    Transport(String),

    #[error("model returned an empty description")]
    EmptyDescription,

    #[error("every alpha candidate produced a single-cluster partition")]
    Selection,

    #[error("enrichment aborted after {completed} of {total} values ({remaining} remaining): {source}")]
    Enrichment {
        completed: usize,
        remaining: usize,
        total: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage} stage: {source}")]
    InStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags the error with the stage it came from, unless already tagged.
    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            e @ Error::InStage { .. } => e,
            other => Error::InStage {
                stage,
                source: Box::new(other),
            },
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::InStage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The innermost error with stage tags stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::InStage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
