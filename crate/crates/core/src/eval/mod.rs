//! External validation metrics and repeated-trial evaluation.

pub mod metrics;
pub mod suite;
pub mod trials;

use std::path::Path;

use crate::error::{Error, Result};

pub use metrics::{acc, ari, nmi, score, Contingency, Scores};
pub use suite::{parse_suite, run_suite, SuiteReport, SuiteRow};
pub use trials::{default_seeds, run_trials, Aggregate, MetricsReport, TrialRecord};

/// Reads one column of a CSV file as interned class ids in first-appearance
/// order. Without a column name the file's only column is used, or else the
/// column named `class`.
pub fn read_label_column(path: impl AsRef<Path>, column: Option<&str>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        .clone();
    let idx = match column {
        Some(c) => headers.iter().position(|h| h.trim() == c).ok_or_else(|| {
            Error::Config(format!("{}: no column named {c:?}", path.display()))
        })?,
        None if headers.len() == 1 => 0,
        None => headers.iter().position(|h| h.trim() == "class").ok_or_else(|| {
            Error::Config(format!(
                "{} has {} columns and none is named \"class\"; name the label column",
                path.display(),
                headers.len()
            ))
        })?,
    };
    let mut raw = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 2,
            message: e.to_string(),
        })?;
        let v = rec.get(idx).ok_or_else(|| Error::Parse {
            row: i + 2,
            message: "row is missing the label column".into(),
        })?;
        raw.push(v.trim().to_string());
    }
    Ok(crate::dataset::Labels::from_raw(&raw).ids)
}
