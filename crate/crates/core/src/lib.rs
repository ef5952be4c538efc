//! Categorical clustering with value-level semantic enrichment.
//!
//! The pipeline has five stages: load a categorical table, describe each
//! distinct attribute value once, pool the encoded descriptions into value
//! embeddings, fuse them with a one-hot anchor, and cluster while searching
//! the fusion weight by silhouette.

pub mod config;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod matrix;
pub mod par;
pub mod result;
pub mod scaling;
pub mod semantics;

pub use error::{Error, Result, Stage};
pub use matrix::Matrix;
pub use par::Execution;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
