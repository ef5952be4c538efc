//! Value-level description generation and caching.

pub mod cache;
pub mod enrich;
pub mod llm;
pub mod prompt;

pub use cache::{DescriptionCache, DescriptionRecord};
pub use enrich::{enrich_vocabulary, EnrichFailure, EnrichOptions, EnrichReport};
pub use llm::{
    describe_value, ChatClient, DescriptionSource, LlmEndpointConfig, StubSource, ValueQuery,
};
pub use prompt::{build_prompt, prompt_hash, PromptSpec};

use crate::error::{Error, Result};

/// Fraction of per-cell queries saved by querying each distinct value once:
/// `1 - vocab_size / (n * m)`.
///
/// The result is not clamped; a vocabulary larger than `n * m` gives a
/// negative ratio.
pub fn amortization_ratio(n: usize, m: usize, vocab_size: usize) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::Contract(format!(
            "amortization needs n >= 1 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    if vocab_size == 0 {
        return Err(Error::Contract("vocabulary size must be positive".into()));
    }
    Ok(1.0 - vocab_size as f64 / (n as f64 * m as f64))
}
