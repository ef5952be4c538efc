//! From descriptions to per-object matrices: token pooling, semantic
//! concatenation and one-hot anchoring.

pub mod assemble;
pub mod bundle;
pub mod pooling;
pub mod stub;
pub mod token;

pub use assemble::{
    assemble_semantic_matrix, one_hot_matrix, pool_vocabulary, AnchorMatrix, PooledVocabulary,
    SemanticMatrix,
};
pub use bundle::{Bundle, Manifest, ManifestEntry, MemoryTokens, TokenSource};
pub use pooling::{
    attention_pool, attention_weights, cls_pool, mean_pool, pool, token_scores, Pooling,
    ValueEmbedding,
};
pub use stub::{export_stub_bundle, StubEncoder};
pub use token::TokenMatrix;
