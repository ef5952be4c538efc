//! View normalization, weighted fusion, weight selection by silhouette and
//! k-means.

pub mod fuse;
pub mod kmeans;
pub mod normalize;
pub mod pipeline;
pub mod search;
pub mod silhouette;

pub use fuse::{fuse, FusedRepresentation};
pub use kmeans::{kmeans, KMeansConfig, KMeansResult};
pub use normalize::zscore_normalize;
pub use pipeline::{
    build_views, cluster_views, run_arise, ClusterParams, ClusterResult, FinalClustering, Views,
};
pub use search::{
    default_grid, select_alpha, AlphaCandidate, AlphaSearch, AlphaSearchTrace, SearchOptions,
};
pub use silhouette::{silhouette, silhouette_exact, silhouette_samples, Silhouette, SilhouetteMode};
