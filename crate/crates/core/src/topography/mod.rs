//! Semantic topography over paper embeddings: marginalization in embedding
//! space, clusters, voids and orthogonal isolations on the 2-D map, and
//! tf-idf cluster vocabularies.
//!
//! Reduction and clustering normally come from the embedding service; the
//! [`layout`] module holds the small-corpus fallback and an offline
//! substitute (PCA plus single-linkage over mutual reachability).

pub mod echo;
pub mod layout;
mod map;
mod matrix;
pub mod terms;

pub use map::{
    build_map, detect_isolations, detect_voids, summarize_clusters, OrthogonalIsolation, SemanticCluster, SemanticVoid,
    TopographyMap, TopographyParams,
};
pub use matrix::{marginalization, EmbeddingMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopographyError {
    #[error("embedding matrix has no rows")]
    Empty,
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("row {row} has dimension {got}, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("row {row} contains a non-finite value")]
    NonFinite { row: usize },
    #[error("{ids} ids for {rows} rows")]
    LengthMismatch { ids: usize, rows: usize },
    #[error("duplicate paper id {0}")]
    DuplicateId(alloc::string::String),
}
