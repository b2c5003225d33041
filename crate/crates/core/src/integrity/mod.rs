//! Corpus integrity: DOI normalization, trigram-Dice deduplication, journal
//! ranking and the in-corpus citation shadow.

mod dedupe;
mod dice;
mod doi;
mod ranks;
mod shadow;

pub use dedupe::{dedupe, dedupe_against, DedupeOutcome, DuplicateCluster, MatchBasis, DEFAULT_DICE_THRESHOLD};
pub use dice::{dice, TrigramSet};
pub use doi::{normalize_doi, NormalizedDoi};
pub use ranks::{assign_ranks, AbsRankTable, RankWeights};
pub use shadow::{build_citation_shadow, citation_links, Anchor, CitationShadow};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrityError {
    #[error("dice threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("rank weight for {rank} must lie in [0, 1], got {value}")]
    InvalidWeight { rank: &'static str, value: f64 },
}
