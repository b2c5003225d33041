//! Pure algorithms behind the rhizome literature-mapping pipeline.
//!
//! Everything in this crate works on owned, in-memory values and needs only
//! an allocator: record normalization, DOI/trigram deduplication, journal
//! ranking, citation shadows, lens vocabularies, convergent-anomaly grouping,
//! hub centralization, the relation taxonomy and the 2-D topography math.
//! Network clients, LLM calls, files and the event stream live in the `rhizome`
//! crate on top of this one.

#![no_std]

extern crate alloc;

pub mod integrity;
pub mod lens;
pub mod metrics;
pub mod paper;
pub mod resonance;
pub mod synthesis;
pub mod text;
pub mod topography;

pub use integrity::{
    assign_ranks, build_citation_shadow, dedupe, dedupe_against, dice, normalize_doi, AbsRankTable, Anchor,
    CitationShadow, DedupeOutcome, DuplicateCluster, IntegrityError, MatchBasis, NormalizedDoi, RankWeights,
    TrigramSet,
};
pub use lens::{
    prefilter_signals, validate_lens_set, vocabulary_jaccard, LensReading, LensSetRules, LensSetViolation,
    PaperSignals, SignalHit, TheoreticalLens,
};
pub use metrics::{aggregate_metrics, AgentTotals, CallRecord, RunMetrics, TokenUsage};
pub use paper::{normalize_record, AbsRank, PaperRecord, RecordRejection, SourceKind, SourceRecord};
pub use resonance::{centralization_risk, detect_anomalies, CentralizationReport, ConvergentAnomaly};
pub use synthesis::{
    candidate_pairs, Assemblage, EdgeClass, EdgeError, EdgeSubtype, GraphNode, KnowledgeGraph, RelationEdge, RenderHint,
};
pub use topography::{
    marginalization, EmbeddingMatrix, OrthogonalIsolation, SemanticCluster, SemanticVoid, TopographyError,
    TopographyMap, TopographyParams,
};
