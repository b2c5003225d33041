use std::path::PathBuf;

use rhizome_core::resonance::{DEFAULT_CENTRALIZATION_THRESHOLD, DEFAULT_K_FRACTION};
use rhizome_core::{LensSetRules, RankWeights, SourceKind, TopographyParams};
use serde::{Deserialize, Serialize};

use crate::agent::{ProviderConfig, DEFAULT_MAX_IN_FLIGHT};
use crate::lenses::{DEFAULT_LENS_ATTEMPTS, DEFAULT_TOP_M};
use crate::rupture::{DEFAULT_MAX_REENTRIES, DEFAULT_TRADITIONS};
use crate::sources::DEFAULT_HARD_CAP;
use crate::topography::EmbeddingConfig;

/// Where source responses come from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SourceConfig {
    #[default]
    Live,
    Fixture {
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub zone: String,
    pub per_source_limit: usize,
    pub hard_cap: usize,
    pub sources: Vec<SourceKind>,
    pub year_range: Option<(i32, i32)>,
    pub mailto: Option<String>,

    pub lens_rules: LensSetRules,
    pub lens_attempts: u32,
    /// Papers per lens that get an agent reading; `None` reads all.
    pub top_m: Option<usize>,

    pub dice_threshold: f64,
    pub anchor_count: usize,
    pub centralization_threshold: f64,
    pub k_fraction: f64,
    pub traditions: Vec<String>,
    pub max_reentries: u32,
    /// Per-source limit for each tradition query.
    pub reentry_limit: usize,

    pub pair_cap: usize,
    pub edge_batch_size: usize,

    pub topography: TopographyParams,
    pub seed: u64,

    pub provider: ProviderConfig,
    pub max_in_flight: usize,
    pub source_data: SourceConfig,
    pub abs_table: Option<PathBuf>,
    pub rank_weights: RankWeights,
    pub embeddings: EmbeddingConfig,
    /// Also save every live response under this directory in fixture format.
    pub record: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            zone: String::new(),
            per_source_limit: 25,
            hard_cap: DEFAULT_HARD_CAP,
            sources: vec![SourceKind::OpenAlex, SourceKind::Arxiv],
            year_range: None,
            mailto: None,
            lens_rules: LensSetRules::default(),
            lens_attempts: DEFAULT_LENS_ATTEMPTS,
            top_m: Some(DEFAULT_TOP_M),
            dice_threshold: rhizome_core::integrity::DEFAULT_DICE_THRESHOLD,
            anchor_count: 10,
            centralization_threshold: DEFAULT_CENTRALIZATION_THRESHOLD,
            k_fraction: DEFAULT_K_FRACTION,
            traditions: DEFAULT_TRADITIONS.iter().map(|t| t.to_string()).collect(),
            max_reentries: DEFAULT_MAX_REENTRIES,
            reentry_limit: 5,
            pair_cap: 200,
            edge_batch_size: 8,
            topography: TopographyParams::default(),
            seed: 0,
            provider: ProviderConfig {
                kind: crate::agent::ProviderKind::LiveHttp,
                endpoint: Some("http://localhost:11434".into()),
                model_name: None,
                fixture_path: None,
            },
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            source_data: SourceConfig::Live,
            abs_table: None,
            rank_weights: RankWeights::default(),
            embeddings: EmbeddingConfig::Local,
            record: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

fn unit(errors: &mut Vec<FieldError>, field: &str, x: f64, open_low: bool) {
    let ok = x.is_finite() && x <= 1.0 && if open_low { x > 0.0 } else { x >= 0.0 };
    if !ok {
        let range = if open_low { "(0, 1]" } else { "[0, 1]" };
        errors.push(FieldError { field: field.into(), reason: format!("{x} is outside {range}") });
    }
}

impl RunConfig {
    pub fn fixture(zone: &str, fixture_dir: impl Into<PathBuf>) -> Self {
        let dir = fixture_dir.into();
        RunConfig {
            zone: zone.to_string(),
            provider: ProviderConfig::fixture(dir.join("llm")),
            source_data: SourceConfig::Fixture { dir: dir.join("sources") },
            abs_table: Some(dir.join("abs.csv")).filter(|p| p.exists()),
            ..Default::default()
        }
    }

    /// Every problem at once, keyed by field name.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errors = Vec::new();
        let mut err = |field: &str, reason: String| errors.push(FieldError { field: field.into(), reason });
        if self.zone.trim().is_empty() {
            err("zone", "must not be empty".into());
        }
        if self.per_source_limit > self.hard_cap {
            err("per_source_limit", format!("{} exceeds the hard cap {}", self.per_source_limit, self.hard_cap));
        }
        if self.reentry_limit > self.hard_cap {
            err("reentry_limit", format!("{} exceeds the hard cap {}", self.reentry_limit, self.hard_cap));
        }
        if self.sources.is_empty() || self.sources.contains(&SourceKind::HeterodoxReentry) {
            err("sources", "must list open-alex and/or arxiv".into());
        }
        if let Some((a, b)) = self.year_range {
            if a > b {
                err("year_range", format!("{a} is after {b}"));
            }
        }
        let r = &self.lens_rules;
        if r.min_lenses == 0 || r.min_lenses > r.max_lenses {
            err("lens_rules", format!("lens count range {}..={} is empty", r.min_lenses, r.max_lenses));
        }
        if r.min_vocabulary == 0 || r.min_vocabulary > r.max_vocabulary {
            err("lens_rules", format!("vocabulary range {}..={} is empty", r.min_vocabulary, r.max_vocabulary));
        }
        if self.lens_attempts == 0 {
            err("lens_attempts", "must be at least 1".into());
        }
        if self.top_m == Some(0) {
            err("top_m", "must be at least 1 (omit it to read every paper)".into());
        }
        if self.anchor_count == 0 {
            err("anchor_count", "must be at least 1".into());
        }
        if self.edge_batch_size == 0 {
            err("edge_batch_size", "must be at least 1".into());
        }
        if self.max_in_flight == 0 {
            err("max_in_flight", "must be at least 1".into());
        }
        if self.traditions.iter().any(|t| t.trim().is_empty()) {
            err("traditions", "entries must be non-empty".into());
        }
        if let Err(e) = self.provider.validate() {
            err("provider", e);
        }
        if let Err(e) = self.rank_weights.validate() {
            err("rank_weights", e.to_string());
        }
        let t = &self.topography;
        if t.min_cluster_size < 2 {
            err("topography.min_cluster_size", "must be at least 2".into());
        }
        if !(t.void_gap_ratio.is_finite() && t.void_gap_ratio > 0.0) {
            err("topography.void_gap_ratio", "must be positive".into());
        }
        if let EmbeddingConfig::Sidecar { url, .. } = &self.embeddings {
            if url.trim().is_empty() {
                err("embeddings.url", "must not be empty".into());
            }
        }
        unit(&mut errors, "lens_rules.max_jaccard", self.lens_rules.max_jaccard, false);
        unit(&mut errors, "dice_threshold", self.dice_threshold, true);
        unit(&mut errors, "centralization_threshold", self.centralization_threshold, false);
        unit(&mut errors, "k_fraction", self.k_fraction, true);
        unit(&mut errors, "topography.isolation_jaccard", self.topography.isolation_jaccard, false);
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}
