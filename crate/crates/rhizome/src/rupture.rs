//! Heterodox re-entry: fetching outside traditions when the graph centralizes.

use futures::future::join_all;
use rhizome_core::{
    dedupe_against, CentralizationReport, DuplicateCluster, IntegrityError, PaperRecord, RankWeights, SourceKind,
};
use serde::{Deserialize, Serialize};

use crate::sources::{ingest_from, FetchQuery, FetchReport, SourceClients};

pub const DEFAULT_TRADITIONS: [&str; 2] = ["degrowth economics", "indigenous ontologies"];
pub const DEFAULT_MAX_REENTRIES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReentryPlan {
    pub zone: String,
    pub traditions: Vec<String>,
    pub sources: Vec<SourceKind>,
    pub per_source_limit: usize,
    pub year_range: Option<(i32, i32)>,
    pub mailto: Option<String>,
    pub dice_threshold: f64,
    pub weights: RankWeights,
}

impl ReentryPlan {
    /// Query for one tradition on the `reentry_index`-th re-entry. Later
    /// re-entries start one page further on so they reach new records.
    pub fn query(&self, tradition: &str, reentry_index: u32) -> FetchQuery {
        FetchQuery {
            zone_text: format!("{} {}", self.zone.trim(), tradition.trim()),
            per_source_limit: self.per_source_limit,
            year_range: self.year_range,
            mailto: self.mailto.clone(),
            page_offset: reentry_index.saturating_sub(1) as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuptureEvent {
    pub reentry_index: u32,
    pub trigger_report: CentralizationReport,
    pub traditions_queried: Vec<String>,
    pub injected_paper_ids: Vec<String>,
    pub fetch_report: FetchReport,
    /// Fetched records dropped as duplicates of the corpus or of each other.
    pub duplicates: Vec<DuplicateCluster>,
    /// Nothing was injected, typically because every fetch failed.
    pub attempted_but_empty: bool,
}

/// A trigger that arrived after the re-entry budget was spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefusedTrigger {
    pub report: CentralizationReport,
    pub reentries_done: u32,
    pub max_reentries: u32,
}

/// Fetches every tradition from every planned source concurrently and
/// returns the records that survive dedupe against `corpus`. Admitted
/// records are tagged heterodox; they bypass the journal ranking and carry
/// the unranked weight. `corpus` is never modified.
pub async fn heterodox_reentry(
    plan: &ReentryPlan,
    corpus: &[PaperRecord],
    clients: &SourceClients,
    reentry_index: u32,
    trigger_report: CentralizationReport,
) -> Result<(RuptureEvent, Vec<PaperRecord>), IntegrityError> {
    let fetches = join_all(plan.traditions.iter().map(|tradition| {
        let query = plan.query(tradition, reentry_index);
        async move { ingest_from(&query, &plan.sources, clients, Some(SourceKind::HeterodoxReentry)).await }
    }))
    .await;

    let mut fetch_report = FetchReport::default();
    let mut fetched = Vec::new();
    for (records, report) in fetches {
        fetched.extend(records);
        fetch_report.merge(report);
    }
    fetched.sort_by(|a, b| a.id.cmp(&b.id));

    let outcome = dedupe_against(corpus, fetched, plan.dice_threshold)?;
    let mut injected = outcome.corpus;
    for paper in &mut injected {
        paper.source = SourceKind::HeterodoxReentry;
        paper.abs_rank = None;
        paper.heterodox_flag = true;
        paper.rigor_weight = plan.weights.unranked;
    }
    injected.sort_by(|a, b| a.id.cmp(&b.id));

    let event = RuptureEvent {
        reentry_index,
        trigger_report,
        traditions_queried: plan.traditions.clone(),
        injected_paper_ids: injected.iter().map(|p| p.id.clone()).collect(),
        fetch_report,
        duplicates: outcome.clusters,
        attempted_but_empty: injected.is_empty(),
    };
    Ok((event, injected))
}
