//! The run's output document.

use std::collections::BTreeMap;
use std::path::Path;

use rhizome_core::{
    AgentTotals, Assemblage, CallRecord, CentralizationReport, CitationShadow, ConvergentAnomaly, DuplicateCluster,
    KnowledgeGraph, LensReading, PaperRecord, RunMetrics, SourceKind, TheoreticalLens,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::pipeline::{PhaseId, RunConfig};
use crate::rupture::{RefusedTrigger, RuptureEvent};
use crate::sources::FetchReport;
use crate::synthesis::SkippedPair;
use crate::topography::TopographyOutcome;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Keys dropped by [`Cartography::canonical`]: they vary between otherwise
/// identical runs.
pub const VOLATILE_KEYS: [&str; 3] = ["run_id", "created_at", "latency_ms"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub total: usize,
    pub per_source: BTreeMap<SourceKind, usize>,
    pub heterodox: usize,
    pub papers: Vec<PaperRecord>,
    pub duplicates: Vec<DuplicateCluster>,
    pub fetch_report: FetchReport,
}

impl CorpusSummary {
    pub fn new(papers: Vec<PaperRecord>, duplicates: Vec<DuplicateCluster>, fetch_report: FetchReport) -> Self {
        let mut per_source = BTreeMap::new();
        for p in &papers {
            *per_source.entry(p.source).or_insert(0) += 1;
        }
        CorpusSummary {
            total: papers.len(),
            per_source,
            heterodox: papers.iter().filter(|p| p.heterodox_flag).count(),
            papers,
            duplicates,
            fetch_report,
        }
    }
}

/// One centralization measurement and where it was taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralizationCheck {
    pub phase: PhaseId,
    /// `citation-graph` in P4, `relation-graph-batch-N` in P5.
    pub graph: String,
    pub report: CentralizationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub calls: Vec<CallRecord>,
    pub per_agent: BTreeMap<String, AgentTotals>,
    pub totals: AgentTotals,
}

impl From<(Vec<CallRecord>, RunMetrics)> for RunMetadata {
    fn from((calls, metrics): (Vec<CallRecord>, RunMetrics)) -> Self {
        RunMetadata { calls, per_agent: metrics.per_agent, totals: metrics.totals }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CartographyError {
    #[error("metadata totals disagree with the per-call records: {0}")]
    TotalsMismatch(String),
    #[error("graph invariant broken: {0}")]
    Graph(String),
    #[error("writing {path}: {reason}")]
    Write { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cartography {
    pub schema_version: String,
    pub run_id: String,
    pub created_at: String,
    pub zone: String,
    pub seed: u64,
    pub config: RunConfig,
    pub agent_roster: Vec<String>,
    pub lenses: Vec<TheoreticalLens>,
    pub corpus: CorpusSummary,
    pub readings: Vec<LensReading>,
    pub citation_shadow: CitationShadow,
    pub anomalies: Vec<ConvergentAnomaly>,
    pub centralization_checks: Vec<CentralizationCheck>,
    pub ruptures: Vec<RuptureEvent>,
    pub refused_triggers: Vec<RefusedTrigger>,
    pub graph: KnowledgeGraph,
    pub skipped_pairs: Vec<SkippedPair>,
    pub assemblages: Vec<Assemblage>,
    pub topography: TopographyOutcome,
    pub metadata: RunMetadata,
}

fn strip_volatile(value: &mut Value) {
    match value {
        Value::Object(map) => {
            for key in VOLATILE_KEYS {
                map.remove(key);
            }
            map.values_mut().for_each(strip_volatile);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

impl Cartography {
    /// Re-sums the per-call records by hand and compares them with the stored
    /// per-agent and grand totals. Also re-checks the graph invariants.
    pub fn cross_check(&self) -> Result<(), CartographyError> {
        let mut per_agent: BTreeMap<&str, (u64, u64, u64, u64)> = BTreeMap::new();
        for c in &self.metadata.calls {
            let e = per_agent.entry(c.agent_name.as_str()).or_default();
            e.0 += 1;
            e.1 += c.usage.input_tokens;
            e.2 += c.usage.output_tokens;
            e.3 += c.latency_ms;
        }
        let stored: BTreeMap<&str, (u64, u64, u64, u64)> = self
            .metadata
            .per_agent
            .iter()
            .map(|(k, t)| (k.as_str(), (t.calls, t.input_tokens, t.output_tokens, t.latency_ms)))
            .collect();
        if stored != per_agent {
            return Err(CartographyError::TotalsMismatch("per-agent sums".into()));
        }
        let grand = per_agent.values().fold((0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
        let t = &self.metadata.totals;
        if grand != (t.calls, t.input_tokens, t.output_tokens, t.latency_ms) {
            return Err(CartographyError::TotalsMismatch(format!(
                "grand totals {:?} vs records {grand:?}",
                (t.calls, t.input_tokens, t.output_tokens, t.latency_ms)
            )));
        }
        self.graph.validate().map_err(|e| CartographyError::Graph(e.to_string()))
    }

    /// The document minus run id, creation time and every latency figure.
    pub fn canonical(&self) -> Value {
        let mut value = serde_json::to_value(self).expect("cartography serializes");
        strip_volatile(&mut value);
        value
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cartography serializes")
    }

    pub fn write(&self, path: &Path) -> Result<(), CartographyError> {
        let fail =
            |e: std::io::Error| CartographyError::Write { path: path.display().to_string(), reason: e.to_string() };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(fail)?;
        }
        let tmp = path.with_extension("json.partial");
        std::fs::write(&tmp, self.to_json()).map_err(fail)?;
        std::fs::rename(&tmp, path).map_err(fail)
    }
}
