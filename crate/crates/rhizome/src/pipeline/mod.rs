//! The seven-phase run: configuration, services, execution, events and the
//! registry of live runs.

mod config;
pub mod events;
mod registry;
mod run;

use std::fmt;
use std::sync::Arc;

use rhizome_core::AbsRankTable;
use serde::{Deserialize, Serialize};

use crate::abs::load_abs_table;
use crate::agent::{FixtureProvider, LlmProvider, OllamaProvider, ProviderKind, RecordingProvider};
use crate::sources::{FixtureTransport, HttpTransport, RecordingTransport, RetryPolicy, Transport};

pub use config::{FieldError, RunConfig, SourceConfig};
pub use events::{EventKind, EventLog, PipelineEvent, StreamError};
pub use registry::{RunHandle, RunRegistry, RunSnapshot, RunStatus, ServiceFactory};
pub use run::{execute_run, run_inline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhaseId {
    #[serde(rename = "P1-ontological-setup")]
    P1OntologicalSetup,
    #[serde(rename = "P2-corpus-ingestion")]
    P2CorpusIngestion,
    #[serde(rename = "P3-parallel-ingestion")]
    P3ParallelIngestion,
    #[serde(rename = "P4-resonance-rupture")]
    P4ResonanceRupture,
    #[serde(rename = "P5-synthesis-mapping")]
    P5SynthesisMapping,
    #[serde(rename = "P6-cartographic-output")]
    P6CartographicOutput,
    #[serde(rename = "P7-semantic-topography")]
    P7SemanticTopography,
}

impl PhaseId {
    pub const ALL: [PhaseId; 7] = [
        PhaseId::P1OntologicalSetup,
        PhaseId::P2CorpusIngestion,
        PhaseId::P3ParallelIngestion,
        PhaseId::P4ResonanceRupture,
        PhaseId::P5SynthesisMapping,
        PhaseId::P6CartographicOutput,
        PhaseId::P7SemanticTopography,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseId::P1OntologicalSetup => "P1-ontological-setup",
            PhaseId::P2CorpusIngestion => "P2-corpus-ingestion",
            PhaseId::P3ParallelIngestion => "P3-parallel-ingestion",
            PhaseId::P4ResonanceRupture => "P4-resonance-rupture",
            PhaseId::P5SynthesisMapping => "P5-synthesis-mapping",
            PhaseId::P6CartographicOutput => "P6-cartographic-output",
            PhaseId::P7SemanticTopography => "P7-semantic-topography",
        }
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Agents every run declares; lens agents are added once lenses exist.
pub const BASE_ROSTER: [&str; 10] = [
    "epistemology",
    "researcher-openalex",
    "researcher-arxiv",
    "deduplication",
    "abs-evaluator",
    "citation-mapper",
    "resonance-detector",
    "rupture-protocol",
    "assemblage-builder",
    "rhizome-builder",
];

/// The external collaborators of one run.
#[derive(Clone)]
pub struct Services {
    pub provider: Arc<dyn LlmProvider>,
    pub transport: Arc<dyn Transport>,
    pub retry: RetryPolicy,
    pub abs_table: AbsRankTable,
}

impl Services {
    pub fn from_config(config: &RunConfig) -> Result<Services, String> {
        let mut provider: Arc<dyn LlmProvider> = match config.provider.kind {
            ProviderKind::Fixture => {
                let path = config.provider.fixture_path.clone().ok_or("fixture provider needs a path")?;
                Arc::new(FixtureProvider::new(path))
            }
            ProviderKind::LiveHttp => {
                let endpoint = config.provider.endpoint.as_deref().ok_or("live provider needs an endpoint")?;
                Arc::new(OllamaProvider::new(endpoint, config.provider.model_name.as_deref()))
            }
        };
        let (mut transport, retry): (Arc<dyn Transport>, RetryPolicy) = match &config.source_data {
            SourceConfig::Fixture { dir } => {
                let t = FixtureTransport::load(dir).map_err(|e| format!("source fixtures {}: {e}", dir.display()))?;
                (Arc::new(t), RetryPolicy::immediate())
            }
            SourceConfig::Live => (Arc::new(HttpTransport::new(config.mailto.clone())), RetryPolicy::default()),
        };
        if let Some(dir) = &config.record {
            if config.provider.kind == ProviderKind::LiveHttp {
                provider = Arc::new(RecordingProvider::new(provider, dir.join("llm")));
            }
            if config.source_data == SourceConfig::Live {
                transport = Arc::new(RecordingTransport::new(transport, dir.join("sources")));
            }
        }
        let abs_table = match &config.abs_table {
            Some(path) => load_abs_table(path).map_err(|e| format!("journal table {}: {e}", path.display()))?,
            None => AbsRankTable::new(),
        };
        Ok(Services { provider, transport, retry, abs_table })
    }
}
