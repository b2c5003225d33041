use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::{execute_run, EventLog, FieldError, PhaseId, RunConfig, Services};
use crate::cartography::Cartography;
use crate::topography::TopographyOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub run_id: String,
    pub zone: String,
    pub status: RunStatus,
    pub phase: Option<PhaseId>,
    pub error: Option<String>,
    pub last_sequence: u64,
    pub cartography_ready: bool,
    pub topography_ready: bool,
}

struct HandleState {
    status: RunStatus,
    phase: Option<PhaseId>,
    error: Option<String>,
    cartography: Option<Arc<Cartography>>,
    topography: TopographyOutcome,
}

/// Shared view of one run: its event log and whatever output exists so far.
pub struct RunHandle {
    pub run_id: String,
    pub zone: String,
    pub events: EventLog,
    state: RwLock<HandleState>,
}

impl RunHandle {
    pub fn new(run_id: &str, zone: &str) -> Self {
        RunHandle {
            run_id: run_id.to_string(),
            zone: zone.to_string(),
            events: EventLog::new(run_id),
            state: RwLock::new(HandleState {
                status: RunStatus::Running,
                phase: None,
                error: None,
                cartography: None,
                topography: TopographyOutcome::Pending,
            }),
        }
    }

    pub(crate) fn set_phase(&self, phase: PhaseId) {
        self.state.write().expect("run state").phase = Some(phase);
    }

    pub(crate) fn set_cartography(&self, cartography: Cartography) {
        let mut state = self.state.write().expect("run state");
        state.topography = cartography.topography.clone();
        state.cartography = Some(Arc::new(cartography));
    }

    pub(crate) fn finish(&self, error: Option<String>) {
        let mut state = self.state.write().expect("run state");
        state.status = if error.is_some() { RunStatus::Failed } else { RunStatus::Completed };
        state.error = error;
    }

    pub fn status(&self) -> RunStatus {
        self.state.read().expect("run state").status
    }

    pub fn cartography(&self) -> Option<Arc<Cartography>> {
        self.state.read().expect("run state").cartography.clone()
    }

    /// `None` while the topography is still pending.
    pub fn topography(&self) -> Option<TopographyOutcome> {
        let state = self.state.read().expect("run state");
        (state.topography != TopographyOutcome::Pending).then(|| state.topography.clone())
    }

    pub fn snapshot(&self) -> RunSnapshot {
        let state = self.state.read().expect("run state");
        RunSnapshot {
            run_id: self.run_id.clone(),
            zone: self.zone.clone(),
            status: state.status,
            phase: state.phase,
            error: state.error.clone(),
            last_sequence: self.events.last_sequence(),
            cartography_ready: state.cartography.is_some(),
            topography_ready: state.topography != TopographyOutcome::Pending,
        }
    }
}

pub type ServiceFactory = Arc<dyn Fn(&RunConfig) -> Result<Services, String> + Send + Sync>;

/// In-memory table of runs started in this process.
pub struct RunRegistry {
    runs: RwLock<BTreeMap<String, Arc<RunHandle>>>,
    factory: ServiceFactory,
}

impl Default for RunRegistry {
    fn default() -> Self {
        Self::with_factory(Arc::new(Services::from_config))
    }
}

impl RunRegistry {
    pub fn with_factory(factory: ServiceFactory) -> Self {
        RunRegistry { runs: RwLock::new(BTreeMap::new()), factory }
    }

    /// Validates the config, registers the run and starts it on the tokio
    /// runtime. Nothing is registered when validation fails.
    pub fn start_run(&self, config: RunConfig) -> Result<Arc<RunHandle>, Vec<FieldError>> {
        config.validate()?;
        let services =
            (self.factory)(&config).map_err(|reason| vec![FieldError { field: "services".into(), reason }])?;
        let run_id = uuid::Uuid::new_v4().to_string();
        let handle = Arc::new(RunHandle::new(&run_id, &config.zone));
        self.runs.write().expect("registry").insert(run_id, handle.clone());
        let running = handle.clone();
        tokio::spawn(async move { execute_run(&running, config, services).await });
        Ok(handle)
    }

    pub fn get(&self, run_id: &str) -> Option<Arc<RunHandle>> {
        self.runs.read().expect("registry").get(run_id).cloned()
    }

    pub fn list(&self) -> Vec<RunSnapshot> {
        self.runs.read().expect("registry").values().map(|h| h.snapshot()).collect()
    }
}
