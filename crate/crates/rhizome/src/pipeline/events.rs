//! Per-run event log: gapless sequence numbers, a bounded replay buffer and
//! fan-out to live subscribers.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use futures::stream::{self, BoxStream, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use super::PhaseId;

pub const DEFAULT_REPLAY_CAPACITY: usize = 10_000;
/// Events a live subscriber may fall behind before it is dropped.
pub const DEFAULT_SUBSCRIBER_QUEUE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RunStarted,
    PhaseStarted,
    LensesGenerated,
    PapersFetched,
    DuplicatesRemoved,
    LensReadingDone,
    AnomalyDetected,
    RuptureTriggered,
    ReentryCompleted,
    EdgeClassified,
    AssemblageBuilt,
    CartographyReady,
    TopographyReady,
    PhaseCompleted,
    RunCompleted,
    RunFailed,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::RunStarted => "run_started",
            EventKind::PhaseStarted => "phase_started",
            EventKind::LensesGenerated => "lenses_generated",
            EventKind::PapersFetched => "papers_fetched",
            EventKind::DuplicatesRemoved => "duplicates_removed",
            EventKind::LensReadingDone => "lens_reading_done",
            EventKind::AnomalyDetected => "anomaly_detected",
            EventKind::RuptureTriggered => "rupture_triggered",
            EventKind::ReentryCompleted => "reentry_completed",
            EventKind::EdgeClassified => "edge_classified",
            EventKind::AssemblageBuilt => "assemblage_built",
            EventKind::CartographyReady => "cartography_ready",
            EventKind::TopographyReady => "topography_ready",
            EventKind::PhaseCompleted => "phase_completed",
            EventKind::RunCompleted => "run_completed",
            EventKind::RunFailed => "run_failed",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, EventKind::RunCompleted | EventKind::RunFailed)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineEvent {
    pub run_id: String,
    pub sequence: u64,
    pub phase: PhaseId,
    pub kind: EventKind,
    /// Set on events emitted inside a heterodox re-entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reentry: Option<u32>,
    pub payload: serde_json::Value,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("subscriber fell {missed} events behind and was dropped")]
    Dropped { missed: u64 },
}

struct LogState {
    buffer: VecDeque<PipelineEvent>,
    next_sequence: u64,
    finished: bool,
}

pub struct EventLog {
    run_id: String,
    capacity: usize,
    state: Mutex<LogState>,
    live: broadcast::Sender<PipelineEvent>,
}

impl EventLog {
    pub fn new(run_id: &str) -> Self {
        Self::with_capacity(run_id, DEFAULT_REPLAY_CAPACITY, DEFAULT_SUBSCRIBER_QUEUE)
    }

    pub fn with_capacity(run_id: &str, replay: usize, subscriber_queue: usize) -> Self {
        let (live, _) = broadcast::channel(subscriber_queue.max(1));
        EventLog {
            run_id: run_id.to_string(),
            capacity: replay.max(1),
            state: Mutex::new(LogState { buffer: VecDeque::new(), next_sequence: 1, finished: false }),
            live,
        }
    }

    /// Appends an event. Sequence assignment, buffering and fan-out happen
    /// under one lock, so every subscriber sees the same gapless order.
    /// Events after the terminal one are discarded.
    pub fn emit(
        &self,
        phase: PhaseId,
        kind: EventKind,
        reentry: Option<u32>,
        payload: serde_json::Value,
    ) -> Option<PipelineEvent> {
        let mut state = self.state.lock().expect("event log lock");
        if state.finished {
            return None;
        }
        let event = PipelineEvent {
            run_id: self.run_id.clone(),
            sequence: state.next_sequence,
            phase,
            kind,
            reentry,
            payload,
            timestamp: Utc::now(),
        };
        state.next_sequence += 1;
        state.finished = kind.is_terminal();
        if state.buffer.len() == self.capacity {
            state.buffer.pop_front();
        }
        state.buffer.push_back(event.clone());
        // no receivers is fine
        let _ = self.live.send(event.clone());
        Some(event)
    }

    pub fn last_sequence(&self) -> u64 {
        self.state.lock().expect("event log lock").next_sequence - 1
    }

    pub fn snapshot(&self) -> Vec<PipelineEvent> {
        self.state.lock().expect("event log lock").buffer.iter().cloned().collect()
    }

    /// Buffered events with `sequence >= from`, then live events until the
    /// terminal one. A subscriber that overflows its queue gets one
    /// `Dropped` item and the stream ends.
    pub fn subscribe(&self, from: u64) -> BoxStream<'static, Result<PipelineEvent, StreamError>> {
        let (replay, receiver) = {
            let state = self.state.lock().expect("event log lock");
            let replay: Vec<PipelineEvent> = state.buffer.iter().filter(|e| e.sequence >= from).cloned().collect();
            let receiver = (!state.finished).then(|| self.live.subscribe());
            (replay, receiver)
        };
        let next = replay.last().map_or(from, |e| e.sequence + 1);
        let replay = stream::iter(replay.into_iter().map(Ok));
        let Some(receiver) = receiver else {
            return replay.boxed();
        };
        let live = stream::unfold(Some((receiver, next)), |state| async move {
            let (mut rx, next) = state?;
            loop {
                match rx.recv().await {
                    Ok(event) if event.sequence < next => continue,
                    Ok(event) => {
                        let done = event.kind.is_terminal();
                        let next = event.sequence + 1;
                        return Some((Ok(event), (!done).then_some((rx, next))));
                    }
                    Err(broadcast::error::RecvError::Lagged(missed)) => {
                        return Some((Err(StreamError::Dropped { missed }), None));
                    }
                    Err(broadcast::error::RecvError::Closed) => return None,
                }
            }
        });
        replay.chain(live).boxed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn emit_n(log: &EventLog, n: usize) {
        for _ in 0..n {
            log.emit(PhaseId::P2CorpusIngestion, EventKind::PapersFetched, None, json!({}));
        }
    }

    #[tokio::test]
    async fn replay_then_live_then_end() {
        let log = std::sync::Arc::new(EventLog::new("r"));
        emit_n(&log, 3);
        let sub = log.subscribe(2);
        let writer = log.clone();
        let handle = tokio::spawn(async move {
            emit_n(&writer, 2);
            writer.emit(PhaseId::P7SemanticTopography, EventKind::RunCompleted, None, json!({}));
            emit_n(&writer, 1);
        });
        let seen: Vec<u64> = sub.map(|e| e.unwrap().sequence).collect().await;
        handle.await.unwrap();
        assert_eq!(seen, [2, 3, 4, 5, 6]);
        assert_eq!(log.last_sequence(), 6);
    }

    #[tokio::test]
    async fn beyond_last_is_live_only() {
        let log = EventLog::new("r");
        emit_n(&log, 2);
        let mut sub = log.subscribe(10);
        emit_n(&log, 9);
        log.emit(PhaseId::P7SemanticTopography, EventKind::RunFailed, None, json!({}));
        let first = sub.next().await.unwrap().unwrap();
        assert_eq!(first.sequence, 10);
    }

    #[tokio::test]
    async fn slow_subscriber_dropped() {
        let log = EventLog::with_capacity("r", 100, 4);
        let sub = log.subscribe(1);
        emit_n(&log, 10);
        let items: Vec<_> = sub.collect().await;
        assert!(matches!(items.last(), Some(Err(StreamError::Dropped { .. }))));
    }

    #[test]
    fn ring_is_bounded() {
        let log = EventLog::with_capacity("r", 5, 4);
        emit_n(&log, 12);
        let seqs: Vec<u64> = log.snapshot().iter().map(|e| e.sequence).collect();
        assert_eq!(seqs, [8, 9, 10, 11, 12]);
    }
}
