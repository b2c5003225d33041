use std::collections::BTreeSet;
use std::sync::Arc;

use rhizome_core::integrity::citation_links;
use rhizome_core::{
    assign_ranks, build_citation_shadow, candidate_pairs, centralization_risk, dedupe, detect_anomalies, Assemblage,
    CentralizationReport, CitationShadow, ConvergentAnomaly, DuplicateCluster, KnowledgeGraph, LensReading,
    PaperRecord, TheoreticalLens,
};
use serde_json::{json, Value};

use super::{EventKind, PhaseId, RunConfig, RunHandle, Services, BASE_ROSTER};
use crate::agent::AgentRuntime;
use crate::cartography::{Cartography, CentralizationCheck, CorpusSummary, RunMetadata, SCHEMA_VERSION};
use crate::lenses::{generate_lenses, lens_agent_name, read_all};
use crate::rupture::{heterodox_reentry, ReentryPlan, RefusedTrigger, RuptureEvent};
use crate::sources::{ingest_from, FetchQuery, FetchReport, SourceClients};
use crate::synthesis::{build_assemblages, classify_batch, tensions_by_paper, SkippedPair};
use crate::topography::{compute_topography, TopographyOutcome};

struct Executor<'a> {
    handle: &'a RunHandle,
    cfg: RunConfig,
    runtime: AgentRuntime,
    clients: SourceClients,
    services: Services,
    phase: PhaseId,
    reentry: Option<u32>,

    lenses: Vec<TheoreticalLens>,
    corpus: Vec<PaperRecord>,
    duplicates: Vec<DuplicateCluster>,
    fetch_report: FetchReport,
    readings: Vec<LensReading>,
    shadow: CitationShadow,
    anomalies: Vec<ConvergentAnomaly>,
    checks: Vec<CentralizationCheck>,
    ruptures: Vec<RuptureEvent>,
    refused: Vec<RefusedTrigger>,
    graph: KnowledgeGraph,
    skipped: Vec<SkippedPair>,
    assemblages: Vec<Assemblage>,
    cartography: Option<Cartography>,
}

/// Runs every phase in order, emitting events on the handle's log. Returns
/// true when the run completed.
pub async fn execute_run(handle: &RunHandle, cfg: RunConfig, services: Services) -> bool {
    let runtime = AgentRuntime::new(services.provider.clone(), cfg.max_in_flight);
    for agent in BASE_ROSTER {
        runtime.declare(agent);
    }
    let clients = SourceClients::new(services.transport.clone(), services.retry);
    let mut ex = Executor {
        handle,
        cfg,
        runtime,
        clients,
        services,
        phase: PhaseId::P1OntologicalSetup,
        reentry: None,
        lenses: Vec::new(),
        corpus: Vec::new(),
        duplicates: Vec::new(),
        fetch_report: FetchReport::default(),
        readings: Vec::new(),
        shadow: CitationShadow::default(),
        anomalies: Vec::new(),
        checks: Vec::new(),
        ruptures: Vec::new(),
        refused: Vec::new(),
        graph: KnowledgeGraph::default(),
        skipped: Vec::new(),
        assemblages: Vec::new(),
        cartography: None,
    };
    ex.emit(EventKind::RunStarted, json!({ "zone": ex.cfg.zone, "seed": ex.cfg.seed }));
    for phase in PhaseId::ALL {
        ex.phase = phase;
        handle.set_phase(phase);
        ex.emit(EventKind::PhaseStarted, json!({ "phase": phase }));
        let result = match phase {
            PhaseId::P1OntologicalSetup => ex.p1_lenses().await,
            PhaseId::P2CorpusIngestion => ex.p2_ingest().await,
            PhaseId::P3ParallelIngestion => ex.p3_read().await,
            PhaseId::P4ResonanceRupture => ex.p4_resonance().await,
            PhaseId::P5SynthesisMapping => ex.p5_synthesis().await,
            PhaseId::P6CartographicOutput => ex.p6_cartography(),
            PhaseId::P7SemanticTopography => ex.p7_topography().await,
        };
        match result {
            Ok(summary) => {
                ex.emit(EventKind::PhaseCompleted, json!({ "phase": phase, "summary": summary }));
            }
            Err(error) => {
                tracing::error!(run = %handle.run_id, %phase, %error, "run failed");
                ex.reentry = None;
                ex.emit(EventKind::RunFailed, json!({ "phase": phase, "error": error }));
                handle.finish(Some(format!("{phase}: {error}")));
                return false;
            }
        }
    }
    let topography = ex.cartography.as_ref().map(|c| status_of(&c.topography));
    ex.emit(
        EventKind::RunCompleted,
        json!({
            "corpus_size": ex.corpus.len(),
            "edges": ex.graph.edges.len(),
            "reentries": ex.ruptures.len(),
            "topography": topography,
        }),
    );
    handle.finish(None);
    true
}

fn status_of(outcome: &TopographyOutcome) -> &'static str {
    match outcome {
        TopographyOutcome::Pending => "pending",
        TopographyOutcome::Ready { .. } => "ready",
        TopographyOutcome::Unavailable { .. } => "unavailable",
    }
}

fn per_source(report: &FetchReport) -> Value {
    report
        .per_source
        .iter()
        .map(|(k, s)| {
            (
                k.to_string(),
                json!({ "received": s.received, "failed": s.failed, "transport_failed": s.transport_failed }),
            )
        })
        .collect::<serde_json::Map<_, _>>()
        .into()
}

type PhaseResult = Result<Value, String>;

impl Executor<'_> {
    fn emit(&self, kind: EventKind, payload: Value) {
        self.handle.events.emit(self.phase, kind, self.reentry, payload);
    }

    async fn p1_lenses(&mut self) -> PhaseResult {
        let lenses = generate_lenses(&self.runtime, &self.cfg.zone, &self.cfg.lens_rules, self.cfg.lens_attempts)
            .await
            .map_err(|e| e.to_string())?;
        for lens in &lenses {
            self.runtime.declare(&lens_agent_name(&lens.name));
        }
        let names: Vec<&str> = lenses.iter().map(|l| l.name.as_str()).collect();
        self.emit(EventKind::LensesGenerated, json!({ "count": lenses.len(), "lenses": names }));
        self.lenses = lenses;
        Ok(json!({ "lenses": self.lenses.len() }))
    }

    async fn p2_ingest(&mut self) -> PhaseResult {
        let query = FetchQuery {
            zone_text: self.cfg.zone.clone(),
            per_source_limit: self.cfg.per_source_limit,
            year_range: self.cfg.year_range,
            mailto: self.cfg.mailto.clone(),
            page_offset: 0,
        };
        let (records, report) = ingest_from(&query, &self.cfg.sources, &self.clients, None).await;
        self.emit(EventKind::PapersFetched, json!({ "received": records.len(), "per_source": per_source(&report) }));
        self.fetch_report = report;

        let outcome = dedupe(records, self.cfg.dice_threshold).map_err(|e| e.to_string())?;
        let removed: usize = outcome.clusters.iter().map(|c| c.member_ids.len()).sum();
        self.emit(
            EventKind::DuplicatesRemoved,
            json!({ "removed": removed, "clusters": outcome.clusters.len(), "corpus_size": outcome.corpus.len() }),
        );
        self.corpus = outcome.corpus;
        self.duplicates = outcome.clusters;
        assign_ranks(&mut self.corpus, &self.services.abs_table, &self.cfg.rank_weights).map_err(|e| e.to_string())?;
        self.shadow = build_citation_shadow(&self.corpus, self.cfg.anchor_count);
        let heterodox = self.corpus.iter().filter(|p| p.heterodox_flag).count();
        Ok(json!({
            "corpus_size": self.corpus.len(),
            "heterodox": heterodox,
            "anchors": self.shadow.anchors.len(),
            "shadow_edges": self.shadow.shadow_edges.len(),
        }))
    }

    /// Reads `papers` under every lens and appends the readings.
    async fn read(&mut self, papers: &[PaperRecord]) -> Result<usize, String> {
        if papers.is_empty() {
            return Ok(0);
        }
        let per_lens =
            read_all(&self.runtime, &self.lenses, papers, self.cfg.top_m).await.map_err(|e| e.to_string())?;
        let mut count = 0;
        for (lens, readings) in self.lenses.iter().zip(per_lens) {
            let agent_read = readings.iter().filter(|r| r.agent_read).count();
            let tensions: usize = readings.iter().map(|r| r.tensions.len()).sum();
            self.emit(
                EventKind::LensReadingDone,
                json!({ "lens": lens.name, "readings": readings.len(), "agent_read": agent_read, "tensions": tensions }),
            );
            count += readings.len();
            self.readings.extend(readings);
        }
        Ok(count)
    }

    async fn p3_read(&mut self) -> PhaseResult {
        let corpus = self.corpus.clone();
        let n = self.read(&corpus).await?;
        Ok(json!({ "readings": n }))
    }

    /// Recomputes anomalies and announces the ones not seen before.
    fn refresh_anomalies(&mut self) {
        let known: BTreeSet<String> = self.anomalies.iter().map(|a| a.canonical_tension.clone()).collect();
        self.anomalies = detect_anomalies(&self.readings);
        for a in self.anomalies.iter().filter(|a| !known.contains(&a.canonical_tension)) {
            self.emit(
                EventKind::AnomalyDetected,
                json!({
                    "id": a.id,
                    "tension": a.canonical_tension,
                    "lenses": a.lens_names,
                    "papers": a.paper_ids,
                    "intensity": a.intensity,
                }),
            );
        }
    }

    fn citation_centralization(&self) -> CentralizationReport {
        let ids: Vec<String> = self.corpus.iter().map(|p| p.id.clone()).collect();
        let edges: Vec<(String, String)> =
            citation_links(&self.corpus).into_iter().map(|(a, b)| (ids[a].clone(), ids[b].clone())).collect();
        centralization_risk(&ids, &edges, self.cfg.centralization_threshold, self.cfg.k_fraction)
    }

    fn record_check(&mut self, graph: String, report: &CentralizationReport) {
        self.checks.push(CentralizationCheck { phase: self.phase, graph, report: report.clone() });
    }

    /// Re-enters on a trigger if the budget allows; otherwise records the
    /// refusal. Returns whether a re-entry ran.
    async fn on_trigger(&mut self, report: CentralizationReport) -> Result<bool, String> {
        let done = self.ruptures.len() as u32;
        if done >= self.cfg.max_reentries {
            tracing::info!(run = %self.handle.run_id, "centralization trigger refused: re-entry budget spent");
            self.refused.push(RefusedTrigger { report, reentries_done: done, max_reentries: self.cfg.max_reentries });
            return Ok(false);
        }
        let index = done + 1;
        self.reentry = Some(index);
        let result = self.reenter(index, report).await;
        self.reentry = None;
        result.map(|_| true)
    }

    async fn reenter(&mut self, index: u32, report: CentralizationReport) -> Result<(), String> {
        self.emit(
            EventKind::RuptureTriggered,
            json!({
                "reentry_index": index,
                "hub_ids": report.hub_ids,
                "incident_fraction": report.incident_fraction,
                "threshold": report.threshold,
            }),
        );
        let plan = ReentryPlan {
            zone: self.cfg.zone.clone(),
            traditions: self.cfg.traditions.clone(),
            sources: self.cfg.sources.clone(),
            per_source_limit: self.cfg.reentry_limit,
            year_range: self.cfg.year_range,
            mailto: self.cfg.mailto.clone(),
            dice_threshold: self.cfg.dice_threshold,
            weights: self.cfg.rank_weights,
        };
        let (event, injected) =
            heterodox_reentry(&plan, &self.corpus, &self.clients, index, report).await.map_err(|e| e.to_string())?;
        self.emit(
            EventKind::PapersFetched,
            json!({ "received": event.fetch_report.received(), "per_source": per_source(&event.fetch_report) }),
        );
        let removed: usize = event.duplicates.iter().map(|c| c.member_ids.len()).sum();
        self.emit(
            EventKind::DuplicatesRemoved,
            json!({ "removed": removed, "clusters": event.duplicates.len(), "injected": injected.len() }),
        );
        self.corpus.extend(injected.iter().cloned());
        self.graph.add_papers(&injected);
        self.read(&injected).await?;
        self.refresh_anomalies();
        self.shadow = build_citation_shadow(&self.corpus, self.cfg.anchor_count);
        self.emit(
            EventKind::ReentryCompleted,
            json!({
                "reentry_index": index,
                "injected": event.injected_paper_ids,
                "corpus_size": self.corpus.len(),
                "attempted_but_empty": event.attempted_but_empty,
            }),
        );
        self.ruptures.push(event);
        Ok(())
    }

    async fn p4_resonance(&mut self) -> PhaseResult {
        self.refresh_anomalies();
        loop {
            let report = self.citation_centralization();
            self.record_check("citation-graph".into(), &report);
            if !report.triggered || !self.on_trigger(report).await? {
                break;
            }
        }
        Ok(json!({ "anomalies": self.anomalies.len(), "reentries": self.ruptures.len() }))
    }

    async fn p5_synthesis(&mut self) -> PhaseResult {
        self.graph = KnowledgeGraph::from_corpus(&self.corpus);
        let mut tensions = tensions_by_paper(&self.readings);
        let mut pairs = candidate_pairs(&self.corpus, &self.shadow, &self.anomalies, self.cfg.pair_cap);
        let mut cursor = 0;
        let mut batch_no = 0;
        while cursor < pairs.len() {
            let end = (cursor + self.cfg.edge_batch_size).min(pairs.len());
            let batch = pairs[cursor..end].to_vec();
            cursor = end;
            batch_no += 1;
            for result in classify_batch(&self.runtime, &batch, &self.corpus, &tensions).await {
                let edge = match result {
                    Ok(edge) => edge,
                    Err(skip) => {
                        tracing::warn!(from = %skip.from_id, to = %skip.to_id, reason = %skip.reason, "pair skipped");
                        self.skipped.push(skip);
                        continue;
                    }
                };
                let payload = json!({
                    "from": edge.from_id,
                    "to": edge.to_id,
                    "edge_class": edge.edge_class,
                    "subtype": edge.subtype,
                    "render_hint": edge.render_hint,
                    "confidence": edge.confidence,
                });
                match self.graph.insert_edge(edge.clone()) {
                    Ok(()) => self.emit(EventKind::EdgeClassified, payload),
                    Err(e) => self.skipped.push(SkippedPair {
                        from_id: edge.from_id,
                        to_id: edge.to_id,
                        reason: e.to_string(),
                    }),
                }
            }
            if self.graph.edges.is_empty() {
                continue;
            }
            let report = centralization_risk(
                &self.graph.node_ids(),
                &self.graph.undirected_edges(),
                self.cfg.centralization_threshold,
                self.cfg.k_fraction,
            );
            self.record_check(format!("relation-graph-batch-{batch_no}"), &report);
            if report.triggered && self.on_trigger(report).await? {
                tensions = tensions_by_paper(&self.readings);
                let mut seen: BTreeSet<(String, String)> = pairs
                    .iter()
                    .map(|(a, b)| if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) })
                    .collect();
                for (a, b) in candidate_pairs(&self.corpus, &self.shadow, &self.anomalies, self.cfg.pair_cap) {
                    if pairs.len() >= self.cfg.pair_cap {
                        break;
                    }
                    let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                    if seen.insert(key) {
                        pairs.push((a, b));
                    }
                }
            }
        }
        self.assemblages = build_assemblages(&self.runtime, &self.anomalies, &self.corpus).await;
        for a in &self.assemblages {
            self.emit(
                EventKind::AssemblageBuilt,
                json!({ "title": a.title, "anomaly_refs": a.anomaly_refs, "papers": a.paper_ids.len() }),
            );
        }
        Ok(json!({
            "pairs": pairs.len(),
            "edges": self.graph.edges.len(),
            "skipped": self.skipped.len(),
            "assemblages": self.assemblages.len(),
            "refused_triggers": self.refused.len(),
        }))
    }

    fn p6_cartography(&mut self) -> PhaseResult {
        let mut config = self.cfg.clone();
        config.out = None;
        config.record = None;
        let cartography = Cartography {
            schema_version: SCHEMA_VERSION.to_string(),
            run_id: self.handle.run_id.clone(),
            created_at: chrono::Utc::now().to_rfc3339(),
            zone: self.cfg.zone.clone(),
            seed: self.cfg.seed,
            config,
            agent_roster: self.runtime.roster(),
            lenses: self.lenses.clone(),
            corpus: CorpusSummary::new(self.corpus.clone(), self.duplicates.clone(), self.fetch_report.clone()),
            readings: self.readings.clone(),
            citation_shadow: self.shadow.clone(),
            anomalies: self.anomalies.clone(),
            centralization_checks: self.checks.clone(),
            ruptures: self.ruptures.clone(),
            refused_triggers: self.refused.clone(),
            graph: self.graph.clone(),
            skipped_pairs: self.skipped.clone(),
            assemblages: self.assemblages.clone(),
            topography: TopographyOutcome::Pending,
            metadata: RunMetadata::from((self.runtime.call_records(), self.runtime.metrics())),
        };
        cartography.cross_check().map_err(|e| e.to_string())?;
        if let Some(out) = &self.cfg.out {
            cartography.write(out).map_err(|e| e.to_string())?;
        }
        self.handle.set_cartography(cartography.clone());
        self.emit(
            EventKind::CartographyReady,
            json!({
                "schema_version": SCHEMA_VERSION,
                "path": self.cfg.out,
                "papers": cartography.corpus.total,
                "edges": cartography.graph.edges.len(),
                "anomalies": cartography.anomalies.len(),
                "assemblages": cartography.assemblages.len(),
            }),
        );
        self.cartography = Some(cartography);
        Ok(json!({ "written": self.cfg.out.is_some() }))
    }

    async fn p7_topography(&mut self) -> PhaseResult {
        let outcome = compute_topography(&self.corpus, &self.cfg.embeddings, &self.cfg.topography, self.cfg.seed)
            .await
            .unwrap_or_else(|e| {
                tracing::warn!(run = %self.handle.run_id, error = %e, "topography unavailable");
                TopographyOutcome::Unavailable { reason: e.to_string() }
            });
        let payload = match &outcome {
            TopographyOutcome::Ready { model_name, map, .. } => json!({
                "status": "ready",
                "model": model_name,
                "clusters": map.clusters.len(),
                "voids": map.voids.len(),
                "isolations": map.isolations.len(),
            }),
            TopographyOutcome::Unavailable { reason } => json!({ "status": "unavailable", "reason": reason }),
            TopographyOutcome::Pending => json!({ "status": "pending" }),
        };
        let cartography = self.cartography.as_mut().ok_or("cartography missing")?;
        cartography.topography = outcome;
        if let Some(out) = &self.cfg.out {
            cartography.write(out).map_err(|e| e.to_string())?;
        }
        self.handle.set_cartography(cartography.clone());
        self.emit(EventKind::TopographyReady, payload.clone());
        Ok(payload)
    }
}

/// Runs a config to completion in the current task, without a registry.
pub async fn run_inline(config: RunConfig, services: Services) -> (Arc<RunHandle>, bool) {
    let handle = Arc::new(RunHandle::new(&uuid::Uuid::new_v4().to_string(), &config.zone));
    let ok = execute_run(&handle, config, services).await;
    (handle, ok)
}
