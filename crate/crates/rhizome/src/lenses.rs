//! Lens generation and per-lens corpus reading.

use std::collections::BTreeMap;

use futures::future::join_all;
use rhizome_core::lens::{counted_reading, select_for_reading};
use rhizome_core::synthesis::clamp_unit;
use rhizome_core::text::words;
use rhizome_core::{
    prefilter_signals, validate_lens_set, LensReading, LensSetRules, PaperRecord, PaperSignals, TheoreticalLens,
};
use serde::Deserialize;

use crate::agent::{AgentCall, AgentError, AgentRuntime, Schema};

pub const EPISTEMOLOGY_AGENT: &str = "epistemology";
pub const DEFAULT_LENS_ATTEMPTS: u32 = 3;
pub const DEFAULT_TOP_M: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LensError {
    #[error("no valid lens set after {attempts} attempts: {last}")]
    Rejected { attempts: u32, last: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("lens {lens:?}: {source}")]
    Reading { lens: String, source: AgentError },
}

#[derive(Debug, Clone, Deserialize)]
pub struct LensSetReply {
    pub lenses: Vec<TheoreticalLens>,
    pub confidence: f64,
}

impl Schema for LensSetReply {
    const ID: &'static str = "lens-set";
    const SHAPE: &'static str = r#"{"lenses": [{"name": "...", "description": "...", "signal_vocabulary": ["..."], "rationale": "..."}], "confidence": 0.0}"#;

    fn confidence(&self) -> f64 {
        self.confidence
    }

    fn set_confidence(&mut self, value: f64) {
        self.confidence = value;
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReadingReply {
    #[serde(default)]
    pub tensions: Vec<String>,
    pub relevance: f64,
    pub confidence: f64,
}

impl Schema for ReadingReply {
    const ID: &'static str = "lens-reading";
    const SHAPE: &'static str = r#"{"tensions": ["..."], "relevance": 0.0, "confidence": 0.0}"#;

    fn confidence(&self) -> f64 {
        self.confidence
    }

    fn set_confidence(&mut self, value: f64) {
        self.confidence = value;
    }

    fn check(&self) -> Result<(), String> {
        if self.tensions.iter().any(|t| t.trim().is_empty()) {
            return Err("tensions must be non-empty statements".into());
        }
        Ok(())
    }
}

/// Roster name of the reading agent for a lens.
pub fn lens_agent_name(lens_name: &str) -> String {
    format!("lens-{}", words(lens_name).join("-"))
}

pub fn lens_prompt(zone: &str, rules: &LensSetRules, attempt: u32, previous: Option<&str>) -> String {
    let mut prompt = format!(
        "You are the epistemology agent of a literature-mapping pipeline.\n\
         Phenomenon zone: {zone}\n\
         Propose between {min} and {max} mutually orthogonal theoretical lenses for reading the literature on this zone. \
         Each lens needs a short name, a one to three sentence description, {vmin} to {vmax} distinct lowercase signal \
         vocabulary terms, and a rationale for its distance from the other lenses. \
         Lenses must share as few vocabulary terms as possible (pairwise Jaccard at most {jac}).\n\
         Report your confidence in the set as a number between 0 and 1.\n\
         Attempt {attempt}.",
        min = rules.min_lenses,
        max = rules.max_lenses,
        vmin = rules.min_vocabulary,
        vmax = rules.max_vocabulary,
        jac = rules.max_jaccard,
    );
    if let Some(reason) = previous {
        prompt.push_str(&format!("\nThe previous set was rejected: {reason}."));
    }
    prompt.push_str(&format!("\nReply with one JSON object shaped like {}", LensSetReply::SHAPE));
    prompt
}

/// Asks for a lens set until one passes validation, at most `attempts` times.
pub async fn generate_lenses(
    runtime: &AgentRuntime,
    zone: &str,
    rules: &LensSetRules,
    attempts: u32,
) -> Result<Vec<TheoreticalLens>, LensError> {
    let mut last = String::from("no attempt made");
    for attempt in 1..=attempts.max(1) {
        let previous = (attempt > 1).then_some(last.as_str());
        let call = AgentCall::new(EPISTEMOLOGY_AGENT, lens_prompt(zone, rules, attempt, previous));
        let reply = runtime.complete_structured::<LensSetReply>(&call).await?;
        let lenses: Vec<TheoreticalLens> = reply.payload.lenses.into_iter().map(TheoreticalLens::normalized).collect();
        match validate_lens_set(&lenses, rules) {
            Ok(()) => return Ok(lenses),
            Err(violation) => {
                tracing::info!(attempt, %violation, "lens set rejected");
                last = violation.to_string();
            }
        }
    }
    Err(LensError::Rejected { attempts: attempts.max(1), last })
}

pub fn reading_prompt(lens: &TheoreticalLens, paper: &PaperRecord, signals: &PaperSignals) -> String {
    let hits = if signals.hits.is_empty() {
        "none".to_string()
    } else {
        signals.hits.iter().map(|h| format!("{} x{}", h.term, h.count)).collect::<Vec<_>>().join(", ")
    };
    format!(
        "You read scholarly literature through the lens \"{name}\".\n\
         Lens description: {description}\n\
         Signal vocabulary: {vocab}\n\n\
         Paper {id}\nTitle: {title}\nAbstract: {abstract_text}\nSignal hits: {hits}\n\n\
         List the theoretical tensions this lens exposes in the paper as short statements, rate the paper's relevance \
         to the lens and your confidence, both between 0 and 1.\n\
         Reply with one JSON object shaped like {shape}",
        name = lens.name,
        description = lens.description,
        vocab = lens.signal_vocabulary.join(", "),
        id = paper.id,
        title = paper.title,
        abstract_text = paper.abstract_text.as_deref().unwrap_or("(none)"),
        shape = ReadingReply::SHAPE,
    )
}

/// One reading per corpus paper, in corpus order. The `top_m` papers by
/// signal hits get an agent reading; the rest a counted one.
pub async fn read_corpus(
    runtime: &AgentRuntime,
    lens: &TheoreticalLens,
    corpus: &[PaperRecord],
    top_m: Option<usize>,
) -> Result<Vec<LensReading>, LensError> {
    let signals = prefilter_signals(lens, corpus);
    let selected = select_for_reading(&signals, corpus, top_m);
    let max_total = signals.iter().map(|s| s.total).max().unwrap_or(0);
    let agent = lens_agent_name(&lens.name);

    let agent_reads = corpus.iter().zip(&signals).filter(|(p, _)| selected.contains(&p.id)).map(|(paper, sig)| {
        let call = AgentCall::new(agent.clone(), reading_prompt(lens, paper, sig));
        async move {
            let reply = runtime.complete_structured::<ReadingReply>(&call).await?;
            Ok::<_, AgentError>((
                paper.id.clone(),
                LensReading {
                    lens_name: lens.name.clone(),
                    paper_id: paper.id.clone(),
                    signal_hits: sig.hits.clone(),
                    tensions: reply.payload.tensions.iter().map(|t| t.trim().to_string()).collect(),
                    relevance: clamp_unit(reply.payload.relevance),
                    confidence: reply.confidence,
                    agent_read: true,
                },
            ))
        }
    });
    let mut read: BTreeMap<String, LensReading> = BTreeMap::new();
    for result in join_all(agent_reads).await {
        let (id, reading) = result.map_err(|source| LensError::Reading { lens: lens.name.clone(), source })?;
        read.insert(id, reading);
    }
    Ok(signals
        .iter()
        .map(|sig| read.remove(&sig.paper_id).unwrap_or_else(|| counted_reading(&lens.name, sig, max_total)))
        .collect())
}

/// All lenses concurrently; readings grouped lens by lens in lens order.
pub async fn read_all(
    runtime: &AgentRuntime,
    lenses: &[TheoreticalLens],
    corpus: &[PaperRecord],
    top_m: Option<usize>,
) -> Result<Vec<Vec<LensReading>>, LensError> {
    join_all(lenses.iter().map(|lens| read_corpus(runtime, lens, corpus, top_m))).await.into_iter().collect()
}
