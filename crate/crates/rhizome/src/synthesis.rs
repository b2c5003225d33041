//! Relation classification and assemblage writing.

use std::collections::{BTreeMap, BTreeSet};

use futures::future::join_all;
use rhizome_core::synthesis::{anomaly_groups, fallback_title, is_present_participle_title};
use rhizome_core::{Assemblage, ConvergentAnomaly, EdgeClass, EdgeSubtype, LensReading, PaperRecord, RelationEdge};
use serde::{Deserialize, Serialize};

use crate::agent::{AgentCall, AgentError, AgentRuntime, Schema};

pub const RHIZOME_AGENT: &str = "rhizome-builder";
pub const ASSEMBLAGE_AGENT: &str = "assemblage-builder";

#[derive(Debug, Clone, Deserialize)]
pub struct EdgeReply {
    pub edge_class: String,
    pub subtype: String,
    pub justification: String,
    pub confidence: f64,
}

impl EdgeReply {
    fn parsed(&self) -> Result<(EdgeClass, EdgeSubtype), String> {
        let class =
            EdgeClass::parse(&self.edge_class).ok_or_else(|| format!("unknown edge_class {:?}", self.edge_class))?;
        let subtype = EdgeSubtype::parse(&self.subtype).ok_or_else(|| format!("unknown subtype {:?}", self.subtype))?;
        if subtype.class() != class {
            return Err(format!("subtype {subtype} belongs to class {}, not {class}", subtype.class()));
        }
        Ok((class, subtype))
    }
}

impl Schema for EdgeReply {
    const ID: &'static str = "relation-edge";
    const SHAPE: &'static str = r#"{"edge_class": "constructive|critical|rhizomatic", "subtype": "extends|builds-on|borrows-method|contradicts|problematizes|challenges|paradigm-rupture", "justification": "...", "confidence": 0.0}"#;

    fn confidence(&self) -> f64 {
        self.confidence
    }

    fn set_confidence(&mut self, value: f64) {
        self.confidence = value;
    }

    fn check(&self) -> Result<(), String> {
        if self.justification.trim().is_empty() {
            return Err("justification is empty".into());
        }
        self.parsed().map(|_| ())
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct AssemblageReply {
    pub title: String,
    pub narrative: String,
    pub confidence: f64,
}

impl Schema for AssemblageReply {
    const ID: &'static str = "assemblage";
    const SHAPE: &'static str = r#"{"title": "...", "narrative": "...", "confidence": 0.0}"#;

    fn confidence(&self) -> f64 {
        self.confidence
    }

    fn set_confidence(&mut self, value: f64) {
        self.confidence = value;
    }

    fn check(&self) -> Result<(), String> {
        if self.title.trim().is_empty() || self.narrative.trim().is_empty() {
            return Err("title and narrative must be non-empty".into());
        }
        Ok(())
    }
}

/// A candidate pair the classifier could not resolve; the graph omits it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub from_id: String,
    pub to_id: String,
    pub reason: String,
}

/// Lens tensions per paper, `lens: tension`, in reading order.
pub fn tensions_by_paper(readings: &[LensReading]) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in readings {
        for t in &r.tensions {
            out.entry(r.paper_id.clone()).or_default().push(format!("{}: {t}", r.lens_name));
        }
    }
    out
}

fn describe(paper: &PaperRecord, tensions: Option<&Vec<String>>) -> String {
    let tensions = match tensions {
        Some(t) if !t.is_empty() => t.join("; "),
        _ => "none recorded".to_string(),
    };
    format!(
        "{id} ({year})\nTitle: {title}\nAbstract: {abs}\nLens tensions: {tensions}",
        id = paper.id,
        year = paper.year.map_or_else(|| "n.d.".to_string(), |y| y.to_string()),
        title = paper.title,
        abs = paper.abstract_text.as_deref().unwrap_or("(none)"),
    )
}

pub fn edge_prompt(from: &PaperRecord, to: &PaperRecord, tensions: &BTreeMap<String, Vec<String>>) -> String {
    format!(
        "Classify how paper A relates to paper B.\n\n\
         A: {a}\n\n\
         B: {b}\n\n\
         Classes and their subtypes: constructive (extends, builds-on, borrows-method); critical (contradicts, \
         problematizes, challenges); rhizomatic (paradigm-rupture, when A dismantles the axioms B rests on).\n\
         Give a one-sentence justification and your confidence between 0 and 1.\n\
         Reply with one JSON object shaped like {shape}",
        a = describe(from, tensions.get(&from.id)),
        b = describe(to, tensions.get(&to.id)),
        shape = EdgeReply::SHAPE,
    )
}

/// One model call per pair; the render hint follows from the class.
pub async fn classify_edge(
    runtime: &AgentRuntime,
    from: &PaperRecord,
    to: &PaperRecord,
    tensions: &BTreeMap<String, Vec<String>>,
) -> Result<RelationEdge, AgentError> {
    let call = AgentCall::new(RHIZOME_AGENT, edge_prompt(from, to, tensions));
    let reply = runtime.complete_structured::<EdgeReply>(&call).await?;
    let (class, subtype) = reply.payload.parsed().expect("checked by the schema");
    RelationEdge::new(
        from.id.clone(),
        to.id.clone(),
        class,
        subtype,
        reply.payload.justification.trim().to_string(),
        reply.confidence,
    )
    .map_err(|e| AgentError::Invalid {
        agent: RHIZOME_AGENT.into(),
        schema: EdgeReply::ID,
        attempts: 1,
        reason: e.to_string(),
    })
}

/// Classifies a batch concurrently. Results keep the batch order.
pub async fn classify_batch(
    runtime: &AgentRuntime,
    pairs: &[(String, String)],
    corpus: &[PaperRecord],
    tensions: &BTreeMap<String, Vec<String>>,
) -> Vec<Result<RelationEdge, SkippedPair>> {
    let by_id: BTreeMap<&str, &PaperRecord> = corpus.iter().map(|p| (p.id.as_str(), p)).collect();
    join_all(pairs.iter().map(|(a, b)| {
        let papers = by_id.get(a.as_str()).zip(by_id.get(b.as_str()));
        async move {
            let skip = |reason: String| SkippedPair { from_id: a.clone(), to_id: b.clone(), reason };
            let (from, to) = papers.ok_or_else(|| skip("endpoint not in corpus".into()))?;
            classify_edge(runtime, from, to, tensions).await.map_err(|e| skip(e.to_string()))
        }
    }))
    .await
}

pub fn assemblage_prompt(
    group: &[&ConvergentAnomaly],
    papers: &[&PaperRecord],
    rejected_title: Option<&str>,
) -> String {
    let anomalies: Vec<String> = group
        .iter()
        .map(|a| format!("- {} ({}; lenses: {})", a.canonical_tension, a.id, a.lens_names.join(", ")))
        .collect();
    let papers: Vec<String> = papers.iter().map(|p| format!("- {}: {}", p.id, p.title)).collect();
    let mut prompt = format!(
        "Write a provisional constellation of becoming for these convergent anomalies.\n\
         Anomalies:\n{}\n\
         Papers:\n{}\n\
         The title must open with a present participle (a word ending in -ing). Write the narrative as one paragraph \
         in the present-continuous voice. Report your confidence between 0 and 1.",
        anomalies.join("\n"),
        papers.join("\n"),
    );
    if let Some(title) = rejected_title {
        prompt.push_str(&format!(
            "\nYour previous title {title:?} does not open with a present participle; write a new one."
        ));
    }
    prompt.push_str(&format!("\nReply with one JSON object shaped like {}", AssemblageReply::SHAPE));
    prompt
}

fn mechanical_narrative(group: &[&ConvergentAnomaly]) -> String {
    let tensions: Vec<&str> = group.iter().map(|a| a.canonical_tension.as_str()).collect();
    format!("Lenses are converging on {}.", tensions.join("; "))
}

async fn build_one(runtime: &AgentRuntime, group: Vec<&ConvergentAnomaly>, corpus: &[PaperRecord]) -> Assemblage {
    let paper_ids: BTreeSet<&str> = group.iter().flat_map(|a| a.paper_ids.iter().map(String::as_str)).collect();
    let papers: Vec<&PaperRecord> = corpus.iter().filter(|p| paper_ids.contains(p.id.as_str())).collect();

    let first = runtime
        .complete_structured::<AssemblageReply>(&AgentCall::new(
            ASSEMBLAGE_AGENT,
            assemblage_prompt(&group, &papers, None),
        ))
        .await;
    let reply = match first {
        Ok(r) if is_present_participle_title(r.payload.title.trim()) => Ok(r.payload),
        Ok(r) => {
            let retry =
                AgentCall::new(ASSEMBLAGE_AGENT, assemblage_prompt(&group, &papers, Some(r.payload.title.trim())));
            match runtime.complete_structured::<AssemblageReply>(&retry).await {
                Ok(second) => Ok(second.payload),
                Err(e) => {
                    tracing::warn!(error = %e, "assemblage title retry failed");
                    Ok(r.payload)
                }
            }
        }
        Err(e) => Err(e),
    };
    let (title, narrative) = match reply {
        Ok(p) => {
            let title = p.title.trim().to_string();
            let title = if is_present_participle_title(&title) { title } else { fallback_title(&title) };
            (title, p.narrative.trim().to_string())
        }
        Err(e) => {
            tracing::warn!(error = %e, "assemblage agent failed; writing a mechanical one");
            (fallback_title(&group[0].canonical_tension), mechanical_narrative(&group))
        }
    };
    Assemblage {
        title,
        narrative,
        anomaly_refs: group.iter().map(|a| a.id.clone()).collect(),
        paper_ids: paper_ids.into_iter().map(String::from).collect(),
    }
}

/// One assemblage per group of anomalies sharing papers.
pub async fn build_assemblages(
    runtime: &AgentRuntime,
    anomalies: &[ConvergentAnomaly],
    corpus: &[PaperRecord],
) -> Vec<Assemblage> {
    let groups = anomaly_groups(anomalies);
    join_all(groups.into_iter().map(|g| build_one(runtime, g.iter().map(|i| &anomalies[*i]).collect(), corpus))).await
}
