//! Relation taxonomy, the knowledge graph, candidate pairs and assemblage
//! grouping.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::integrity::CitationShadow;
use crate::paper::{PaperRecord, SourceKind};
use crate::resonance::ConvergentAnomaly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeClass {
    Constructive,
    Critical,
    Rhizomatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSubtype {
    Extends,
    BuildsOn,
    BorrowsMethod,
    Contradicts,
    Problematizes,
    Challenges,
    ParadigmRupture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderHint {
    Solid,
    Dashed,
    Neon,
}

impl EdgeClass {
    pub const ALL: [EdgeClass; 3] = [EdgeClass::Constructive, EdgeClass::Critical, EdgeClass::Rhizomatic];

    pub fn render_hint(self) -> RenderHint {
        match self {
            EdgeClass::Constructive => RenderHint::Solid,
            EdgeClass::Critical => RenderHint::Dashed,
            EdgeClass::Rhizomatic => RenderHint::Neon,
        }
    }

    pub fn subtypes(self) -> &'static [EdgeSubtype] {
        match self {
            EdgeClass::Constructive => &[EdgeSubtype::Extends, EdgeSubtype::BuildsOn, EdgeSubtype::BorrowsMethod],
            EdgeClass::Critical => &[EdgeSubtype::Contradicts, EdgeSubtype::Problematizes, EdgeSubtype::Challenges],
            EdgeClass::Rhizomatic => &[EdgeSubtype::ParadigmRupture],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeClass::Constructive => "constructive",
            EdgeClass::Critical => "critical",
            EdgeClass::Rhizomatic => "rhizomatic",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeClass> {
        EdgeClass::ALL.into_iter().find(|c| c.as_str() == s.trim().to_lowercase())
    }
}

impl EdgeSubtype {
    pub const ALL: [EdgeSubtype; 7] = [
        EdgeSubtype::Extends,
        EdgeSubtype::BuildsOn,
        EdgeSubtype::BorrowsMethod,
        EdgeSubtype::Contradicts,
        EdgeSubtype::Problematizes,
        EdgeSubtype::Challenges,
        EdgeSubtype::ParadigmRupture,
    ];

    pub fn class(self) -> EdgeClass {
        match self {
            EdgeSubtype::Extends | EdgeSubtype::BuildsOn | EdgeSubtype::BorrowsMethod => EdgeClass::Constructive,
            EdgeSubtype::Contradicts | EdgeSubtype::Problematizes | EdgeSubtype::Challenges => EdgeClass::Critical,
            EdgeSubtype::ParadigmRupture => EdgeClass::Rhizomatic,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeSubtype::Extends => "extends",
            EdgeSubtype::BuildsOn => "builds-on",
            EdgeSubtype::BorrowsMethod => "borrows-method",
            EdgeSubtype::Contradicts => "contradicts",
            EdgeSubtype::Problematizes => "problematizes",
            EdgeSubtype::Challenges => "challenges",
            EdgeSubtype::ParadigmRupture => "paradigm-rupture",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeSubtype> {
        let s = s.trim().to_lowercase().replace(['_', ' '], "-");
        EdgeSubtype::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for EdgeSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EdgeError {
    #[error("subtype {subtype} does not belong to class {class}")]
    SubtypeMismatch { class: EdgeClass, subtype: EdgeSubtype },
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("edge endpoint {0} is not a graph node")]
    UnknownNode(String),
    #[error("duplicate edge {from} -> {to} ({subtype})")]
    Duplicate { from: String, to: String, subtype: EdgeSubtype },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationEdge {
    pub from_id: String,
    pub to_id: String,
    pub edge_class: EdgeClass,
    pub subtype: EdgeSubtype,
    pub justification: String,
    pub confidence: f64,
    pub render_hint: RenderHint,
}

impl RelationEdge {
    /// Builds an edge, deriving the render hint from the class and clamping
    /// confidence into `[0, 1]`.
    pub fn new(
        from_id: String,
        to_id: String,
        edge_class: EdgeClass,
        subtype: EdgeSubtype,
        justification: String,
        confidence: f64,
    ) -> Result<Self, EdgeError> {
        if subtype.class() != edge_class {
            return Err(EdgeError::SubtypeMismatch { class: edge_class, subtype });
        }
        if from_id == to_id {
            return Err(EdgeError::SelfLoop(from_id));
        }
        Ok(RelationEdge {
            from_id,
            to_id,
            edge_class,
            subtype,
            justification,
            confidence: clamp_unit(confidence),
            render_hint: edge_class.render_hint(),
        })
    }

    pub fn is_consistent(&self) -> bool {
        self.subtype.class() == self.edge_class
            && self.render_hint == self.edge_class.render_hint()
            && self.from_id != self.to_id
    }
}

pub fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub heterodox: bool,
    pub source: SourceKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<RelationEdge>,
}

impl KnowledgeGraph {
    pub fn from_corpus(corpus: &[PaperRecord]) -> Self {
        let mut g = KnowledgeGraph::default();
        g.add_papers(corpus);
        g
    }

    /// Adds nodes for papers not yet present.
    pub fn add_papers(&mut self, papers: &[PaperRecord]) {
        for p in papers {
            if !self.has_node(&p.id) {
                self.nodes.push(GraphNode { id: p.id.clone(), heterodox: p.heterodox_flag, source: p.source });
            }
        }
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    pub fn insert_edge(&mut self, edge: RelationEdge) -> Result<(), EdgeError> {
        if !edge.is_consistent() {
            return Err(EdgeError::SubtypeMismatch { class: edge.edge_class, subtype: edge.subtype });
        }
        for end in [&edge.from_id, &edge.to_id] {
            if !self.has_node(end) {
                return Err(EdgeError::UnknownNode(end.clone()));
            }
        }
        if self.edges.iter().any(|e| e.from_id == edge.from_id && e.to_id == edge.to_id && e.subtype == edge.subtype) {
            return Err(EdgeError::Duplicate { from: edge.from_id, to: edge.to_id, subtype: edge.subtype });
        }
        self.edges.push(edge);
        Ok(())
    }

    pub fn node_ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    pub fn undirected_edges(&self) -> Vec<(String, String)> {
        self.edges.iter().map(|e| (e.from_id.clone(), e.to_id.clone())).collect()
    }

    /// Every invariant at once: endpoints exist, no self-loops, no duplicate
    /// `(from, to, subtype)`, class/subtype/render-hint agree.
    pub fn validate(&self) -> Result<(), EdgeError> {
        let nodes: BTreeSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        let mut triples = BTreeSet::new();
        for e in &self.edges {
            if e.from_id == e.to_id {
                return Err(EdgeError::SelfLoop(e.from_id.clone()));
            }
            if !e.is_consistent() {
                return Err(EdgeError::SubtypeMismatch { class: e.edge_class, subtype: e.subtype });
            }
            for end in [&e.from_id, &e.to_id] {
                if !nodes.contains(end.as_str()) {
                    return Err(EdgeError::UnknownNode(end.clone()));
                }
            }
            if !triples.insert((e.from_id.as_str(), e.to_id.as_str(), e.subtype)) {
                return Err(EdgeError::Duplicate { from: e.from_id.clone(), to: e.to_id.clone(), subtype: e.subtype });
            }
        }
        Ok(())
    }
}

/// Pairs worth classifying: every shadow edge (citing → anchor) first, then
/// every pair of papers co-supporting an anomaly, strongest anomaly first.
/// Anomaly pairs are ordered by (year, id). A pair already listed in either
/// direction is not repeated. The list is cut at `cap`.
pub fn candidate_pairs(
    corpus: &[PaperRecord],
    shadow: &CitationShadow,
    anomalies: &[ConvergentAnomaly],
    cap: usize,
) -> Vec<(String, String)> {
    let year: BTreeMap<&str, Option<i32>> = corpus.iter().map(|p| (p.id.as_str(), p.year)).collect();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |a: &str, b: &str, out: &mut Vec<(String, String)>| {
        if a == b {
            return;
        }
        let key = if a < b { (String::from(a), String::from(b)) } else { (String::from(b), String::from(a)) };
        if seen.insert(key) {
            out.push((String::from(a), String::from(b)));
        }
    };
    for (from, to) in &shadow.shadow_edges {
        push(from, to, &mut out);
    }
    for anomaly in anomalies {
        let mut members: Vec<&str> =
            anomaly.paper_ids.iter().map(String::as_str).filter(|id| year.contains_key(id)).collect();
        members.sort_by(|a, b| year[a].cmp(&year[b]).then(a.cmp(b)));
        members.dedup();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                push(a, b, &mut out);
            }
        }
    }
    out.truncate(cap);
    out
}

/// Anomalies grouped by shared papers (transitively), as index lists in
/// order of each group's first anomaly.
pub fn anomaly_groups(anomalies: &[ConvergentAnomaly]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..anomalies.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, a) in anomalies.iter().enumerate() {
        for p in &a.paper_ids {
            match owner.get(p.as_str()) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
                None => {
                    owner.insert(p, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..anomalies.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assemblage {
    pub title: String,
    pub narrative: String,
    pub anomaly_refs: Vec<String>,
    pub paper_ids: Vec<String>,
}

pub const FALLBACK_TITLE_PREFIX: &str = "Becoming: ";

/// True when the first word is a present participle: ASCII letters ending
/// in `ing`, followed by a non-word character or the end of the title.
pub fn is_present_participle_title(title: &str) -> bool {
    let letters = title.bytes().take_while(u8::is_ascii_alphabetic).count();
    if letters < 4 || !title[..letters].ends_with("ing") {
        return false;
    }
    match title[letters..].chars().next() {
        None => true,
        Some(c) => !(c.is_alphanumeric() || c == '_'),
    }
}

pub fn fallback_title(title: &str) -> String {
    format!("{FALLBACK_TITLE_PREFIX}{}", title.trim())
}

pub fn title_conforms(title: &str) -> bool {
    is_present_participle_title(title) || title.starts_with(FALLBACK_TITLE_PREFIX)
}
