//! Theoretical lenses: validation of generated lens sets, deterministic
//! signal counting, and the split between agent-read and counted papers.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::paper::PaperRecord;
use crate::text::{collapse_whitespace, words};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoreticalLens {
    pub name: String,
    pub description: String,
    pub signal_vocabulary: Vec<String>,
    pub rationale: String,
}

impl TheoreticalLens {
    /// Trims text fields and lowercases/collapses vocabulary terms.
    pub fn normalized(mut self) -> Self {
        self.name = collapse_whitespace(&self.name);
        self.description = collapse_whitespace(&self.description);
        self.rationale = collapse_whitespace(&self.rationale);
        self.signal_vocabulary =
            self.signal_vocabulary.iter().map(|t| collapse_whitespace(&t.to_lowercase())).collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensSetRules {
    pub min_lenses: usize,
    pub max_lenses: usize,
    pub min_vocabulary: usize,
    pub max_vocabulary: usize,
    /// Pairwise vocabulary Jaccard must not exceed this.
    pub max_jaccard: f64,
}

impl Default for LensSetRules {
    fn default() -> Self {
        LensSetRules { min_lenses: 3, max_lenses: 5, min_vocabulary: 5, max_vocabulary: 15, max_jaccard: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LensSetViolation {
    #[error("expected {min}..={max} lenses, got {got}")]
    Count { got: usize, min: usize, max: usize },
    #[error("lens has an empty name")]
    EmptyName,
    #[error("lens name {0:?} is not unique")]
    DuplicateName(String),
    #[error("lens {lens:?} has {got} vocabulary terms, expected {min}..={max}")]
    VocabularySize { lens: String, got: usize, min: usize, max: usize },
    #[error("lens {lens:?} vocabulary term {term:?} is empty, repeated or not lowercase")]
    VocabularyTerm { lens: String, term: String },
    #[error("lenses {a:?} and {b:?} overlap: vocabulary jaccard {jaccard:.3} > {max}")]
    NotOrthogonal { a: String, b: String, jaccard: f64, max: f64 },
}

/// |A∩B| / |A∪B| over distinct vocabulary terms; 0 when both are empty.
pub fn vocabulary_jaccard(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

pub fn validate_lens_set(lenses: &[TheoreticalLens], rules: &LensSetRules) -> Result<(), LensSetViolation> {
    if lenses.len() < rules.min_lenses || lenses.len() > rules.max_lenses {
        return Err(LensSetViolation::Count { got: lenses.len(), min: rules.min_lenses, max: rules.max_lenses });
    }
    let mut names = BTreeSet::new();
    for lens in lenses {
        if lens.name.trim().is_empty() {
            return Err(LensSetViolation::EmptyName);
        }
        if !names.insert(lens.name.trim().to_lowercase()) {
            return Err(LensSetViolation::DuplicateName(lens.name.clone()));
        }
        let vocab = &lens.signal_vocabulary;
        if vocab.len() < rules.min_vocabulary || vocab.len() > rules.max_vocabulary {
            return Err(LensSetViolation::VocabularySize {
                lens: lens.name.clone(),
                got: vocab.len(),
                min: rules.min_vocabulary,
                max: rules.max_vocabulary,
            });
        }
        let mut seen = BTreeSet::new();
        for term in vocab {
            if term.trim().is_empty() || term.to_lowercase() != *term || !seen.insert(term.as_str()) {
                return Err(LensSetViolation::VocabularyTerm { lens: lens.name.clone(), term: term.clone() });
            }
        }
    }
    for (i, a) in lenses.iter().enumerate() {
        for b in &lenses[i + 1..] {
            let jaccard = vocabulary_jaccard(&a.signal_vocabulary, &b.signal_vocabulary);
            if jaccard > rules.max_jaccard {
                return Err(LensSetViolation::NotOrthogonal {
                    a: a.name.clone(),
                    b: b.name.clone(),
                    jaccard,
                    max: rules.max_jaccard,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalHit {
    pub term: String,
    pub count: usize,
}

/// Vocabulary hits for one paper under one lens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperSignals {
    pub paper_id: String,
    pub hits: Vec<SignalHit>,
    pub total: usize,
}

/// One lens's reading of one paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensReading {
    pub lens_name: String,
    pub paper_id: String,
    pub signal_hits: Vec<SignalHit>,
    pub tensions: Vec<String>,
    pub relevance: f64,
    pub confidence: f64,
    /// True when a lens agent produced the tensions; false for counted-only readings.
    pub agent_read: bool,
}

/// Counts whole-word, case-insensitive occurrences of `term` (which may be a
/// multi-word phrase) in a tokenized text. Overlapping phrase matches count.
pub fn count_term(text_words: &[String], term: &str) -> usize {
    let term_words = words(term);
    if term_words.is_empty() || term_words.len() > text_words.len() {
        return 0;
    }
    text_words.windows(term_words.len()).filter(|w| *w == term_words.as_slice()).count()
}

/// Deterministic vocabulary hits over title + abstract for every paper, in
/// corpus order. Terms with zero hits are omitted.
pub fn prefilter_signals(lens: &TheoreticalLens, corpus: &[PaperRecord]) -> Vec<PaperSignals> {
    corpus
        .iter()
        .map(|paper| {
            let text_words = words(&paper.text());
            let hits: Vec<SignalHit> = lens
                .signal_vocabulary
                .iter()
                .map(|term| SignalHit { term: term.clone(), count: count_term(&text_words, term) })
                .filter(|h| h.count > 0)
                .collect();
            let total = hits.iter().map(|h| h.count).sum();
            PaperSignals { paper_id: paper.id.clone(), hits, total }
        })
        .collect()
}

/// Ids of the papers a lens agent reads: the `top_m` by hit total, ties
/// going to the newer year and then the smaller id. `None` reads everything.
pub fn select_for_reading(signals: &[PaperSignals], corpus: &[PaperRecord], top_m: Option<usize>) -> BTreeSet<String> {
    let mut order: Vec<(&PaperSignals, Option<i32>)> =
        signals.iter().map(|s| (s, corpus.iter().find(|p| p.id == s.paper_id).and_then(|p| p.year))).collect();
    order.sort_by(|(a, ya), (b, yb)| b.total.cmp(&a.total).then(yb.cmp(ya)).then(a.paper_id.cmp(&b.paper_id)));
    let take = top_m.unwrap_or(usize::MAX);
    order.into_iter().take(take).map(|(s, _)| s.paper_id.clone()).collect()
}

/// Reading for a paper outside the agent budget: no tensions, relevance is
/// the hit total scaled by the corpus maximum.
pub fn counted_reading(lens_name: &str, signals: &PaperSignals, max_total: usize) -> LensReading {
    let relevance = if max_total == 0 { 0.0 } else { signals.total as f64 / max_total as f64 };
    LensReading {
        lens_name: String::from(lens_name),
        paper_id: signals.paper_id.clone(),
        signal_hits: signals.hits.clone(),
        tensions: Vec::new(),
        relevance,
        confidence: 1.0,
        agent_read: false,
    }
}
