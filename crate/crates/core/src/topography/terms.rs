//! tf-idf vocabulary for clusters.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::content_words;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermScore {
    pub term: String,
    pub score: f64,
}

/// Document frequencies over a corpus of texts.
#[derive(Debug, Clone, Default)]
pub struct DocumentFrequencies {
    docs: usize,
    df: BTreeMap<String, usize>,
}

impl DocumentFrequencies {
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut out = DocumentFrequencies::default();
        for text in texts {
            out.docs += 1;
            let distinct: BTreeSet<String> = content_words(text).into_iter().collect();
            for w in distinct {
                *out.df.entry(w).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0).max(1);
        libm::log(self.docs.max(1) as f64 / df as f64)
    }
}

/// Terms of the concatenated member texts ranked by `tf · ln(N/df)`,
/// ties lexicographic. Terms scoring zero (present in every document) are
/// dropped.
pub fn top_terms<'a>(members: impl IntoIterator<Item = &'a str>, df: &DocumentFrequencies, k: usize) -> Vec<TermScore> {
    let mut tf: BTreeMap<String, usize> = BTreeMap::new();
    for text in members {
        for w in content_words(text) {
            *tf.entry(w).or_insert(0) += 1;
        }
    }
    let mut scored: Vec<TermScore> = tf
        .into_iter()
        .map(|(term, count)| {
            let score = count as f64 * df.idf(&term);
            TermScore { term, score }
        })
        .filter(|t| t.score > 0.0)
        .collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
    scored.truncate(k);
    scored
}
