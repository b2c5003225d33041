use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::doi::normalize_doi;
use crate::paper::PaperRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub paper_id: String,
    pub citers: usize,
    /// In-corpus citers divided by corpus size.
    pub influence_score: f64,
}

/// Anchor papers and the in-corpus citation edges pointing at them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CitationShadow {
    pub anchors: Vec<Anchor>,
    /// `(citing id, anchor id)`.
    pub shadow_edges: Vec<(String, String)>,
}

/// Distinct in-corpus citations as `(citing index, cited index)`.
///
/// A reference resolves to a paper when it equals the paper's id or
/// normalizes to the paper's DOI. Self-citations are ignored.
pub fn citation_links(corpus: &[PaperRecord]) -> Vec<(usize, usize)> {
    let mut keys: BTreeMap<String, usize> = BTreeMap::new();
    for (i, p) in corpus.iter().enumerate() {
        keys.entry(p.id.clone()).or_insert(i);
        if let Some(doi) = &p.doi {
            keys.entry(doi.clone()).or_insert(i);
        }
    }
    let mut links = BTreeSet::new();
    for (i, p) in corpus.iter().enumerate() {
        for r in &p.referenced_ids {
            let hit = keys.get(r.as_str()).or_else(|| normalize_doi(r).and_then(|d| keys.get(d.as_str())));
            if let Some(&j) = hit {
                if j != i {
                    links.insert((i, j));
                }
            }
        }
    }
    links.into_iter().collect()
}

/// Top `anchor_count` most-cited-within-corpus papers (ties: older year,
/// then id; papers without a year sort after dated ones) and the citation
/// edges pointing at them.
pub fn build_citation_shadow(corpus: &[PaperRecord], anchor_count: usize) -> CitationShadow {
    let links = citation_links(corpus);
    let mut citers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(from, to) in &links {
        citers.entry(to).or_default().push(from);
    }
    let mut ranked: Vec<(usize, Vec<usize>)> = citers.into_iter().collect();
    ranked.sort_by(|(a, ca), (b, cb)| {
        cb.len()
            .cmp(&ca.len())
            .then_with(|| year_key(&corpus[*a]).cmp(&year_key(&corpus[*b])))
            .then_with(|| corpus[*a].id.cmp(&corpus[*b].id))
    });
    ranked.truncate(anchor_count);

    let n = corpus.len() as f64;
    let mut anchors = Vec::with_capacity(ranked.len());
    let mut shadow_edges = Vec::new();
    for (anchor, mut from) in ranked {
        from.sort_by(|a, b| corpus[*a].id.cmp(&corpus[*b].id));
        for f in &from {
            shadow_edges.push((corpus[*f].id.clone(), corpus[anchor].id.clone()));
        }
        anchors.push(Anchor {
            paper_id: corpus[anchor].id.clone(),
            citers: from.len(),
            influence_score: from.len() as f64 / n,
        });
    }
    CitationShadow { anchors, shadow_edges }
}

fn year_key(p: &PaperRecord) -> (bool, i32) {
    (p.year.is_none(), p.year.unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paper::SourceKind;
    use alloc::format;
    use alloc::vec;

    fn paper(id: &str, year: i32, refs: &[&str]) -> PaperRecord {
        PaperRecord {
            id: id.into(),
            source: SourceKind::OpenAlex,
            doi: None,
            title: id.into(),
            abstract_text: None,
            authors: Vec::new(),
            venue: None,
            year: Some(year),
            cited_by_count: 0,
            referenced_ids: refs.iter().map(|s| String::from(*s)).collect(),
            abs_rank: None,
            heterodox_flag: false,
            rigor_weight: 1.0,
        }
    }

    #[test]
    fn no_internal_citations() {
        let corpus = vec![paper("a", 2000, &["elsewhere"]), paper("b", 2001, &[])];
        assert_eq!(build_citation_shadow(&corpus, 10), CitationShadow::default());
    }

    #[test]
    fn chain_of_five() {
        let corpus: Vec<PaperRecord> = (1..=5)
            .map(|i| {
                let prev = format!("p{}", i - 1);
                let refs: Vec<&str> = if i > 1 { vec![prev.as_str()] } else { vec![] };
                paper(&format!("p{i}"), 2000 + i, &refs)
            })
            .collect();
        let shadow = build_citation_shadow(&corpus, 10);
        assert_eq!(shadow.anchors.len(), 4);
        assert!(shadow.anchors.iter().all(|a| a.citers == 1 && a.influence_score == 0.2));
        // equal counts: older first
        assert_eq!(shadow.anchors[0].paper_id, "p1");
        assert_eq!(shadow.shadow_edges[0], ("p2".into(), "p1".into()));
    }

    #[test]
    fn doi_references_resolve() {
        let mut cited = paper("openalex:W1", 2000, &[]);
        cited.doi = Some("10.1/abc".into());
        let citing = paper("arxiv:1", 2020, &["https://doi.org/10.1/ABC", "openalex:W1", "arxiv:1"]);
        let shadow = build_citation_shadow(&[cited, citing], 10);
        assert_eq!(shadow.shadow_edges, [("arxiv:1".into(), "openalex:W1".into())]);
        assert_eq!(shadow.anchors[0].citers, 1);
    }

    #[test]
    fn anchor_count_truncates() {
        let corpus =
            vec![paper("a", 2000, &[]), paper("b", 2000, &[]), paper("c", 2010, &["a", "b"]), paper("d", 2011, &["a"])];
        let shadow = build_citation_shadow(&corpus, 1);
        assert_eq!(shadow.anchors.len(), 1);
        assert_eq!(shadow.anchors[0].paper_id, "a");
        assert_eq!(shadow.shadow_edges.len(), 2);
    }
}
