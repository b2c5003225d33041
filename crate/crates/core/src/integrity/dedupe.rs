use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::dice::TrigramSet;
use super::IntegrityError;
use crate::paper::PaperRecord;

pub const DEFAULT_DICE_THRESHOLD: f64 = 0.85;

/// Why the members of a cluster were merged. `Doi` wins when a cluster has
/// mixed evidence; `Identifier` covers records re-delivered under the same id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchBasis {
    Doi,
    TitleDice,
    Identifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicateCluster {
    pub canonical_id: String,
    /// Ids folded into the canonical record (the canonical id is not repeated).
    pub member_ids: Vec<String>,
    pub match_basis: MatchBasis,
    /// Weakest title link inside the cluster, present only for title-dice clusters.
    pub dice_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DedupeOutcome {
    pub corpus: Vec<PaperRecord>,
    pub clusters: Vec<DuplicateCluster>,
}

#[derive(Debug, Clone, Copy)]
enum LinkKind {
    Doi,
    Identifier,
    Title(f64),
}

#[derive(Debug, Clone, Copy)]
struct Link {
    a: usize,
    b: usize,
    kind: LinkKind,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index becomes the root so grouping is input-order stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn check_threshold(threshold: f64) -> Result<(), IntegrityError> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(IntegrityError::InvalidThreshold(threshold))
    }
}

fn group_links<K: Ord>(keys: impl Iterator<Item = (usize, K)>, kind: LinkKind, out: &mut Vec<Link>) {
    let mut first: BTreeMap<K, usize> = BTreeMap::new();
    for (i, key) in keys {
        match first.get(&key) {
            Some(&a) => out.push(Link { a, b: i, kind }),
            None => {
                first.insert(key, i);
            }
        }
    }
}

/// Every pair linked by shared DOI, shared id, or title Dice ≥ threshold.
///
/// Title candidates come from a trigram inverted index plus the set-size
/// bound `2·min(|A|,|B|)/(|A|+|B|)`; both filters are exact (a pair they
/// drop cannot reach the threshold), so the result equals an all-pairs scan.
fn find_links(records: &[&PaperRecord], threshold: f64) -> Vec<Link> {
    let mut links = Vec::new();
    group_links(
        records.iter().enumerate().filter_map(|(i, r)| r.doi.as_deref().map(|d| (i, d))),
        LinkKind::Doi,
        &mut links,
    );
    group_links(records.iter().enumerate().map(|(i, r)| (i, r.id.as_str())), LinkKind::Identifier, &mut links);

    let sets: Vec<TrigramSet> = records.iter().map(|r| TrigramSet::from_text(&r.title)).collect();
    let mut postings: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, set) in sets.iter().enumerate() {
        for g in set.iter() {
            postings.entry(g).or_default().push(i);
        }
    }
    let mut seen = vec![usize::MAX; records.len()];
    for (i, set) in sets.iter().enumerate() {
        for g in set.iter() {
            for &j in &postings[g] {
                if j <= i || seen[j] == i {
                    continue;
                }
                seen[j] = i;
                if set.dice_upper_bound(sets[j].len()) < threshold {
                    continue;
                }
                let score = set.dice(&sets[j]);
                if score >= threshold {
                    links.push(Link { a: i, b: j, kind: LinkKind::Title(score) });
                }
            }
        }
    }
    links
}

/// Preference order for the surviving record: more populated fields, then
/// OpenAlex before arXiv, then the smaller id.
fn preference(a: &PaperRecord, b: &PaperRecord) -> Ordering {
    b.populated_fields().cmp(&a.populated_fields()).then(a.source.cmp(&b.source)).then(a.id.cmp(&b.id))
}

struct Group {
    members: Vec<usize>,
    links: Vec<Link>,
}

fn connected_groups(n: usize, links: &[Link]) -> Vec<Group> {
    let mut uf = UnionFind::new(n);
    for l in links {
        uf.union(l.a, l.b);
    }
    let mut by_root: BTreeMap<usize, Group> = BTreeMap::new();
    for i in 0..n {
        let root = uf.find(i);
        by_root.entry(root).or_insert_with(|| Group { members: Vec::new(), links: Vec::new() }).members.push(i);
    }
    for l in links {
        let root = uf.find(l.a);
        if let Some(g) = by_root.get_mut(&root) {
            g.links.push(*l);
        }
    }
    by_root.into_values().collect()
}

fn basis_of(links: &[Link]) -> (MatchBasis, Option<f64>) {
    if links.iter().any(|l| matches!(l.kind, LinkKind::Doi)) {
        return (MatchBasis::Doi, None);
    }
    if links.iter().any(|l| matches!(l.kind, LinkKind::Identifier)) {
        return (MatchBasis::Identifier, None);
    }
    let weakest = links
        .iter()
        .filter_map(|l| match l.kind {
            LinkKind::Title(s) => Some(s),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    (MatchBasis::TitleDice, weakest.is_finite().then_some(weakest))
}

fn merge_into(canonical: &mut PaperRecord, other: &PaperRecord) {
    for r in &other.referenced_ids {
        if !canonical.referenced_ids.contains(r) {
            canonical.referenced_ids.push(r.clone());
        }
    }
    canonical.cited_by_count = canonical.cited_by_count.max(other.cited_by_count);
}

/// Merges records that share a normalized DOI or whose titles reach the
/// trigram Dice threshold. Merging is transitive. Output keeps input order
/// of each cluster's first member.
pub fn dedupe(records: Vec<PaperRecord>, threshold: f64) -> Result<DedupeOutcome, IntegrityError> {
    check_threshold(threshold)?;
    let refs: Vec<&PaperRecord> = records.iter().collect();
    let links = find_links(&refs, threshold);
    let mut corpus = Vec::new();
    let mut clusters = Vec::new();
    for group in connected_groups(records.len(), &links) {
        let best = *group
            .members
            .iter()
            .min_by(|a, b| preference(&records[**a], &records[**b]))
            .expect("groups are non-empty");
        let mut canonical = records[best].clone();
        if group.members.len() > 1 {
            let mut member_ids = Vec::new();
            for &m in group.members.iter().filter(|m| **m != best) {
                merge_into(&mut canonical, &records[m]);
                member_ids.push(records[m].id.clone());
            }
            let (match_basis, dice_score) = basis_of(&group.links);
            clusters.push(DuplicateCluster { canonical_id: canonical.id.clone(), member_ids, match_basis, dice_score });
        }
        corpus.push(canonical);
    }
    Ok(DedupeOutcome { corpus, clusters })
}

/// Dedupes `incoming` against an existing corpus that must not change.
///
/// Incoming records that match any existing record are dropped; the rest are
/// merged among themselves as in [`dedupe`]. The returned corpus holds only
/// the admitted incoming records.
pub fn dedupe_against(
    existing: &[PaperRecord],
    incoming: Vec<PaperRecord>,
    threshold: f64,
) -> Result<DedupeOutcome, IntegrityError> {
    check_threshold(threshold)?;
    let offset = existing.len();
    let refs: Vec<&PaperRecord> = existing.iter().chain(incoming.iter()).collect();
    let links = find_links(&refs, threshold);
    let mut corpus = Vec::new();
    let mut clusters = Vec::new();
    for group in connected_groups(refs.len(), &links) {
        let new_members: Vec<usize> = group.members.iter().copied().filter(|m| *m >= offset).collect();
        if new_members.is_empty() {
            continue;
        }
        let (match_basis, dice_score) = basis_of(&group.links);
        if let Some(&anchor) = group.members.iter().find(|m| **m < offset) {
            clusters.push(DuplicateCluster {
                canonical_id: existing[anchor].id.clone(),
                member_ids: new_members.iter().map(|m| refs[*m].id.clone()).collect(),
                match_basis,
                dice_score,
            });
            continue;
        }
        let best = *new_members.iter().min_by(|a, b| preference(refs[**a], refs[**b])).expect("non-empty");
        let mut canonical = refs[best].clone();
        if new_members.len() > 1 {
            let mut member_ids = Vec::new();
            for &m in new_members.iter().filter(|m| **m != best) {
                merge_into(&mut canonical, refs[m]);
                member_ids.push(refs[m].id.clone());
            }
            clusters.push(DuplicateCluster { canonical_id: canonical.id.clone(), member_ids, match_basis, dice_score });
        }
        corpus.push(canonical);
    }
    Ok(DedupeOutcome { corpus, clusters })
}
