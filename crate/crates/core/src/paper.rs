//! Scholarly work records and their normalization from source payloads.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::integrity::normalize_doi;
use crate::text::collapse_whitespace;

/// Where a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    OpenAlex,
    Arxiv,
    HeterodoxReentry,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::OpenAlex => "open-alex",
            SourceKind::Arxiv => "arxiv",
            SourceKind::HeterodoxReentry => "heterodox-reentry",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Academic Journal Guide rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AbsRank {
    #[serde(rename = "4*")]
    FourStar,
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "1")]
    One,
}

impl AbsRank {
    pub const ALL: [AbsRank; 5] = [AbsRank::FourStar, AbsRank::Four, AbsRank::Three, AbsRank::Two, AbsRank::One];

    pub fn parse(s: &str) -> Option<AbsRank> {
        match s.trim() {
            "4*" => Some(AbsRank::FourStar),
            "4" => Some(AbsRank::Four),
            "3" => Some(AbsRank::Three),
            "2" => Some(AbsRank::Two),
            "1" => Some(AbsRank::One),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AbsRank::FourStar => "4*",
            AbsRank::Four => "4",
            AbsRank::Three => "3",
            AbsRank::Two => "2",
            AbsRank::One => "1",
        }
    }
}

/// One deduplicated scholarly work: metadata plus abstract, never full text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub source: SourceKind,
    pub doi: Option<String>,
    pub title: String,
    pub abstract_text: Option<String>,
    pub authors: Vec<String>,
    pub venue: Option<String>,
    pub year: Option<i32>,
    pub cited_by_count: u64,
    pub referenced_ids: Vec<String>,
    pub abs_rank: Option<AbsRank>,
    pub heterodox_flag: bool,
    pub rigor_weight: f64,
}

impl PaperRecord {
    /// Title and abstract joined, the text every lens and term count reads.
    pub fn text(&self) -> String {
        match &self.abstract_text {
            Some(abs) if !abs.is_empty() => {
                let mut s = String::with_capacity(self.title.len() + abs.len() + 1);
                s.push_str(&self.title);
                s.push(' ');
                s.push_str(abs);
                s
            }
            _ => self.title.clone(),
        }
    }

    /// Number of optional metadata fields carrying a value.
    pub fn populated_fields(&self) -> usize {
        [
            self.doi.is_some(),
            self.abstract_text.as_deref().is_some_and(|a| !a.is_empty()),
            !self.authors.is_empty(),
            self.venue.is_some(),
            self.year.is_some(),
            !self.referenced_ids.is_empty(),
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }
}

/// A source payload after parsing but before normalization. Identifiers are
/// already namespaced (`openalex:W…`, `arxiv:…`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub native_id: String,
    pub doi: Option<String>,
    pub title: Option<String>,
    pub abstract_text: Option<String>,
    pub abstract_inverted_index: Option<BTreeMap<String, Vec<usize>>>,
    pub authors: Vec<String>,
    pub venue: Option<String>,
    pub year: Option<i32>,
    pub cited_by_count: u64,
    pub referenced_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordRejection {
    #[error("untitled")]
    Untitled,
    #[error("missing identifier")]
    MissingId,
}

/// Rebuilds abstract text from a word → positions index.
pub fn reconstruct_abstract(index: &BTreeMap<String, Vec<usize>>) -> String {
    let mut placed: Vec<(usize, &str)> =
        index.iter().flat_map(|(word, positions)| positions.iter().map(move |p| (*p, word.as_str()))).collect();
    placed.sort_unstable();
    let mut out = String::new();
    for (_, word) in placed {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Turns a parsed source payload into a [`PaperRecord`] with ranking fields
/// at their pre-ranking defaults.
pub fn normalize_record(raw: SourceRecord, source: SourceKind) -> Result<PaperRecord, RecordRejection> {
    if raw.native_id.trim().is_empty() {
        return Err(RecordRejection::MissingId);
    }
    let title = raw.title.as_deref().map(collapse_whitespace).unwrap_or_default();
    if title.is_empty() {
        return Err(RecordRejection::Untitled);
    }
    let abstract_text = match (raw.abstract_text, raw.abstract_inverted_index) {
        (Some(text), _) if !text.trim().is_empty() => Some(collapse_whitespace(&text)),
        (_, Some(index)) if !index.is_empty() => Some(collapse_whitespace(&reconstruct_abstract(&index))),
        _ => None,
    };
    let venue = raw.venue.map(|v| collapse_whitespace(&v)).filter(|v| !v.is_empty());
    let authors = raw.authors.iter().map(|a| collapse_whitespace(a)).filter(|a| !a.is_empty()).collect();

    Ok(PaperRecord {
        id: String::from(raw.native_id.trim()),
        source,
        doi: raw.doi.as_deref().and_then(normalize_doi).map(|d| d.into_string()),
        title,
        abstract_text,
        authors,
        venue,
        year: raw.year,
        cited_by_count: raw.cited_by_count,
        referenced_ids: raw.referenced_ids,
        abs_rank: None,
        heterodox_flag: false,
        rigor_weight: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn raw(title: Option<&str>) -> SourceRecord {
        SourceRecord { native_id: "openalex:W1".into(), title: title.map(String::from), ..Default::default() }
    }

    #[test]
    fn title_whitespace_collapsed() {
        let rec = normalize_record(raw(Some("  A\n B ")), SourceKind::OpenAlex).unwrap();
        assert_eq!(rec.title, "A B");
        assert!(!rec.heterodox_flag);
        assert_eq!(rec.rigor_weight, 1.0);
    }

    #[test]
    fn inverted_index_abstract() {
        let mut r = raw(Some("t"));
        let mut idx = BTreeMap::new();
        idx.insert("energy".into(), vec![0]);
        idx.insert("flows".into(), vec![1]);
        r.abstract_inverted_index = Some(idx);
        let rec = normalize_record(r, SourceKind::OpenAlex).unwrap();
        assert_eq!(rec.abstract_text.as_deref(), Some("energy flows"));
    }

    #[test]
    fn repeated_words_in_index() {
        let mut idx = BTreeMap::new();
        idx.insert("data".into(), vec![0, 2]);
        idx.insert("about".into(), vec![1]);
        assert_eq!(reconstruct_abstract(&idx), "data about data");
    }

    #[test]
    fn untitled_rejected() {
        assert_eq!(normalize_record(raw(None), SourceKind::Arxiv), Err(RecordRejection::Untitled));
        assert_eq!(normalize_record(raw(Some(" \n ")), SourceKind::Arxiv).unwrap_err().to_string(), "untitled");
    }

    #[test]
    fn doi_normalized_on_ingest() {
        let mut r = raw(Some("x"));
        r.doi = Some("https://doi.org/10.1000/ABC".into());
        let rec = normalize_record(r, SourceKind::OpenAlex).unwrap();
        assert_eq!(rec.doi.as_deref(), Some("10.1000/abc"));
    }
}
