use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::IntegrityError;
use crate::paper::{AbsRank, PaperRecord};
use crate::text::normalize_journal;

/// Journal name → rank, keyed by [`normalize_journal`] form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsRankTable {
    entries: BTreeMap<String, AbsRank>,
}

impl AbsRankTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, journal: &str, rank: AbsRank) {
        let key = normalize_journal(journal);
        if !key.is_empty() {
            self.entries.insert(key, rank);
        }
    }

    pub fn lookup(&self, venue: &str) -> Option<AbsRank> {
        self.entries.get(&normalize_journal(venue)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<'a> FromIterator<(&'a str, AbsRank)> for AbsRankTable {
    fn from_iter<I: IntoIterator<Item = (&'a str, AbsRank)>>(iter: I) -> Self {
        let mut table = AbsRankTable::new();
        for (journal, rank) in iter {
            table.insert(journal, rank);
        }
        table
    }
}

/// Rigor weight per rank. Defaults are configuration, not calibrated values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankWeights {
    pub four_star: f64,
    pub four: f64,
    pub three: f64,
    pub two: f64,
    pub one: f64,
    pub unranked: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights { four_star: 1.0, four: 0.9, three: 0.75, two: 0.6, one: 0.5, unranked: 0.5 }
    }
}

impl RankWeights {
    pub fn weight(&self, rank: Option<AbsRank>) -> f64 {
        match rank {
            Some(AbsRank::FourStar) => self.four_star,
            Some(AbsRank::Four) => self.four,
            Some(AbsRank::Three) => self.three,
            Some(AbsRank::Two) => self.two,
            Some(AbsRank::One) => self.one,
            None => self.unranked,
        }
    }

    pub fn validate(&self) -> Result<(), IntegrityError> {
        let named = [
            ("4*", self.four_star),
            ("4", self.four),
            ("3", self.three),
            ("2", self.two),
            ("1", self.one),
            ("unranked", self.unranked),
        ];
        for (rank, value) in named {
            if !(0.0..=1.0).contains(&value) {
                return Err(IntegrityError::InvalidWeight { rank, value });
            }
        }
        Ok(())
    }
}

/// Populates `abs_rank`, `heterodox_flag` and `rigor_weight` in place.
/// Unranked and venueless records are flagged heterodox, never dropped.
pub fn assign_ranks(
    corpus: &mut [PaperRecord],
    table: &AbsRankTable,
    weights: &RankWeights,
) -> Result<(), IntegrityError> {
    weights.validate()?;
    for paper in corpus.iter_mut() {
        let rank = paper.venue.as_deref().and_then(|v| table.lookup(v));
        paper.abs_rank = rank;
        paper.heterodox_flag = rank.is_none();
        paper.rigor_weight = weights.weight(rank);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paper::SourceKind;
    use alloc::vec::Vec;

    fn paper(venue: Option<&str>) -> PaperRecord {
        PaperRecord {
            id: "x".into(),
            source: SourceKind::OpenAlex,
            doi: None,
            title: "t".into(),
            abstract_text: None,
            authors: Vec::new(),
            venue: venue.map(String::from),
            year: None,
            cited_by_count: 0,
            referenced_ids: Vec::new(),
            abs_rank: None,
            heterodox_flag: false,
            rigor_weight: 1.0,
        }
    }

    #[test]
    fn ranked_venue() {
        let table: AbsRankTable = [("Research Policy", AbsRank::Four)].into_iter().collect();
        let mut corpus = [paper(Some("research  policy."))];
        assign_ranks(&mut corpus, &table, &RankWeights::default()).unwrap();
        assert_eq!(corpus[0].abs_rank, Some(AbsRank::Four));
        assert!(!corpus[0].heterodox_flag);
        assert_eq!(corpus[0].rigor_weight, 0.9);
    }

    #[test]
    fn venueless_is_heterodox() {
        let table = AbsRankTable::new();
        let mut corpus = [paper(None), paper(Some("Unknown Quarterly"))];
        assign_ranks(&mut corpus, &table, &RankWeights::default()).unwrap();
        for p in &corpus {
            assert!(p.heterodox_flag);
            assert_eq!(p.abs_rank, None);
            assert_eq!(p.rigor_weight, 0.5);
        }
    }

    #[test]
    fn configured_weights_applied() {
        let table: AbsRankTable = [("A", AbsRank::FourStar), ("B", AbsRank::One)].into_iter().collect();
        let weights = RankWeights { four_star: 0.8, one: 0.3, unranked: 0.1, ..RankWeights::default() };
        let mut corpus = [paper(Some("A")), paper(Some("B")), paper(Some("C"))];
        assign_ranks(&mut corpus, &table, &weights).unwrap();
        let got: Vec<f64> = corpus.iter().map(|p| p.rigor_weight).collect();
        assert_eq!(got, [0.8, 0.3, 0.1]);
    }

    #[test]
    fn out_of_range_weight_rejected() {
        let weights = RankWeights { two: 1.2, ..RankWeights::default() };
        assert!(assign_ranks(&mut [], &AbsRankTable::new(), &weights).is_err());
    }
}
