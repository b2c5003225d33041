use alloc::string::String;
use alloc::vec::Vec;

use crate::text::normalize_for_matching;

/// Distinct character trigrams of a normalized text, kept sorted.
///
/// Texts shorter than three characters after normalization contribute
/// themselves as a single token; the empty text has no trigrams.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigramSet {
    grams: Vec<String>,
}

impl TrigramSet {
    pub fn from_text(text: &str) -> Self {
        let normalized = normalize_for_matching(text);
        let chars: Vec<char> = normalized.chars().collect();
        let mut grams: Vec<String> = match chars.len() {
            0 => Vec::new(),
            1 | 2 => alloc::vec![normalized],
            _ => chars.windows(3).map(|w| w.iter().collect()).collect(),
        };
        grams.sort_unstable();
        grams.dedup();
        TrigramSet { grams }
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.grams.iter().map(String::as_str)
    }

    pub fn intersection_len(&self, other: &TrigramSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.grams.len() && j < other.grams.len() {
            match self.grams[i].cmp(&other.grams[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Sørensen–Dice coefficient `2|A∩B| / (|A|+|B|)`; two empty sets score 1.
    pub fn dice(&self, other: &TrigramSet) -> f64 {
        let total = self.len() + other.len();
        if total == 0 {
            return 1.0;
        }
        (2 * self.intersection_len(other)) as f64 / total as f64
    }

    /// Upper bound on the Dice score against any set of size `other_len`.
    pub fn dice_upper_bound(&self, other_len: usize) -> f64 {
        let total = self.len() + other_len;
        if total == 0 {
            return 1.0;
        }
        (2 * self.len().min(other_len)) as f64 / total as f64
    }
}

/// Trigram Dice similarity of two texts in `[0, 1]`.
pub fn dice(a: &str, b: &str) -> f64 {
    TrigramSet::from_text(a).dice(&TrigramSet::from_text(b))
}
