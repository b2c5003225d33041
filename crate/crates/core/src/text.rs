//! Small text normalizers shared across modules.

use alloc::string::String;
use alloc::vec::Vec;

/// Trims and collapses every run of whitespace to a single space.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Lowercases, maps every non-alphanumeric character to a space and
/// collapses whitespace. This is the form trigram matching works on.
pub fn normalize_for_matching(s: &str) -> String {
    let mapped: String =
        s.chars().flat_map(char::to_lowercase).map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    collapse_whitespace(&mapped)
}

/// Journal-name key: lowercase, punctuation removed, whitespace collapsed.
pub fn normalize_journal(s: &str) -> String {
    let stripped: String =
        s.chars().flat_map(char::to_lowercase).filter(|c| c.is_alphanumeric() || c.is_whitespace()).collect();
    collapse_whitespace(&stripped)
}

/// Lowercase alphanumeric word tokens.
pub fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

/// Canonical form of a tension statement: lowercase, trimmed, whitespace
/// collapsed, trailing punctuation removed.
pub fn canonical_tension(s: &str) -> String {
    let lowered = collapse_whitespace(&s.to_lowercase());
    let stripped = lowered.trim_end_matches(|c: char| c.is_ascii_punctuation() || c == '…');
    String::from(stripped.trim_end())
}

/// English stopwords removed before tf-idf term ranking and echo embeddings.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "across", "after", "again", "against", "all", "almost", "also", "although", "among", "an",
    "and", "another", "any", "are", "as", "at", "be", "because", "been", "before", "being", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "done", "due", "during", "each", "either", "et", "etc", "even",
    "ever", "every", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "him", "his", "how", "however", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "less", "many",
    "may", "might", "more", "most", "much", "must", "my", "neither", "no", "nor", "not", "now", "of", "off", "often",
    "on", "once", "one", "only", "or", "other", "others", "our", "ours", "out", "over", "own", "per", "rather", "same",
    "several", "she", "should", "since", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "then", "there", "these", "they", "this", "those", "through", "thus", "to", "too", "two", "under", "until", "up",
    "upon", "us", "use", "used", "using", "very", "via", "was", "we", "well", "were", "what", "when", "where",
    "whether", "which", "while", "who", "whom", "whose", "why", "will", "with", "within", "without", "would", "yet",
    "you", "your",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.binary_search(&word).is_ok()
}

/// Content words used for vocabulary statistics: tokens of length ≥ 2 that
/// are not stopwords and not purely numeric.
pub fn content_words(s: &str) -> Vec<String> {
    words(s)
        .into_iter()
        .filter(|w| w.chars().count() >= 2 && !is_stopword(w) && !w.chars().all(|c| c.is_numeric()))
        .collect()
}
