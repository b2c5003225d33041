use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// A DOI in canonical form: lowercase, no resolver prefix, starts with `10.`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedDoi(String);

impl NormalizedDoi {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for NormalizedDoi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

const PREFIXES: &[&str] = &[
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "dx.doi.org/",
    "doi:",
];

pub fn normalize_doi(raw: &str) -> Option<NormalizedDoi> {
    let mut s = raw.trim().to_lowercase();
    loop {
        let before = s.len();
        for prefix in PREFIXES {
            if let Some(rest) = s.strip_prefix(prefix) {
                s = String::from(rest.trim_start());
            }
        }
        if s.len() == before {
            break;
        }
    }
    let s = s.trim();
    s.starts_with("10.").then(|| NormalizedDoi(String::from(s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(s: &str) -> Option<String> {
        normalize_doi(s).map(NormalizedDoi::into_string)
    }

    #[test]
    fn resolver_prefix() {
        assert_eq!(norm("https://doi.org/10.1000/ABC").as_deref(), Some("10.1000/abc"));
        assert_eq!(norm(" http://dx.doi.org/10.1/x ").as_deref(), Some("10.1/x"));
    }

    #[test]
    fn scheme_prefix() {
        assert_eq!(norm("DOI:10.5555/X.Y").as_deref(), Some("10.5555/x.y"));
        assert_eq!(norm("doi: 10.5555/z").as_deref(), Some("10.5555/z"));
    }

    #[test]
    fn not_a_doi() {
        assert_eq!(norm("not-a-doi"), None);
        assert_eq!(norm(""), None);
        assert_eq!(norm("https://example.org/10.1/x"), None);
    }

    #[test]
    fn idempotent() {
        let once = norm("https://doi.org/10.1000/ABC").unwrap();
        assert_eq!(norm(&once).unwrap(), once);
    }
}
