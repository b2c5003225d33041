//! OpenAlex works endpoint: request URLs and page parsing.

use std::collections::BTreeMap;

use rhizome_core::{SourceKind, SourceRecord};
use serde::Deserialize;

use super::transport::SourceRequest;
use super::{FetchQuery, ParsedPage};

pub const WORKS_ENDPOINT: &str = "https://api.openalex.org/works";
pub const MAX_PER_PAGE: usize = 200;

/// Page numbers are 1-based on the wire.
pub fn page_request(q: &FetchQuery, page: usize, per_page: usize) -> SourceRequest {
    let mut filter = format!("title_and_abstract.search:{}", q.zone_text.replace(',', " "));
    if let Some((from, to)) = q.year_range {
        filter.push_str(&format!(",publication_year:{from}-{to}"));
    }
    let url = reqwest::Url::parse_with_params(
        WORKS_ENDPOINT,
        &[("filter", filter), ("per-page", per_page.to_string()), ("page", (page + 1).to_string())],
    )
    .expect("static endpoint");
    SourceRequest { source: SourceKind::OpenAlex, url: url.into() }
}

#[derive(Deserialize)]
struct WorksPage {
    results: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
struct Work {
    id: String,
    doi: Option<String>,
    title: Option<String>,
    display_name: Option<String>,
    abstract_inverted_index: Option<BTreeMap<String, Vec<usize>>>,
    #[serde(default)]
    authorships: Vec<Authorship>,
    primary_location: Option<Location>,
    publication_year: Option<i32>,
    #[serde(default)]
    cited_by_count: u64,
    #[serde(default)]
    referenced_works: Vec<String>,
}

#[derive(Deserialize)]
struct Authorship {
    author: Option<Author>,
}

#[derive(Deserialize)]
struct Author {
    display_name: Option<String>,
}

#[derive(Deserialize)]
struct Location {
    source: Option<Venue>,
}

#[derive(Deserialize)]
struct Venue {
    display_name: Option<String>,
}

/// `https://openalex.org/W123` → `openalex:W123`.
pub fn native_id(url_or_key: &str) -> String {
    let key = url_or_key.rsplit('/').next().unwrap_or(url_or_key);
    format!("openalex:{key}")
}

fn to_record(work: Work) -> SourceRecord {
    SourceRecord {
        native_id: native_id(&work.id),
        doi: work.doi,
        title: work.title.or(work.display_name),
        abstract_text: None,
        abstract_inverted_index: work.abstract_inverted_index,
        authors: work.authorships.into_iter().filter_map(|a| a.author?.display_name).collect(),
        venue: work.primary_location.and_then(|l| l.source?.display_name),
        year: work.publication_year,
        cited_by_count: work.cited_by_count,
        referenced_ids: work.referenced_works.iter().map(|r| native_id(r)).collect(),
    }
}

/// Parses one works page. Individual works that do not fit the expected
/// shape are counted as malformed rather than failing the page.
pub fn parse_page(body: &str) -> Result<ParsedPage, serde_json::Error> {
    let page: WorksPage = serde_json::from_str(body)?;
    let mut out = ParsedPage { records: Vec::new(), malformed: 0, returned: page.results.len() };
    for value in page.results {
        match serde_json::from_value::<Work>(value) {
            Ok(work) => out.records.push(to_record(work)),
            Err(e) => {
                tracing::debug!(error = %e, "malformed OpenAlex work");
                out.malformed += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_work_and_reconstructs_ids() {
        let body = r#"{"meta":{"count":2},"results":[
            {"id":"https://openalex.org/W1","doi":"https://doi.org/10.1/X","title":"Grid entropy",
             "abstract_inverted_index":{"grid":[0],"entropy":[1]},
             "authorships":[{"author":{"display_name":"A. Author"}}],
             "primary_location":{"source":{"display_name":"Energy Policy"}},
             "publication_year":2019,"cited_by_count":4,
             "referenced_works":["https://openalex.org/W9"]},
            {"id":42}
        ]}"#;
        let page = parse_page(body).unwrap();
        assert_eq!(page.returned, 2);
        assert_eq!(page.malformed, 1);
        let r = &page.records[0];
        assert_eq!(r.native_id, "openalex:W1");
        assert_eq!(r.referenced_ids, ["openalex:W9"]);
        assert_eq!(r.venue.as_deref(), Some("Energy Policy"));
        assert_eq!(r.authors, ["A. Author"]);
    }

    #[test]
    fn request_has_filter_and_paging() {
        let q = FetchQuery::new("energy-information nexus", 25);
        let url = page_request(&q, 0, 25).url;
        assert!(url.starts_with(WORKS_ENDPOINT));
        assert!(url.contains("title_and_abstract.search%3Aenergy-information+nexus"));
        assert!(url.contains("per-page=25"));
        assert!(url.contains("page=1"));
        assert!(!url.contains("mailto"));
    }
}
