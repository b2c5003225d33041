//! arXiv query API: request URLs and Atom feed parsing.

use quick_xml::events::Event;
use quick_xml::Reader;
use rhizome_core::{SourceKind, SourceRecord};

use super::transport::SourceRequest;
use super::{FetchQuery, ParsedPage};

pub const QUERY_ENDPOINT: &str = "https://export.arxiv.org/api/query";
pub const MAX_PER_PAGE: usize = 100;

pub fn page_request(q: &FetchQuery, page: usize, per_page: usize) -> SourceRequest {
    let mut search = format!("all:\"{}\"", q.zone_text.replace('"', " "));
    if let Some((from, to)) = q.year_range {
        search.push_str(&format!(" AND submittedDate:[{from}01010000 TO {to}12312359]"));
    }
    let url = reqwest::Url::parse_with_params(
        QUERY_ENDPOINT,
        &[
            ("search_query", search),
            ("start", (page * per_page).to_string()),
            ("max_results", per_page.to_string()),
            ("sortBy", "relevance".to_string()),
        ],
    )
    .expect("static endpoint");
    SourceRequest { source: SourceKind::Arxiv, url: url.into() }
}

/// `http://arxiv.org/abs/2101.00001v2` → `arxiv:2101.00001`.
pub fn native_id(abs_url: &str) -> Option<String> {
    let key = abs_url.trim().split("/abs/").nth(1)?;
    let key = match key.rfind('v') {
        Some(i) if i > 0 && key[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < key.len() => &key[..i],
        _ => key,
    };
    (!key.is_empty()).then(|| format!("arxiv:{key}"))
}

#[derive(Default)]
struct Entry {
    id: Option<String>,
    title: Option<String>,
    summary: Option<String>,
    published: Option<String>,
    doi: Option<String>,
    authors: Vec<String>,
}

impl Entry {
    fn into_record(self) -> Option<SourceRecord> {
        let native_id = native_id(self.id.as_deref()?)?;
        let year = self.published.as_deref().and_then(|p| p.get(..4)).and_then(|y| y.parse().ok());
        Some(SourceRecord {
            native_id,
            doi: self.doi,
            title: self.title,
            abstract_text: self.summary,
            abstract_inverted_index: None,
            authors: self.authors,
            venue: None,
            year,
            cited_by_count: 0,
            referenced_ids: Vec::new(),
        })
    }
}

/// Parses an Atom feed. Entries without a usable `<id>` are malformed;
/// a feed that is not well-formed XML is an error.
pub fn parse_feed(body: &str) -> Result<ParsedPage, quick_xml::Error> {
    let mut reader = Reader::from_str(body);
    let mut out = ParsedPage::default();
    let mut entry: Option<Entry> = None;
    let mut path: Vec<String> = Vec::new();
    let mut text = String::new();
    loop {
        match reader.read_event()? {
            Event::Start(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                if name == "entry" {
                    entry = Some(Entry::default());
                }
                path.push(name);
                text.clear();
            }
            Event::Text(t) => {
                text.push_str(&t.decode().map_err(quick_xml::Error::from)?);
            }
            Event::GeneralRef(r) => {
                let name = r.decode().map_err(quick_xml::Error::from)?;
                text.push_str(match name.as_ref() {
                    "amp" => "&",
                    "lt" => "<",
                    "gt" => ">",
                    "quot" => "\"",
                    "apos" => "'",
                    _ => "",
                });
            }
            Event::CData(c) => text.push_str(&String::from_utf8_lossy(&c)),
            Event::End(_) => {
                let name = path.pop().unwrap_or_default();
                let parent = path.last().map(String::as_str);
                if let Some(e) = entry.as_mut() {
                    let value = text.trim().to_string();
                    match (name.as_str(), parent) {
                        ("id", Some("entry")) => e.id = Some(value),
                        ("title", Some("entry")) => e.title = Some(value),
                        ("summary", Some("entry")) => e.summary = Some(value),
                        ("published", Some("entry")) => e.published = Some(value),
                        ("doi", Some("entry")) => e.doi = Some(value),
                        ("name", Some("author")) => e.authors.push(value),
                        _ => {}
                    }
                }
                if name == "entry" {
                    out.returned += 1;
                    match entry.take().and_then(Entry::into_record) {
                        Some(r) => out.records.push(r),
                        None => out.malformed += 1,
                    }
                }
                text.clear();
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FEED: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom" xmlns:arxiv="http://arxiv.org/schemas/atom">
  <title>ArXiv Query</title>
  <entry>
    <id>http://arxiv.org/abs/2101.00001v2</id>
    <published>2021-01-04T10:00:00Z</published>
    <title>Data centres &amp; the
      grid</title>
    <summary>Entropy of computation.</summary>
    <author><name>B. Writer</name></author>
    <arxiv:doi>10.5555/abc</arxiv:doi>
  </entry>
  <entry><title>no id here</title></entry>
</feed>"#;

    #[test]
    fn parses_entries() {
        let page = parse_feed(FEED).unwrap();
        assert_eq!(page.returned, 2);
        assert_eq!(page.malformed, 1);
        let r = &page.records[0];
        assert_eq!(r.native_id, "arxiv:2101.00001");
        assert_eq!(r.title.as_deref(), Some("Data centres & the\n      grid"));
        assert_eq!(r.year, Some(2021));
        assert_eq!(r.doi.as_deref(), Some("10.5555/abc"));
        assert!(r.referenced_ids.is_empty());
    }

    #[test]
    fn version_suffix_stripped() {
        assert_eq!(native_id("http://arxiv.org/abs/hep-th/9901001v1").as_deref(), Some("arxiv:hep-th/9901001"));
        assert_eq!(native_id("http://arxiv.org/abs/2101.00001").as_deref(), Some("arxiv:2101.00001"));
        assert_eq!(native_id("nonsense"), None);
    }

    #[test]
    fn start_offset_follows_page() {
        let q = FetchQuery::new("degrowth", 10);
        let url = page_request(&q, 2, 10).url;
        assert!(url.contains("start=20"));
        assert!(url.contains("max_results=10"));
    }
}
