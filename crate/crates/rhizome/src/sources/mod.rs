//! Concurrent fetching from OpenAlex and arXiv, through live or recorded transports.

pub mod arxiv;
pub mod openalex;
mod transport;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rhizome_core::{normalize_record, PaperRecord, SourceKind, SourceRecord};
use serde::{Deserialize, Serialize};

pub use transport::{
    get_with_retry, FixtureTransport, HttpTransport, RecordingTransport, RetryPolicy, SourceFixture, SourceRequest,
    Transport, TransportError,
};

pub const DEFAULT_HARD_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchQuery {
    pub zone_text: String,
    pub per_source_limit: usize,
    /// Inclusive publication-year bounds.
    pub year_range: Option<(i32, i32)>,
    pub mailto: Option<String>,
    /// Pages to skip before the first request.
    #[serde(default)]
    pub page_offset: usize,
}

impl FetchQuery {
    pub fn new(zone_text: &str, per_source_limit: usize) -> Self {
        FetchQuery {
            zone_text: zone_text.to_string(),
            per_source_limit,
            year_range: None,
            mailto: None,
            page_offset: 0,
        }
    }

    pub fn validate(&self, hard_cap: usize) -> Result<(), String> {
        if self.zone_text.trim().is_empty() {
            return Err("zone text is empty".into());
        }
        if self.per_source_limit > hard_cap {
            return Err(format!("per-source limit {} exceeds the hard cap {hard_cap}", self.per_source_limit));
        }
        if let Some((from, to)) = self.year_range {
            if from > to {
                return Err(format!("year range {from}-{to} is reversed"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceStats {
    pub requested: usize,
    pub received: usize,
    /// Records skipped as malformed or rejected during normalization.
    pub failed: usize,
    pub latency_ms: u64,
    /// True when the transport gave up; `received` then holds what arrived before.
    pub transport_failed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FetchReport {
    pub per_source: BTreeMap<SourceKind, SourceStats>,
}

impl FetchReport {
    pub fn received(&self) -> usize {
        self.per_source.values().map(|s| s.received).sum()
    }

    pub fn merge(&mut self, other: FetchReport) {
        for (kind, s) in other.per_source {
            let e = self.per_source.entry(kind).or_default();
            e.requested += s.requested;
            e.received += s.received;
            e.failed += s.failed;
            e.latency_ms += s.latency_ms;
            e.transport_failed |= s.transport_failed;
            e.failures.extend(s.failures);
        }
    }
}

/// Records parsed from one response page.
#[derive(Debug, Default)]
pub struct ParsedPage {
    pub records: Vec<SourceRecord>,
    pub malformed: usize,
    /// Entries on the page, well-formed or not.
    pub returned: usize,
}

#[derive(Clone)]
pub struct SourceClients {
    pub transport: Arc<dyn Transport>,
    pub retry: RetryPolicy,
    pub openalex_per_page: usize,
    pub arxiv_per_page: usize,
}

impl SourceClients {
    pub fn new(transport: Arc<dyn Transport>, retry: RetryPolicy) -> Self {
        SourceClients {
            transport,
            retry,
            openalex_per_page: openalex::MAX_PER_PAGE,
            arxiv_per_page: arxiv::MAX_PER_PAGE,
        }
    }
}

/// Raw records from one source plus the stats describing the fetch.
#[derive(Debug)]
pub struct SourceFetch {
    pub records: Vec<SourceRecord>,
    pub stats: SourceStats,
}

/// Fetches up to `q.per_source_limit` raw records from one source, paging
/// sequentially. A transport failure after retries ends the fetch; records
/// from earlier pages are kept and the failure is recorded.
pub async fn fetch_source(kind: SourceKind, q: &FetchQuery, clients: &SourceClients) -> SourceFetch {
    let started = Instant::now();
    let mut stats = SourceStats { requested: q.per_source_limit, ..Default::default() };
    let mut records = Vec::new();
    if q.per_source_limit == 0 {
        return SourceFetch { records, stats };
    }
    let max_per_page = match kind {
        SourceKind::OpenAlex => clients.openalex_per_page,
        SourceKind::Arxiv => clients.arxiv_per_page,
        SourceKind::HeterodoxReentry => {
            stats.transport_failed = true;
            stats.failures.push("heterodox-reentry is not a fetchable source".into());
            return SourceFetch { records, stats };
        }
    };
    let per_page = q.per_source_limit.min(max_per_page).max(1);
    let mut page = q.page_offset;
    while records.len() < q.per_source_limit {
        let request = match kind {
            SourceKind::OpenAlex => openalex::page_request(q, page, per_page),
            _ => arxiv::page_request(q, page, per_page),
        };
        let body = match get_with_retry(clients.transport.as_ref(), &request, clients.retry).await {
            Ok(b) => b,
            Err(e) => {
                stats.transport_failed = true;
                stats.failures.push(e.to_string());
                break;
            }
        };
        let parsed = match kind {
            SourceKind::OpenAlex => openalex::parse_page(&body).map_err(|e| e.to_string()),
            _ => arxiv::parse_feed(&body).map_err(|e| e.to_string()),
        };
        let parsed = match parsed {
            Ok(p) => p,
            Err(e) => {
                stats.failures.push(format!("unparseable page {}: {e}", page + 1));
                stats.failed += 1;
                break;
            }
        };
        stats.failed += parsed.malformed;
        let room = q.per_source_limit - records.len();
        records.extend(parsed.records.into_iter().take(room));
        if parsed.returned < per_page {
            break;
        }
        page += 1;
    }
    stats.received = records.len();
    stats.latency_ms = started.elapsed().as_millis() as u64;
    SourceFetch { records, stats }
}

/// Fetches every source concurrently and normalizes the results, ordered by
/// (source, id). Records are tagged with their fetching source unless
/// `tag` overrides it. One source failing leaves the others' records intact.
pub async fn ingest_from(
    q: &FetchQuery,
    sources: &[SourceKind],
    clients: &SourceClients,
    tag: Option<SourceKind>,
) -> (Vec<PaperRecord>, FetchReport) {
    let fetches = futures::future::join_all(
        sources.iter().map(|kind| async move { (*kind, fetch_source(*kind, q, clients).await) }),
    )
    .await;
    let mut report = FetchReport::default();
    let mut corpus = Vec::new();
    for (kind, fetch) in fetches {
        let mut stats = fetch.stats;
        for raw in fetch.records {
            match normalize_record(raw, tag.unwrap_or(kind)) {
                Ok(rec) => corpus.push(rec),
                Err(e) => {
                    stats.failed += 1;
                    stats.received -= 1;
                    stats.failures.push(format!("record rejected: {e}"));
                }
            }
        }
        report.per_source.insert(kind, stats);
    }
    corpus.sort_by(|a, b| (a.source, &a.id).cmp(&(b.source, &b.id)));
    (corpus, report)
}

pub async fn ingest(q: &FetchQuery, clients: &SourceClients) -> (Vec<PaperRecord>, FetchReport) {
    ingest_from(q, &[SourceKind::OpenAlex, SourceKind::Arxiv], clients, None).await
}
