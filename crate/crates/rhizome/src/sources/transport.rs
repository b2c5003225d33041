use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use rhizome_core::SourceKind;
use sha2::{Digest, Sha256};
use tokio::sync::Mutex;

/// One GET against a scholarly API. The URL is canonical: it never carries
/// the contact address, so recorded fixtures match regardless of who ran them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceRequest {
    pub source: SourceKind,
    pub url: String,
}

impl SourceRequest {
    pub fn query_hash(&self) -> String {
        hex::encode(Sha256::digest(self.url.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("{kind}: {message}")]
    Network { kind: SourceKind, message: String },
    #[error("{kind}: HTTP status {status}")]
    Status { kind: SourceKind, status: u16 },
    #[error("{kind}: no recorded response for {url} (query hash {hash})")]
    MissingFixture { kind: SourceKind, url: String, hash: String },
    #[error("{kind}: {message}")]
    Io { kind: SourceKind, message: String },
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        match self {
            TransportError::Network { .. } => true,
            TransportError::Status { status, .. } => *status == 429 || *status >= 500,
            TransportError::MissingFixture { .. } | TransportError::Io { .. } => false,
        }
    }

    pub fn source_kind(&self) -> SourceKind {
        match self {
            TransportError::Network { kind, .. }
            | TransportError::Status { kind, .. }
            | TransportError::MissingFixture { kind, .. }
            | TransportError::Io { kind, .. } => *kind,
        }
    }
}

#[async_trait]
pub trait Transport: Send + Sync {
    async fn get(&self, request: &SourceRequest) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { retries: 2, base_delay: Duration::from_millis(500) }
    }
}

impl RetryPolicy {
    pub fn immediate() -> Self {
        RetryPolicy { retries: 2, base_delay: Duration::ZERO }
    }
}

/// Runs a request with exponential backoff on retryable errors.
pub async fn get_with_retry(
    transport: &dyn Transport,
    request: &SourceRequest,
    policy: RetryPolicy,
) -> Result<String, TransportError> {
    let mut attempt = 0;
    loop {
        match transport.get(request).await {
            Ok(body) => return Ok(body),
            Err(e) if e.is_retryable() && attempt < policy.retries => {
                let delay = policy.base_delay * 2u32.pow(attempt);
                tracing::warn!(error = %e, attempt, "retrying source request");
                tokio::time::sleep(delay).await;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Live HTTPS transport with per-source request spacing.
pub struct HttpTransport {
    client: reqwest::Client,
    mailto: Option<String>,
    spacing: HashMap<SourceKind, Duration>,
    last_request: Mutex<HashMap<SourceKind, Instant>>,
}

impl HttpTransport {
    pub fn new(mailto: Option<String>) -> Self {
        let client = reqwest::Client::builder()
            .user_agent(concat!("rhizome/", env!("CARGO_PKG_VERSION")))
            .timeout(Duration::from_secs(60))
            .build()
            .expect("static client configuration");
        let spacing = HashMap::from([(SourceKind::Arxiv, Duration::from_secs(3))]);
        HttpTransport { client, mailto, spacing, last_request: Mutex::new(HashMap::new()) }
    }

    async fn wait_turn(&self, source: SourceKind) {
        let Some(gap) = self.spacing.get(&source).copied() else { return };
        let mut last = self.last_request.lock().await;
        if let Some(prev) = last.get(&source) {
            let elapsed = prev.elapsed();
            if elapsed < gap {
                tokio::time::sleep(gap - elapsed).await;
            }
        }
        last.insert(source, Instant::now());
    }
}

#[async_trait]
impl Transport for HttpTransport {
    async fn get(&self, request: &SourceRequest) -> Result<String, TransportError> {
        self.wait_turn(request.source).await;
        let mut url = reqwest::Url::parse(&request.url)
            .map_err(|e| TransportError::Io { kind: request.source, message: e.to_string() })?;
        if let (SourceKind::OpenAlex, Some(mailto)) = (request.source, &self.mailto) {
            url.query_pairs_mut().append_pair("mailto", mailto);
        }
        let network = |e: reqwest::Error| TransportError::Network { kind: request.source, message: e.to_string() };
        let resp = self.client.get(url).send().await.map_err(network)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(TransportError::Status { kind: request.source, status: status.as_u16() });
        }
        resp.text().await.map_err(network)
    }
}

/// A recorded response: small `key: value` header, blank line, verbatim body.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFixture {
    pub source: SourceKind,
    pub query_hash: String,
    pub recorded_at: String,
    pub request: String,
    /// Non-200 statuses replay as transport errors.
    pub status: u16,
    pub body: String,
}

impl SourceFixture {
    pub fn parse(text: &str) -> Option<SourceFixture> {
        let (header, body) = text.split_once("\n\n")?;
        let mut fields = HashMap::new();
        for line in header.lines() {
            let (k, v) = line.split_once(':')?;
            fields.insert(k.trim(), v.trim());
        }
        let source = match *fields.get("source")? {
            "open-alex" => SourceKind::OpenAlex,
            "arxiv" => SourceKind::Arxiv,
            _ => return None,
        };
        Some(SourceFixture {
            source,
            query_hash: fields.get("query-hash")?.to_string(),
            recorded_at: fields.get("recorded-at").copied().unwrap_or("").to_string(),
            request: fields.get("request").copied().unwrap_or("").to_string(),
            status: fields.get("status").and_then(|s| s.parse().ok()).unwrap_or(200),
            body: body.to_string(),
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "source: {}\nquery-hash: {}\nrecorded-at: {}\nrequest: {}\n",
            self.source, self.query_hash, self.recorded_at, self.request
        );
        if self.status != 200 {
            out.push_str(&format!("status: {}\n", self.status));
        }
        out.push('\n');
        out.push_str(&self.body);
        out
    }

    pub fn file_name(&self) -> String {
        let ext = match self.source {
            SourceKind::Arxiv => "xml",
            _ => "json",
        };
        format!("{}-{}.{ext}", self.source, &self.query_hash[..16])
    }
}

/// Replays recorded responses from a directory, keyed by query hash.
pub struct FixtureTransport {
    by_hash: HashMap<String, SourceFixture>,
}

impl FixtureTransport {
    pub fn load(dir: &Path) -> std::io::Result<Self> {
        let mut by_hash = HashMap::new();
        if dir.is_dir() {
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if !path.is_file() {
                    continue;
                }
                let text = std::fs::read_to_string(&path)?;
                match SourceFixture::parse(&text) {
                    Some(f) => {
                        by_hash.insert(f.query_hash.clone(), f);
                    }
                    None => tracing::warn!(path = %path.display(), "skipping unreadable source fixture"),
                }
            }
        }
        Ok(FixtureTransport { by_hash })
    }

    pub fn len(&self) -> usize {
        self.by_hash.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_hash.is_empty()
    }
}

#[async_trait]
impl Transport for FixtureTransport {
    async fn get(&self, request: &SourceRequest) -> Result<String, TransportError> {
        let hash = request.query_hash();
        match self.by_hash.get(&hash) {
            Some(f) if f.status == 200 => Ok(f.body.clone()),
            Some(f) => Err(TransportError::Status { kind: request.source, status: f.status }),
            None => Err(TransportError::MissingFixture { kind: request.source, url: request.url.clone(), hash }),
        }
    }
}

/// Forwards to another transport and writes every successful response as a fixture.
pub struct RecordingTransport {
    inner: Arc<dyn Transport>,
    dir: PathBuf,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn Transport>, dir: PathBuf) -> Self {
        RecordingTransport { inner, dir }
    }
}

#[async_trait]
impl Transport for RecordingTransport {
    async fn get(&self, request: &SourceRequest) -> Result<String, TransportError> {
        let body = self.inner.get(request).await?;
        let fixture = SourceFixture {
            source: request.source,
            query_hash: request.query_hash(),
            recorded_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            request: request.url.clone(),
            status: 200,
            body: body.clone(),
        };
        let io = |e: std::io::Error| TransportError::Io { kind: request.source, message: e.to_string() };
        tokio::fs::create_dir_all(&self.dir).await.map_err(io)?;
        tokio::fs::write(self.dir.join(fixture.file_name()), fixture.render()).await.map_err(io)?;
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_round_trip() {
        let f = SourceFixture {
            source: SourceKind::Arxiv,
            query_hash: "ab".repeat(32),
            recorded_at: "2026-01-01T00:00:00Z".into(),
            request: "https://export.arxiv.org/api/query?x=1".into(),
            status: 503,
            body: "<feed>\n\n</feed>".into(),
        };
        assert_eq!(SourceFixture::parse(&f.render()), Some(f));
    }

    #[test]
    fn retryable_classes() {
        let s = SourceKind::OpenAlex;
        assert!(TransportError::Status { kind: s, status: 503 }.is_retryable());
        assert!(TransportError::Status { kind: s, status: 429 }.is_retryable());
        assert!(!TransportError::Status { kind: s, status: 404 }.is_retryable());
        assert!(!TransportError::MissingFixture { kind: s, url: "u".into(), hash: "h".into() }.is_retryable());
    }

    struct Flaky(std::sync::atomic::AtomicU32);

    #[async_trait]
    impl Transport for Flaky {
        async fn get(&self, request: &SourceRequest) -> Result<String, TransportError> {
            let n = self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            if n < 2 {
                Err(TransportError::Network { kind: request.source, message: "reset".into() })
            } else {
                Ok("ok".into())
            }
        }
    }

    #[tokio::test]
    async fn two_retries_then_success() {
        let t = Flaky(0.into());
        let req = SourceRequest { source: SourceKind::OpenAlex, url: "u".into() };
        assert_eq!(get_with_retry(&t, &req, RetryPolicy::immediate()).await.unwrap(), "ok");
        let t = Flaky(0.into());
        let policy = RetryPolicy { retries: 1, base_delay: Duration::ZERO };
        assert!(get_with_retry(&t, &req, policy).await.is_err());
    }
}
