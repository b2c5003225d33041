use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use async_trait::async_trait;
use rhizome_core::TokenUsage;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderRequest {
    pub agent_name: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderReply {
    pub content: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    #[error("model transport: {0}")]
    Transport(String),
    #[error("no fixture for agent {agent:?} and prompt hash {hash}")]
    MissingFixture { agent: String, hash: String },
    #[error("fixture I/O: {0}")]
    Io(String),
}

#[async_trait]
pub trait LlmProvider: Send + Sync {
    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderError>;
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    LiveHttp,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub fixture_path: Option<PathBuf>,
}

impl ProviderConfig {
    pub fn fixture(path: impl Into<PathBuf>) -> Self {
        ProviderConfig {
            kind: ProviderKind::Fixture,
            endpoint: None,
            model_name: None,
            fixture_path: Some(path.into()),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.kind {
            ProviderKind::LiveHttp if self.endpoint.as_deref().is_none_or(|e| e.trim().is_empty()) => {
                Err("live-http provider needs an endpoint".into())
            }
            ProviderKind::Fixture if self.fixture_path.is_none() => Err("fixture provider needs a fixture path".into()),
            _ => Ok(()),
        }
    }
}

/// One recorded completion: a header naming the agent, prompt hash and token
/// counts, a blank line, then the verbatim model output.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmFixture {
    pub agent_name: String,
    pub prompt_hash: String,
    pub usage: TokenUsage,
    pub content: String,
}

impl LlmFixture {
    pub fn parse(text: &str) -> Option<LlmFixture> {
        let (header, content) = text.split_once("\n\n")?;
        let fields: HashMap<&str, &str> =
            header.lines().filter_map(|l| l.split_once(':')).map(|(k, v)| (k.trim(), v.trim())).collect();
        Some(LlmFixture {
            agent_name: fields.get("agent")?.to_string(),
            prompt_hash: fields.get("prompt-sha256")?.to_string(),
            usage: TokenUsage {
                input_tokens: fields.get("input-tokens").and_then(|v| v.parse().ok()).unwrap_or(0),
                output_tokens: fields.get("output-tokens").and_then(|v| v.parse().ok()).unwrap_or(0),
            },
            content: content.to_string(),
        })
    }

    pub fn render(&self) -> String {
        format!(
            "agent: {}\nprompt-sha256: {}\ninput-tokens: {}\noutput-tokens: {}\n\n{}",
            self.agent_name, self.prompt_hash, self.usage.input_tokens, self.usage.output_tokens, self.content
        )
    }

    /// `<root>/<agent>/<hash>.txt`.
    pub fn path_in(&self, root: &Path) -> PathBuf {
        root.join(&self.agent_name).join(format!("{}.txt", self.prompt_hash))
    }
}

/// Replays recorded completions keyed by (agent name, prompt hash). A call
/// with no recording is an error, never a guess.
pub struct FixtureProvider {
    root: PathBuf,
}

impl FixtureProvider {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureProvider { root: root.into() }
    }
}

#[async_trait]
impl LlmProvider for FixtureProvider {
    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderError> {
        let hash = prompt_hash(&request.prompt);
        let path = self.root.join(&request.agent_name).join(format!("{hash}.txt"));
        let text = match tokio::fs::read_to_string(&path).await {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ProviderError::MissingFixture { agent: request.agent_name.clone(), hash })
            }
            Err(e) => return Err(ProviderError::Io(format!("{}: {e}", path.display()))),
        };
        let fixture = LlmFixture::parse(&text)
            .ok_or_else(|| ProviderError::Io(format!("{}: missing fixture header", path.display())))?;
        Ok(ProviderReply { content: fixture.content, usage: fixture.usage })
    }
}

/// Forwards to another provider and stores each completion as a fixture.
pub struct RecordingProvider {
    inner: Arc<dyn LlmProvider>,
    root: PathBuf,
}

impl RecordingProvider {
    pub fn new(inner: Arc<dyn LlmProvider>, root: impl Into<PathBuf>) -> Self {
        RecordingProvider { inner, root: root.into() }
    }
}

#[async_trait]
impl LlmProvider for RecordingProvider {
    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderError> {
        let reply = self.inner.complete(request).await?;
        let fixture = LlmFixture {
            agent_name: request.agent_name.clone(),
            prompt_hash: prompt_hash(&request.prompt),
            usage: reply.usage,
            content: reply.content.clone(),
        };
        let path = fixture.path_in(&self.root);
        let io = |e: std::io::Error| ProviderError::Io(e.to_string());
        tokio::fs::create_dir_all(path.parent().expect("fixture path has a parent")).await.map_err(io)?;
        tokio::fs::write(&path, fixture.render()).await.map_err(io)?;
        Ok(reply)
    }
}
