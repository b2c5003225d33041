//! Chat-completion client for a local model server (Ollama's `/api/chat`).

use std::time::Duration;

use async_trait::async_trait;
use rhizome_core::TokenUsage;
use serde::{Deserialize, Serialize};

use super::provider::{LlmProvider, ProviderError, ProviderReply, ProviderRequest};

pub const DEFAULT_MODEL: &str = "mistral";

pub struct OllamaProvider {
    client: reqwest::Client,
    endpoint: String,
    model: String,
}

impl OllamaProvider {
    pub fn new(endpoint: &str, model: Option<&str>) -> Self {
        let client =
            reqwest::Client::builder().timeout(Duration::from_secs(600)).build().expect("static client configuration");
        OllamaProvider {
            client,
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.unwrap_or(DEFAULT_MODEL).to_string(),
        }
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 1],
    stream: bool,
    format: &'a str,
    options: Options,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct Options {
    temperature: f64,
    num_predict: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    message: ReplyMessage,
    #[serde(default)]
    prompt_eval_count: u64,
    #[serde(default)]
    eval_count: u64,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: String,
}

#[async_trait]
impl LlmProvider for OllamaProvider {
    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderError> {
        let body = ChatRequest {
            model: &self.model,
            messages: [Message { role: "user", content: &request.prompt }],
            stream: false,
            format: "json",
            options: Options { temperature: request.temperature, num_predict: request.max_output_tokens },
        };
        let transport = |e: reqwest::Error| ProviderError::Transport(e.to_string());
        let resp =
            self.client.post(format!("{}/api/chat", self.endpoint)).json(&body).send().await.map_err(transport)?;
        if !resp.status().is_success() {
            return Err(ProviderError::Transport(format!("model server returned {}", resp.status())));
        }
        let chat: ChatResponse = resp.json().await.map_err(transport)?;
        Ok(ProviderReply {
            content: chat.message.content,
            usage: TokenUsage { input_tokens: chat.prompt_eval_count, output_tokens: chat.eval_count },
        })
    }
}
