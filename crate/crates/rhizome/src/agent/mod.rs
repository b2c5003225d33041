//! The structured LLM-call layer every agent goes through.

mod ollama;
mod provider;

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use rhizome_core::synthesis::clamp_unit;
use rhizome_core::{aggregate_metrics, CallRecord, RunMetrics, TokenUsage};
use serde::de::DeserializeOwned;
use tokio::sync::Semaphore;

pub use ollama::{OllamaProvider, DEFAULT_MODEL};
pub use provider::{
    prompt_hash, FixtureProvider, LlmFixture, LlmProvider, ProviderConfig, ProviderError, ProviderKind, ProviderReply,
    ProviderRequest, RecordingProvider,
};

pub const DEFAULT_MAX_IN_FLIGHT: usize = 8;
/// Corrective re-prompts after the first malformed reply.
pub const CORRECTIVE_RETRIES: u32 = 2;

/// A response shape agents can ask for. Every shape carries a self-reported
/// `confidence`.
pub trait Schema: DeserializeOwned + Send {
    const ID: &'static str;
    /// Example JSON shown to the model.
    const SHAPE: &'static str;

    fn confidence(&self) -> f64;

    fn set_confidence(&mut self, value: f64);

    /// Checks beyond what deserialization enforces.
    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentCall {
    pub agent_name: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl AgentCall {
    pub fn new(agent_name: impl Into<String>, prompt: impl Into<String>) -> Self {
        AgentCall { agent_name: agent_name.into(), prompt: prompt.into(), temperature: 0.2, max_output_tokens: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentResponse<T> {
    pub payload: T,
    pub confidence: f64,
    pub usage: TokenUsage,
    pub latency_ms: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error("agent {0:?} is not in the run roster")]
    UnknownAgent(String),
    #[error("agent {agent:?} returned invalid {schema} output after {attempts} attempts: {reason}")]
    Invalid { agent: String, schema: &'static str, attempts: u32, reason: String },
    #[error("agent {agent:?}: {source}")]
    Provider { agent: String, source: ProviderError },
}

impl AgentError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, AgentError::Provider { source: ProviderError::Transport(_), .. })
    }
}

/// Returns the first balanced `{...}` in `text`, skipping braces inside strings.
pub fn extract_json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let (mut depth, mut in_string, mut escaped) = (0usize, false, false);
    for (i, c) in text[start..].char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_reply<T: Schema>(content: &str) -> Result<T, String> {
    let object = extract_json_object(content).ok_or("no JSON object in reply")?;
    let mut value: serde_json::Value = serde_json::from_str(object).map_err(|e| format!("invalid JSON: {e}"))?;
    if let Some(c) = value.get_mut("confidence") {
        if let Some(x) = c.as_f64() {
            *c = serde_json::json!(clamp_unit(x));
        }
    }
    let payload: T = serde_json::from_value(value).map_err(|e| e.to_string())?;
    payload.check()?;
    Ok(payload)
}

pub fn corrective_suffix(reason: &str, shape: &str) -> String {
    format!(
        "\n\nYour previous reply was rejected: {reason}.\nReply again with exactly one JSON object shaped like {shape} and nothing else."
    )
}

/// Shared by every agent in a run: bounds in-flight calls, checks the
/// roster, validates replies and keeps the per-call records.
pub struct AgentRuntime {
    provider: Arc<dyn LlmProvider>,
    permits: Semaphore,
    roster: RwLock<BTreeSet<String>>,
    records: Mutex<Vec<CallRecord>>,
}

impl AgentRuntime {
    pub fn new(provider: Arc<dyn LlmProvider>, max_in_flight: usize) -> Self {
        AgentRuntime {
            provider,
            permits: Semaphore::new(max_in_flight.max(1)),
            roster: RwLock::new(BTreeSet::new()),
            records: Mutex::new(Vec::new()),
        }
    }

    pub fn declare(&self, agent_name: &str) {
        self.roster.write().expect("roster lock").insert(agent_name.to_string());
    }

    pub fn roster(&self) -> Vec<String> {
        self.roster.read().expect("roster lock").iter().cloned().collect()
    }

    /// Sends the prompt, then up to two corrective re-prompts while the reply
    /// fails to parse or validate.
    pub async fn complete_structured<T: Schema>(&self, call: &AgentCall) -> Result<AgentResponse<T>, AgentError> {
        if !self.roster.read().expect("roster lock").contains(&call.agent_name) {
            return Err(AgentError::UnknownAgent(call.agent_name.clone()));
        }
        let _permit = self.permits.acquire().await.expect("semaphore never closed");
        let started = Instant::now();
        let mut usage = TokenUsage::default();
        let mut prompt = call.prompt.clone();
        let mut attempts = 0;
        loop {
            attempts += 1;
            let request = ProviderRequest {
                agent_name: call.agent_name.clone(),
                prompt: prompt.clone(),
                temperature: call.temperature,
                max_output_tokens: call.max_output_tokens,
            };
            let reply = self
                .provider
                .complete(&request)
                .await
                .map_err(|source| AgentError::Provider { agent: call.agent_name.clone(), source })?;
            usage += reply.usage;
            match parse_reply::<T>(&reply.content) {
                Ok(payload) => {
                    let confidence = payload.confidence();
                    let latency_ms = started.elapsed().as_millis() as u64;
                    self.records.lock().expect("records lock").push(CallRecord {
                        agent_name: call.agent_name.clone(),
                        schema_id: T::ID.to_string(),
                        prompt_hash: prompt_hash(&call.prompt),
                        usage,
                        latency_ms,
                        confidence,
                        attempts,
                    });
                    return Ok(AgentResponse { payload, confidence, usage, latency_ms, attempts });
                }
                Err(reason) if attempts <= CORRECTIVE_RETRIES => {
                    tracing::debug!(agent = %call.agent_name, %reason, "re-prompting");
                    prompt = format!("{}{}", call.prompt, corrective_suffix(&reason, T::SHAPE));
                }
                Err(reason) => {
                    return Err(AgentError::Invalid { agent: call.agent_name.clone(), schema: T::ID, attempts, reason })
                }
            }
        }
    }

    /// Records of every successful call, in a stable order.
    pub fn call_records(&self) -> Vec<CallRecord> {
        let mut records = self.records.lock().expect("records lock").clone();
        records.sort_by(|a, b| {
            (&a.agent_name, &a.schema_id, &a.prompt_hash).cmp(&(&b.agent_name, &b.schema_id, &b.prompt_hash))
        });
        records
    }

    pub fn metrics(&self) -> RunMetrics {
        aggregate_metrics(&self.call_records())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use async_trait::async_trait;
    use serde::Deserialize;
    use std::collections::HashMap;

    #[derive(Debug, Deserialize, PartialEq)]
    struct Echo {
        word: String,
        confidence: f64,
    }

    impl Schema for Echo {
        const ID: &'static str = "echo";
        const SHAPE: &'static str = r#"{"word": "...", "confidence": 0.5}"#;

        fn confidence(&self) -> f64 {
            self.confidence
        }

        fn set_confidence(&mut self, value: f64) {
            self.confidence = value;
        }
    }

    /// Answers by exact prompt; anything else is a missing fixture.
    struct Scripted(HashMap<String, String>);

    #[async_trait]
    impl LlmProvider for Scripted {
        async fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderError> {
            match self.0.get(&request.prompt) {
                Some(c) => {
                    Ok(ProviderReply { content: c.clone(), usage: TokenUsage { input_tokens: 10, output_tokens: 2 } })
                }
                None => Err(ProviderError::MissingFixture {
                    agent: request.agent_name.clone(),
                    hash: prompt_hash(&request.prompt),
                }),
            }
        }
    }

    fn runtime(script: &[(&str, &str)]) -> AgentRuntime {
        let map = script.iter().map(|(p, c)| (p.to_string(), c.to_string())).collect();
        let rt = AgentRuntime::new(Arc::new(Scripted(map)), 2);
        rt.declare("a");
        rt
    }

    #[tokio::test]
    async fn clamps_confidence() {
        let rt = runtime(&[("p", r#"Sure: {"word": "x", "confidence": 1.7} done"#)]);
        let r = rt.complete_structured::<Echo>(&AgentCall::new("a", "p")).await.unwrap();
        assert_eq!(r.confidence, 1.0);
        assert_eq!(r.payload.word, "x");
        assert_eq!(r.attempts, 1);
    }

    /// Replies in order, whatever the prompt; remembers the prompts it saw.
    struct Sequence(Mutex<(Vec<&'static str>, Vec<String>)>);

    #[async_trait]
    impl LlmProvider for Sequence {
        async fn complete(&self, request: &ProviderRequest) -> Result<ProviderReply, ProviderError> {
            let mut state = self.0.lock().unwrap();
            state.1.push(request.prompt.clone());
            let content = state.0.remove(0).to_string();
            Ok(ProviderReply { content, usage: TokenUsage { input_tokens: 10, output_tokens: 2 } })
        }
    }

    #[tokio::test]
    async fn one_corrective_reprompt() {
        let provider = Arc::new(Sequence(Mutex::new((
            vec![r#"{"confidence": 0.5}"#, r#"{"word": "y", "confidence": 0.5}"#],
            Vec::new(),
        ))));
        let rt = AgentRuntime::new(provider.clone(), 1);
        rt.declare("a");
        let r = rt.complete_structured::<Echo>(&AgentCall::new("a", "p")).await.unwrap();
        assert_eq!(r.attempts, 2);
        assert_eq!(r.usage.input_tokens, 20);
        assert_eq!(rt.call_records()[0].attempts, 2);
        assert_eq!(rt.call_records()[0].prompt_hash, prompt_hash("p"));
        let prompts = &provider.0.lock().unwrap().1;
        assert!(prompts[1].starts_with("p\n\nYour previous reply was rejected: missing field `word`"));
    }

    #[tokio::test]
    async fn gives_up_after_two_corrections() {
        let provider = Arc::new(Sequence(Mutex::new((vec!["nope", "{}", "{\"word\": 3}"], Vec::new()))));
        let rt = AgentRuntime::new(provider, 1);
        rt.declare("a");
        let err = rt.complete_structured::<Echo>(&AgentCall::new("a", "p")).await.unwrap_err();
        assert!(matches!(err, AgentError::Invalid { attempts: 3, .. }), "{err}");
        assert!(rt.call_records().is_empty());
    }

    #[tokio::test]
    async fn unknown_agent_and_missing_fixture() {
        let rt = runtime(&[]);
        assert_eq!(
            rt.complete_structured::<Echo>(&AgentCall::new("zzz", "p")).await.unwrap_err(),
            AgentError::UnknownAgent("zzz".into())
        );
        let err = rt.complete_structured::<Echo>(&AgentCall::new("a", "nope")).await.unwrap_err();
        assert!(matches!(err, AgentError::Provider { source: ProviderError::MissingFixture { .. }, .. }));
    }

    #[test]
    fn json_extraction_skips_string_braces() {
        assert_eq!(extract_json_object(r#"x {"a": "}{", "b": {"c": 1}} y"#), Some(r#"{"a": "}{", "b": {"c": 1}}"#));
        assert_eq!(extract_json_object("no braces"), None);
    }
}
