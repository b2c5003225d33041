//! Per-call accounting and its aggregation into run metadata.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl Add for TokenUsage {
    type Output = TokenUsage;

    fn add(self, rhs: TokenUsage) -> TokenUsage {
        TokenUsage {
            input_tokens: self.input_tokens + rhs.input_tokens,
            output_tokens: self.output_tokens + rhs.output_tokens,
        }
    }
}

impl AddAssign for TokenUsage {
    fn add_assign(&mut self, rhs: TokenUsage) {
        *self = *self + rhs;
    }
}

/// What one structured agent call cost and reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub agent_name: String,
    pub schema_id: String,
    pub prompt_hash: String,
    pub usage: TokenUsage,
    pub latency_ms: u64,
    pub confidence: f64,
    /// Model round-trips, including corrective re-prompts.
    pub attempts: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentTotals {
    pub calls: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub per_agent: BTreeMap<String, AgentTotals>,
    pub totals: AgentTotals,
}

impl RunMetrics {
    /// Grand totals equal the sum of per-agent totals.
    pub fn is_consistent(&self) -> bool {
        let mut sum = AgentTotals::default();
        for t in self.per_agent.values() {
            sum.calls += t.calls;
            sum.input_tokens += t.input_tokens;
            sum.output_tokens += t.output_tokens;
            sum.latency_ms += t.latency_ms;
        }
        sum.calls == self.totals.calls
            && sum.input_tokens == self.totals.input_tokens
            && sum.output_tokens == self.totals.output_tokens
            && sum.latency_ms == self.totals.latency_ms
    }
}

fn mean_sorted(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Per-agent sums and mean confidence plus grand totals. Confidence means
/// are summed in sorted order so the result is permutation-invariant.
pub fn aggregate_metrics<'a>(records: impl IntoIterator<Item = &'a CallRecord>) -> RunMetrics {
    let mut per_agent: BTreeMap<String, (AgentTotals, Vec<f64>)> = BTreeMap::new();
    let mut all_conf = Vec::new();
    for r in records {
        let (t, conf) = per_agent.entry(r.agent_name.clone()).or_default();
        t.calls += 1;
        t.input_tokens += r.usage.input_tokens;
        t.output_tokens += r.usage.output_tokens;
        t.latency_ms += r.latency_ms;
        conf.push(r.confidence);
        all_conf.push(r.confidence);
    }
    let mut totals = AgentTotals::default();
    let per_agent = per_agent
        .into_iter()
        .map(|(name, (mut t, conf))| {
            t.mean_confidence = mean_sorted(conf);
            totals.calls += t.calls;
            totals.input_tokens += t.input_tokens;
            totals.output_tokens += t.output_tokens;
            totals.latency_ms += t.latency_ms;
            (name, t)
        })
        .collect();
    totals.mean_confidence = mean_sorted(all_conf);
    RunMetrics { per_agent, totals }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(agent: &str, input: u64, output: u64, conf: f64) -> CallRecord {
        CallRecord {
            agent_name: agent.into(),
            schema_id: "s".into(),
            prompt_hash: "h".into(),
            usage: TokenUsage { input_tokens: input, output_tokens: output },
            latency_ms: 5,
            confidence: conf,
            attempts: 1,
        }
    }

    #[test]
    fn empty() {
        let m = aggregate_metrics(&[]);
        assert_eq!(m.totals, AgentTotals::default());
        assert!(m.per_agent.is_empty());
    }

    #[test]
    fn two_calls() {
        let calls = [call("a", 100, 20, 0.5), call("b", 50, 10, 1.0)];
        let m = aggregate_metrics(&calls);
        assert_eq!(m.totals.input_tokens, 150);
        assert_eq!(m.totals.output_tokens, 30);
        assert_eq!(m.totals.calls, 2);
        assert_eq!(m.totals.latency_ms, 10);
        assert_eq!(m.totals.mean_confidence, 0.75);
        assert!(m.is_consistent());
    }

    #[test]
    fn per_agent_means() {
        let calls = [call("a", 1, 1, 0.2), call("a", 1, 1, 0.4), call("b", 1, 1, 0.9)];
        let m = aggregate_metrics(&calls);
        assert!((m.per_agent["a"].mean_confidence - 0.3).abs() < 1e-12);
        assert_eq!(m.per_agent["a"].calls, 2);
    }
}
