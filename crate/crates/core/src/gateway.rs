//! Model-call abstraction and the call ledger.
//!
//! Every completed call made through a [`Gateway`] appends exactly one
//! [`CallLedgerEntry`] before the response is handed back. Transport retries
//! do not produce entries, so the ledger measures the solver-call budget
//! rather than network noise.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::jsonl::{self, JsonlError};

pub mod http;

pub const SOLVER_MAX_TOKENS: u32 = 2000;
pub const GENERATOR_MAX_TOKENS: u32 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Direct,
    Assisted,
    Generator,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Direct, Role::Assisted, Role::Generator];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Direct => "direct",
            Role::Assisted => "assisted",
            Role::Generator => "generator",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("request prompt is empty")]
    EmptyPrompt,
    #[error("backend error: {message}")]
    Backend { message: String, transient: bool },
    #[error("token budget exceeded: {used} used of {ceiling}")]
    BudgetExceeded { used: u64, ceiling: u64 },
    #[error("scripted client exhausted: {0}")]
    ScriptExhausted(String),
    #[error("ledger write failed: {0}")]
    Ledger(#[from] std::io::Error),
}

impl GatewayError {
    fn is_transient(&self) -> bool {
        matches!(self, GatewayError::Backend { transient: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub role: Role,
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub model_label: String,
}

impl GenerationRequest {
    /// Request with the role's default token cap and temperature 0.0.
    pub fn new(role: Role, prompt: impl Into<String>, model_label: impl Into<String>) -> Self {
        let max_tokens = match role {
            Role::Generator => GENERATOR_MAX_TOKENS,
            Role::Direct | Role::Assisted => SOLVER_MAX_TOKENS,
        };
        GenerationRequest {
            role,
            prompt: prompt.into(),
            max_tokens,
            temperature: 0.0,
            model_label: model_label.into(),
        }
    }

    /// Content hash over every field that can change the response.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.role.as_str());
        h.update([0]);
        h.update(&self.model_label);
        h.update([0]);
        h.update(self.max_tokens.to_le_bytes());
        h.update(self.temperature.to_le_bytes());
        h.update(&self.prompt);
        hex(&h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: f64,
    pub model_label: String,
}

impl GenerationResponse {
    pub fn total_tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

/// Identifies the evaluation unit a call belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallContext {
    pub run_id: String,
    pub dataset_id: String,
    pub item_id: String,
}

impl CallContext {
    pub fn new(run_id: &str, dataset_id: &str, item_id: &str) -> Self {
        CallContext {
            run_id: run_id.into(),
            dataset_id: dataset_id.into(),
            item_id: item_id.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallLedgerEntry {
    pub run_id: String,
    pub dataset_id: String,
    pub item_id: String,
    pub role: Role,
    pub sequence_index: u64,
    pub request_digest: String,
    pub response: GenerationResponse,
}

/// A backend able to answer generation requests. Implementations must
/// tolerate concurrent calls.
pub trait ModelClient: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, GatewayError>;

    /// Whether calls leave the process. Scripted clients return false.
    fn is_networked(&self) -> bool {
        false
    }
}

pub fn sha256_hex(data: &str) -> String {
    hex(&Sha256::digest(data.as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Scripted client

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptEntry {
    Text(String),
    Full {
        text: String,
        #[serde(default)]
        prompt_tokens: Option<u64>,
        #[serde(default)]
        completion_tokens: Option<u64>,
    },
}

impl ScriptEntry {
    fn text(&self) -> &str {
        match self {
            ScriptEntry::Text(t) | ScriptEntry::Full { text: t, .. } => t,
        }
    }
}

impl From<&str> for ScriptEntry {
    fn from(s: &str) -> Self {
        ScriptEntry::Text(s.into())
    }
}

/// Script for a [`ScriptedClient`]: responses in call order, or keyed by the
/// SHA-256 hex digest of the prompt text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Script {
    Responses(Vec<ScriptEntry>),
    ByDigest(HashMap<String, ScriptEntry>),
}

/// Deterministic offline client.
///
/// Token counts default to whitespace word counts of the prompt and the
/// response text. Every request is captured for inspection.
#[derive(Debug)]
pub struct ScriptedClient {
    script: Script,
    cursor: Mutex<usize>,
    captured: Mutex<Vec<GenerationRequest>>,
}

impl ScriptedClient {
    pub fn new(script: Script) -> Result<Self, GatewayError> {
        let empty = match &script {
            Script::Responses(v) => v.is_empty(),
            Script::ByDigest(m) => m.is_empty(),
        };
        if empty {
            return Err(GatewayError::ScriptExhausted("script has no entries".into()));
        }
        Ok(ScriptedClient {
            script,
            cursor: Mutex::new(0),
            captured: Mutex::new(Vec::new()),
        })
    }

    pub fn from_list<S: AsRef<str>>(responses: &[S]) -> Result<Self, GatewayError> {
        Self::new(Script::Responses(
            responses.iter().map(|s| ScriptEntry::Text(s.as_ref().into())).collect(),
        ))
    }

    pub fn captured(&self) -> Vec<GenerationRequest> {
        self.captured.lock().unwrap().clone()
    }
}

impl ModelClient for ScriptedClient {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, GatewayError> {
        self.captured.lock().unwrap().push(request.clone());
        let entry = match &self.script {
            Script::Responses(list) => {
                let mut cursor = self.cursor.lock().unwrap();
                let entry = list
                    .get(*cursor)
                    .ok_or_else(|| GatewayError::ScriptExhausted(format!("all {} scripted responses consumed", list.len())))?;
                *cursor += 1;
                entry.clone()
            }
            Script::ByDigest(map) => {
                let digest = sha256_hex(&request.prompt);
                map.get(&digest)
                    .cloned()
                    .ok_or_else(|| GatewayError::ScriptExhausted(format!("no response for prompt digest {digest}")))?
            }
        };
        let text = entry.text().to_string();
        let (prompt_tokens, completion_tokens) = match &entry {
            ScriptEntry::Full {
                prompt_tokens,
                completion_tokens,
                ..
            } => (
                prompt_tokens.unwrap_or_else(|| words(&request.prompt)),
                completion_tokens.unwrap_or_else(|| words(&text)),
            ),
            ScriptEntry::Text(_) => (words(&request.prompt), words(&text)),
        };
        Ok(GenerationResponse {
            text,
            prompt_tokens,
            completion_tokens,
            latency_ms: 0.0,
            model_label: request.model_label.clone(),
        })
    }
}

fn words(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

// ---------------------------------------------------------------------------
// Ledger

#[derive(Default)]
struct LedgerState {
    entries: Vec<CallLedgerEntry>,
    next_index: HashMap<(String, String, String, Role), u64>,
    sink: Option<File>,
}

/// Append-only call ledger, optionally mirrored to a line-delimited file.
#[derive(Default)]
pub struct CallLedger {
    state: Mutex<LedgerState>,
}

impl CallLedger {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Ledger that also appends every entry to `path`.
    pub fn with_sink(path: &Path) -> Result<Self, JsonlError> {
        let file = jsonl::open_append(path)?;
        Ok(CallLedger {
            state: Mutex::new(LedgerState {
                sink: Some(file),
                ..Default::default()
            }),
        })
    }

    fn record(&self, ctx: &CallContext, role: Role, request_digest: String, response: &GenerationResponse) -> std::io::Result<()> {
        let mut state = self.state.lock().unwrap();
        let key = (ctx.run_id.clone(), ctx.dataset_id.clone(), ctx.item_id.clone(), role);
        let counter = state.next_index.entry(key).or_insert(0);
        let sequence_index = *counter;
        *counter += 1;
        let entry = CallLedgerEntry {
            run_id: ctx.run_id.clone(),
            dataset_id: ctx.dataset_id.clone(),
            item_id: ctx.item_id.clone(),
            role,
            sequence_index,
            request_digest,
            response: response.clone(),
        };
        if let Some(file) = state.sink.as_mut() {
            jsonl::append(file, &entry)?;
        }
        state.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> Vec<CallLedgerEntry> {
        self.state.lock().unwrap().entries.clone()
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of entries for one item and role.
    pub fn count(&self, ctx: &CallContext, role: Role) -> usize {
        self.state
            .lock()
            .unwrap()
            .entries
            .iter()
            .filter(|e| e.role == role && e.run_id == ctx.run_id && e.dataset_id == ctx.dataset_id && e.item_id == ctx.item_id)
            .count()
    }
}

pub fn load_ledger(path: &Path) -> Result<Vec<CallLedgerEntry>, JsonlError> {
    Ok(jsonl::read(path)?.into_iter().map(|(_, e)| e).collect())
}

// ---------------------------------------------------------------------------
// Gateway

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 2,
            base_backoff: Duration::from_millis(500),
        }
    }
}

/// Per-run token ceiling shared by all gateways of a run.
#[derive(Debug, Default)]
pub struct TokenBudget {
    ceiling: Option<u64>,
    used: AtomicU64,
}

impl TokenBudget {
    pub fn unlimited() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn with_ceiling(ceiling: u64) -> Arc<Self> {
        Arc::new(TokenBudget {
            ceiling: Some(ceiling),
            used: AtomicU64::new(0),
        })
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }

    fn check(&self) -> Result<(), GatewayError> {
        match self.ceiling {
            Some(ceiling) if self.used() >= ceiling => Err(GatewayError::BudgetExceeded {
                used: self.used(),
                ceiling,
            }),
            _ => Ok(()),
        }
    }
}

/// A model client bound to a ledger, a retry policy, and a token budget.
#[derive(Clone)]
pub struct Gateway {
    client: Arc<dyn ModelClient>,
    ledger: Arc<CallLedger>,
    model_label: String,
    retry: RetryPolicy,
    budget: Arc<TokenBudget>,
}

impl Gateway {
    pub fn new(client: Arc<dyn ModelClient>, ledger: Arc<CallLedger>, model_label: impl Into<String>) -> Self {
        Gateway {
            client,
            ledger,
            model_label: model_label.into(),
            retry: RetryPolicy::default(),
            budget: TokenBudget::unlimited(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_budget(mut self, budget: Arc<TokenBudget>) -> Self {
        self.budget = budget;
        self
    }

    pub fn model_label(&self) -> &str {
        &self.model_label
    }

    pub fn ledger(&self) -> &Arc<CallLedger> {
        &self.ledger
    }

    pub fn is_networked(&self) -> bool {
        self.client.is_networked()
    }

    /// Request for `role` with this gateway's model label and defaults.
    pub fn request(&self, role: Role, prompt: impl Into<String>) -> GenerationRequest {
        GenerationRequest::new(role, prompt, self.model_label.clone())
    }

    pub fn complete(&self, ctx: &CallContext, request: &GenerationRequest) -> Result<GenerationResponse, GatewayError> {
        if request.prompt.is_empty() {
            return Err(GatewayError::EmptyPrompt);
        }
        self.budget.check()?;
        let mut attempt = 0;
        let response = loop {
            let started = Instant::now();
            match self.client.generate(request) {
                Ok(mut resp) => {
                    if resp.latency_ms == 0.0 && self.client.is_networked() {
                        resp.latency_ms = started.elapsed().as_secs_f64() * 1000.0;
                    }
                    break resp;
                }
                Err(e) if e.is_transient() && attempt < self.retry.max_retries => {
                    std::thread::sleep(self.retry.base_backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        self.budget.used.fetch_add(response.total_tokens(), Ordering::SeqCst);
        self.ledger.record(ctx, request.role, request.digest(), &response)?;
        Ok(response)
    }
}

// ---------------------------------------------------------------------------
// Ledger statistics

/// Distribution of per-item call counts for one role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CallStats {
    pub items: usize,
    pub mean: f64,
    pub median: f64,
    /// Nearest-rank 95th percentile.
    pub p95: u64,
    pub max: u64,
}

/// Call-count statistics per `(run, dataset, item)` for `role`. Items with no
/// entry for the role are not counted.
pub fn ledger_call_stats(ledger: &[CallLedgerEntry], role: Role) -> CallStats {
    let mut per_item: HashMap<(&str, &str, &str), u64> = HashMap::new();
    for e in ledger.iter().filter(|e| e.role == role) {
        *per_item.entry((&e.run_id, &e.dataset_id, &e.item_id)).or_default() += 1;
    }
    let counts: Vec<u64> = per_item.into_values().collect();
    count_stats(&counts)
}

pub fn count_stats(counts: &[u64]) -> CallStats {
    if counts.is_empty() {
        return CallStats {
            items: 0,
            mean: 0.0,
            median: 0.0,
            p95: 0,
            max: 0,
        };
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mean = sorted.iter().sum::<u64>() as f64 / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    };
    CallStats {
        items: n,
        mean,
        median,
        p95: nearest_rank(&sorted, 0.95),
        max: sorted[n - 1],
    }
}

/// Nearest-rank percentile of sorted data: `sorted[ceil(p * n) - 1]`.
pub fn nearest_rank(sorted: &[u64], p: f64) -> u64 {
    let n = sorted.len();
    // 0.95 * n can land a hair above an integer in floating point
    let rank = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Sum of prompt and completion tokens over entries with `role`.
pub fn ledger_token_totals(ledger: &[CallLedgerEntry], role: Role) -> u64 {
    ledger.iter().filter(|e| e.role == role).map(|e| e.response.total_tokens()).sum()
}

/// `numerator / denominator`, `None` when the denominator is zero.
pub fn token_ratio(numerator: u64, denominator: u64) -> Option<f64> {
    (denominator > 0).then(|| numerator as f64 / denominator as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(item: &str) -> CallContext {
        CallContext::new("run", "OBQA", item)
    }

    fn gateway(client: ScriptedClient) -> Gateway {
        Gateway::new(Arc::new(client), Arc::new(CallLedger::in_memory()), "solver")
    }

    #[test]
    fn request_defaults() {
        let r = GenerationRequest::new(Role::Direct, "p", "m");
        assert_eq!((r.max_tokens, r.temperature), (2000, 0.0));
        assert_eq!(GenerationRequest::new(Role::Generator, "p", "m").max_tokens, 8192);
    }

    #[test]
    fn list_script_in_order_then_exhausted() {
        let gw = gateway(ScriptedClient::from_list(&["A", "B"]).unwrap());
        let req = gw.request(Role::Direct, "q");
        assert_eq!(gw.complete(&ctx("1"), &req).unwrap().text, "A");
        assert_eq!(gw.complete(&ctx("1"), &req).unwrap().text, "B");
        assert!(matches!(gw.complete(&ctx("1"), &req), Err(GatewayError::ScriptExhausted(_))));
        assert_eq!(gw.ledger().len(), 2);
    }

    #[test]
    fn digest_script_is_deterministic() {
        let mut map = HashMap::new();
        map.insert(
            sha256_hex("which?"),
            ScriptEntry::Full {
                text: "B".into(),
                prompt_tokens: Some(12),
                completion_tokens: Some(1),
            },
        );
        let gw = gateway(ScriptedClient::new(Script::ByDigest(map)).unwrap());
        let req = gw.request(Role::Direct, "which?");
        let a = gw.complete(&ctx("1"), &req).unwrap();
        let b = gw.complete(&ctx("1"), &req).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.text.as_str(), a.prompt_tokens, a.completion_tokens), ("B", 12, 1));
        let other = gw.request(Role::Direct, "unmatched");
        assert!(matches!(gw.complete(&ctx("1"), &other), Err(GatewayError::ScriptExhausted(_))));
    }

    #[test]
    fn empty_script_and_prompt_rejected() {
        assert!(ScriptedClient::from_list::<&str>(&[]).is_err());
        let gw = gateway(ScriptedClient::from_list(&["A"]).unwrap());
        let req = gw.request(Role::Direct, "");
        assert!(matches!(gw.complete(&ctx("1"), &req), Err(GatewayError::EmptyPrompt)));
        assert!(gw.ledger().is_empty());
    }

    #[test]
    fn sequence_index_per_item_and_role() {
        let gw = gateway(ScriptedClient::from_list(&["a", "b", "c", "d"]).unwrap());
        gw.complete(&ctx("1"), &gw.request(Role::Assisted, "x")).unwrap();
        gw.complete(&ctx("1"), &gw.request(Role::Assisted, "y")).unwrap();
        gw.complete(&ctx("2"), &gw.request(Role::Assisted, "x")).unwrap();
        gw.complete(&ctx("1"), &gw.request(Role::Direct, "x")).unwrap();
        let idx: Vec<u64> = gw.ledger().entries().iter().map(|e| e.sequence_index).collect();
        assert_eq!(idx, vec![0, 1, 0, 0]);
    }

    struct Flaky {
        failures: Mutex<u32>,
    }

    impl ModelClient for Flaky {
        fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, GatewayError> {
            let mut left = self.failures.lock().unwrap();
            if *left > 0 {
                *left -= 1;
                return Err(GatewayError::Backend {
                    message: "reset".into(),
                    transient: true,
                });
            }
            Ok(GenerationResponse {
                text: "C".into(),
                prompt_tokens: 1,
                completion_tokens: 1,
                latency_ms: 1.0,
                model_label: request.model_label.clone(),
            })
        }
    }

    #[test]
    fn retries_do_not_create_entries() {
        let retry = RetryPolicy {
            max_retries: 2,
            base_backoff: Duration::from_millis(1),
        };
        let ok = Gateway::new(Arc::new(Flaky { failures: Mutex::new(2) }), Arc::new(CallLedger::in_memory()), "m").with_retry(retry);
        assert_eq!(ok.complete(&ctx("1"), &ok.request(Role::Direct, "q")).unwrap().text, "C");
        assert_eq!(ok.ledger().len(), 1);

        let bad = Gateway::new(Arc::new(Flaky { failures: Mutex::new(3) }), Arc::new(CallLedger::in_memory()), "m").with_retry(retry);
        assert!(matches!(
            bad.complete(&ctx("1"), &bad.request(Role::Direct, "q")),
            Err(GatewayError::Backend { .. })
        ));
        assert!(bad.ledger().is_empty());
    }

    #[test]
    fn budget_ceiling() {
        let gw = gateway(ScriptedClient::from_list(&["one two", "three"]).unwrap()).with_budget(TokenBudget::with_ceiling(3));
        gw.complete(&ctx("1"), &gw.request(Role::Direct, "a b")).unwrap();
        assert!(matches!(
            gw.complete(&ctx("1"), &gw.request(Role::Direct, "c")),
            Err(GatewayError::BudgetExceeded { used: 4, ceiling: 3 })
        ));
    }

    fn entry(item: &str, role: Role, tokens: (u64, u64)) -> CallLedgerEntry {
        CallLedgerEntry {
            run_id: "r".into(),
            dataset_id: "d".into(),
            item_id: item.into(),
            role,
            sequence_index: 0,
            request_digest: String::new(),
            response: GenerationResponse {
                text: String::new(),
                prompt_tokens: tokens.0,
                completion_tokens: tokens.1,
                latency_ms: 0.0,
                model_label: "m".into(),
            },
        }
    }

    #[test]
    fn call_stats_examples() {
        let three: Vec<_> = (0..3).map(|_| entry("1", Role::Assisted, (0, 0))).collect();
        let s = ledger_call_stats(&three, Role::Assisted);
        assert_eq!((s.items, s.mean, s.median, s.p95, s.max), (1, 3.0, 3.0, 3, 3));

        let direct = vec![
            entry("1", Role::Direct, (0, 0)),
            entry("2", Role::Direct, (0, 0)),
            entry("3", Role::Direct, (0, 0)),
            entry("3", Role::Direct, (0, 0)),
        ];
        let s = ledger_call_stats(&direct, Role::Direct);
        // counts [1, 1, 2]: mean 4/3, median 1, p95 rank ceil(2.85) = 3 -> 2
        assert!((s.mean - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!((s.median, s.p95, s.max), (1.0, 2, 2));

        let empty = ledger_call_stats(&[], Role::Direct);
        assert_eq!(empty.items, 0);
        assert_eq!(empty.max, 0);
    }

    #[test]
    fn token_totals() {
        let ledger = vec![
            entry("1", Role::Direct, (10, 5)),
            entry("2", Role::Direct, (20, 5)),
            entry("1", Role::Assisted, (99, 1)),
        ];
        assert_eq!(ledger_token_totals(&ledger, Role::Direct), 40);
        assert_eq!(ledger_token_totals(&[], Role::Direct), 0);
        assert!((token_ratio(7360, 1000).unwrap() - 7.36).abs() < 1e-12);
        assert_eq!(token_ratio(1, 0), None);
    }

    #[test]
    fn full_scale_call_distribution() {
        // A ledger shaped like the retained assisted stream: mostly small
        // counts with one 90-call outlier.
        let mut counts = vec![6u64; 90];
        counts.extend([15, 15, 15, 15, 15, 90]);
        let s = count_stats(&counts);
        assert_eq!((s.p95, s.max), (15, 90));
    }

    proptest! {
        #[test]
        fn nearest_rank_matches_brute_force(counts in prop::collection::vec(0u64..50, 1..60)) {
            let mut sorted = counts.clone();
            sorted.sort();
            let n = sorted.len();
            // smallest value v such that at least 95% of counts are <= v
            let brute = *sorted.iter().find(|&&v| {
                let le = sorted.iter().filter(|&&c| c <= v).count();
                le * 100 >= 95 * n
            }).unwrap();
            prop_assert_eq!(count_stats(&counts).p95, brute);
        }
    }
}
