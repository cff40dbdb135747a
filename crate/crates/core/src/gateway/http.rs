//! OpenAI-compatible chat-completions backend.
//!
//! Configured from a flat key/value file:
//!
//! ```toml
//! endpoint = "http://localhost:1234/v1"
//! model_label = "gemma4_e2b"
//! model_id = "google/gemma-4-e2b"   # optional, defaults to model_label
//! api_key_env = "LMSTUDIO_API_KEY"  # optional
//! timeout_s = 120                   # optional
//! ```
//!
//! Credentials are only ever read from the named environment variable.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use super::{GatewayError, GenerationRequest, GenerationResponse, ModelClient};

static NETWORK_OPERATIONS: AtomicU64 = AtomicU64::new(0);

/// Outbound requests attempted by every [`HttpClient`] in this process.
pub fn network_operation_count() -> u64 {
    NETWORK_OPERATIONS.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model_label: String,
    #[serde(default)]
    pub model_id: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
}

fn default_timeout() -> u64 {
    120
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
    #[error("http client: {0}")]
    Client(String),
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}

pub struct HttpClient {
    config: BackendConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(config: BackendConfig) -> Result<Self, ConfigError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| ConfigError::MissingCredential(var.clone()))?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_s))
            .build()
            .map_err(|e| ConfigError::Client(e.to_string()))?;
        Ok(HttpClient { config, api_key, client })
    }

    pub fn label(&self) -> &str {
        &self.config.model_label
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl ModelClient for HttpClient {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, GatewayError> {
        let url = format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": self.config.model_id.as_deref().unwrap_or(&self.config.model_label),
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        });
        let mut builder = self.client.post(&url).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        NETWORK_OPERATIONS.fetch_add(1, Ordering::SeqCst);
        let started = Instant::now();
        let resp = builder.send().map_err(|e| GatewayError::Backend {
            message: e.to_string(),
            transient: true,
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(GatewayError::Backend {
                message: format!("{url} returned {status}"),
                transient: status.is_server_error() || status.as_u16() == 429,
            });
        }
        let parsed: ChatResponse = resp.json().map_err(|e| GatewayError::Backend {
            message: format!("malformed response: {e}"),
            transient: false,
        })?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        let usage = parsed.usage.unwrap_or(Usage {
            prompt_tokens: 0,
            completion_tokens: 0,
        });
        Ok(GenerationResponse {
            text,
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
            latency_ms: started.elapsed().as_secs_f64() * 1000.0,
            model_label: self.config.model_label.clone(),
        })
    }

    fn is_networked(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let cfg: BackendConfig =
            toml::from_str("endpoint = \"http://127.0.0.1:9/v1\"\nmodel_label = \"granite\"\napi_key_env = \"CGR_TEST_KEY\"\n").unwrap();
        assert_eq!(cfg.model_label, "granite");
        assert_eq!(cfg.timeout_s, 120);
        assert!(matches!(HttpClient::new(cfg), Err(ConfigError::MissingCredential(_))));
    }
}
