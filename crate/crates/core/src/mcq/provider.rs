use std::collections::BTreeMap;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{format_question, gold_letter, McqItem, Permutation, LETTERS};

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("request failed after {attempts} attempt(s): {detail}")]
    Request { attempts: usize, detail: String },
    #[error("unexpected response: {0}")]
    Response(String),
}

/// Answers a prompt with free text.
pub trait Provider: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;

    fn label(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// `{"model", "prompt", "max_tokens", "temperature"}` → `{"text"}`.
    Completion,
    /// Prompt sent as a single user message.
    Chat,
    /// Stub that answers the gold letter of any known item.
    Oracle,
    /// Stub that answers uniformly at random.
    Random,
    /// Stub that always answers the same letter.
    Fixed,
}

/// Provider settings as read from a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    /// Header carrying the credential, e.g. `Authorization`.
    #[serde(default)]
    pub auth_header: Option<String>,
    /// Environment variable holding the credential.
    #[serde(default)]
    pub auth_env: Option<String>,
    /// Prepended to the credential, e.g. `Bearer `.
    #[serde(default)]
    pub auth_prefix: Option<String>,
    /// Letter for the fixed stub.
    #[serde(default)]
    pub letter: Option<char>,
    /// Seed for the random stub.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> usize {
    3
}

fn default_max_tokens() -> u32 {
    16
}

impl ProviderConfig {
    pub fn stub(kind: ProviderKind) -> Self {
        ProviderConfig {
            kind,
            base_url: None,
            model: None,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            max_tokens: default_max_tokens(),
            headers: BTreeMap::new(),
            auth_header: None,
            auth_env: None,
            auth_prefix: None,
            letter: None,
            seed: None,
        }
    }

    /// Builds the provider. The oracle needs the scored items.
    pub fn build(&self, items: &[McqItem]) -> Result<Box<dyn Provider>, ProviderError> {
        match self.kind {
            ProviderKind::Completion | ProviderKind::Chat => Ok(Box::new(HttpProvider::new(self)?)),
            ProviderKind::Oracle => Ok(Box::new(GoldOracle::new(items.to_vec()))),
            ProviderKind::Random => Ok(Box::new(RandomProvider::new(self.seed.unwrap_or(0)))),
            ProviderKind::Fixed => {
                let letter = self.letter.unwrap_or('A');
                if !LETTERS.contains(&letter) {
                    return Err(ProviderError::Config(format!(
                        "fixed letter {letter:?} is not A-D"
                    )));
                }
                Ok(Box::new(FixedProvider(letter)))
            }
        }
    }
}

pub struct FixedProvider(pub char);

impl Provider for FixedProvider {
    fn complete(&self, _prompt: &str) -> Result<String, ProviderError> {
        Ok(self.0.to_string())
    }

    fn label(&self) -> String {
        format!("fixed:{}", self.0)
    }
}

/// Uniform random letters. The draw depends only on the seed and the
/// prompt, so results do not depend on request order.
pub struct RandomProvider {
    seed: u64,
}

impl RandomProvider {
    pub fn new(seed: u64) -> Self {
        RandomProvider { seed }
    }
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

impl Provider for RandomProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(prompt));
        Ok(LETTERS[rng.gen_range(0..4)].to_string())
    }

    fn label(&self) -> String {
        format!("random:{}", self.seed)
    }
}

/// Answers with the letter under which the gold option of the scored
/// question appears. It reads the prompt only: the scored question is the
/// last complete question block, matched against every known item and
/// option order.
pub struct GoldOracle {
    items: Vec<McqItem>,
    perms: Vec<Permutation>,
}

impl GoldOracle {
    pub fn new(items: Vec<McqItem>) -> Self {
        let mut perms = Vec::with_capacity(24);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let p = [a, b, c, d];
                        let mut s = p;
                        s.sort();
                        if s == [0, 1, 2, 3] {
                            perms.push(p);
                        }
                    }
                }
            }
        }
        GoldOracle { items, perms }
    }
}

impl Provider for GoldOracle {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let mut best: Option<(usize, char)> = None;
        for item in self.items.iter().filter(|i| prompt.contains(&i.stem)) {
            for perm in &self.perms {
                let block = format_question(item, perm) + "Answer:";
                if let Some(pos) = prompt.rfind(&block) {
                    if best.is_none_or(|(p, _)| pos > p) {
                        best = Some((pos, gold_letter(item, perm)));
                    }
                }
            }
        }
        best.map(|(_, letter)| letter.to_string()).ok_or_else(|| {
            ProviderError::Response("oracle found no known question in the prompt".into())
        })
    }

    fn label(&self) -> String {
        "oracle".into()
    }
}

/// JSON-over-HTTP model endpoint.
pub struct HttpProvider {
    client: reqwest::blocking::Client,
    config: ProviderConfig,
    url: String,
    model: String,
    auth: Option<(String, String)>,
}

impl HttpProvider {
    pub fn new(config: &ProviderConfig) -> Result<Self, ProviderError> {
        let url = config
            .base_url
            .clone()
            .ok_or_else(|| ProviderError::Config("base_url is required".into()))?;
        let model = config
            .model
            .clone()
            .ok_or_else(|| ProviderError::Config("model is required".into()))?;
        if config.timeout_secs == 0 {
            return Err(ProviderError::Config(
                "timeout_secs must be positive".into(),
            ));
        }
        let auth = match (&config.auth_header, &config.auth_env) {
            (Some(header), Some(var)) => {
                let value = std::env::var(var).map_err(|_| {
                    ProviderError::Config(format!("environment variable {var} is not set"))
                })?;
                Some((
                    header.clone(),
                    format!("{}{value}", config.auth_prefix.as_deref().unwrap_or("")),
                ))
            }
            (None, None) => None,
            _ => {
                return Err(ProviderError::Config(
                    "auth_header and auth_env go together".into(),
                ))
            }
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(HttpProvider {
            client,
            config: config.clone(),
            url,
            model,
            auth,
        })
    }

    fn body(&self, prompt: &str) -> Value {
        match self.config.kind {
            ProviderKind::Chat => json!({
                "model": self.model,
                "messages": [{"role": "user", "content": prompt}],
                "max_tokens": self.config.max_tokens,
                "temperature": 0,
            }),
            _ => json!({
                "model": self.model,
                "prompt": prompt,
                "max_tokens": self.config.max_tokens,
                "temperature": 0,
            }),
        }
    }

    fn attempt(&self, body: &Value) -> Result<Value, (bool, String)> {
        let mut request = self.client.post(&self.url).json(body);
        for (k, v) in &self.config.headers {
            request = request.header(k, v);
        }
        if let Some((k, v)) = &self.auth {
            request = request.header(k, v);
        }
        let response = request.send().map_err(|e| (true, e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let retry = status.is_server_error() || status.as_u16() == 429;
            return Err((retry, format!("HTTP {status}")));
        }
        response.json::<Value>().map_err(|e| (false, e.to_string()))
    }
}

/// Text of a completion: `{"text"}`, or the first choice in the common
/// `choices` layouts.
fn response_text(value: &Value) -> Option<String> {
    if let Some(t) = value.get("text").and_then(Value::as_str) {
        return Some(t.to_string());
    }
    let choice = value.get("choices")?.get(0)?;
    choice
        .get("text")
        .or_else(|| choice.get("message")?.get("content"))
        .and_then(Value::as_str)
        .map(String::from)
}

impl Provider for HttpProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = self.body(prompt);
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 << attempt.min(6)));
            }
            match self.attempt(&body) {
                Ok(value) => {
                    return response_text(&value)
                        .ok_or_else(|| ProviderError::Response(format!("no text in {value}")))
                }
                Err((retry, detail)) => {
                    log::warn!("{} attempt {}: {detail}", self.url, attempt + 1);
                    last = detail;
                    if !retry {
                        return Err(ProviderError::Request {
                            attempts: attempt + 1,
                            detail: last,
                        });
                    }
                }
            }
        }
        Err(ProviderError::Request {
            attempts,
            detail: last,
        })
    }

    fn label(&self) -> String {
        format!("{}:{}", self.url, self.model)
    }
}
