//! Chat providers (live HTTP, transcript replay, scripted) and transcripts.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::prompt::{PromptMessage, Role};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
    /// Milliseconds since the Unix epoch.
    pub ts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub provider: String,
    pub model: String,
    pub turns: Vec<Turn>,
}

impl Transcript {
    pub fn new(session_id: impl Into<String>, provider: impl Into<String>, model: impl Into<String>) -> Self {
        Transcript {
            session_id: session_id.into(),
            provider: provider.into(),
            model: model.into(),
            turns: Vec::new(),
        }
    }

    pub fn persist(&self, path: &Path) -> Result<(), LlmError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut text = serde_json::to_string_pretty(self).expect("transcript serializes");
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LlmError::Malformed {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn user_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.role == Role::User)
    }
}

/// `<domain>_<seed>_<approach>.json`
pub fn transcript_file_name(domain: &str, seed: u64, approach: &str) -> String {
    format!("{domain}_{seed}_{approach}.json")
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("replay diverged at turn {turn}:\n{diff}")]
    ReplayDivergence { turn: usize, diff: String },
    #[error("replay exhausted after {turns} recorded turn(s)")]
    ReplayExhausted { turns: usize },
    #[error("scripted provider has no response left (gave {given})")]
    ScriptExhausted { given: usize },
    #[error("transcript must end with an assistant turn before a new query")]
    PendingTurn,
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("malformed response: {0}")]
    Response(String),
    #[error("malformed transcript {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub struct Exchange {
    pub text: String,
    pub user_ts: u64,
    pub assistant_ts: u64,
}

pub trait ChatProvider: Send {
    fn tag(&self) -> &str;
    fn model(&self) -> &str;
    /// Respond to `message` given the prior turns.
    fn respond(&mut self, history: &[Turn], message: &PromptMessage) -> Result<Exchange, LlmError>;
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Send `message`, append both turns to `transcript` and return the reply.
pub fn query(
    transcript: &mut Transcript,
    message: &PromptMessage,
    provider: &mut dyn ChatProvider,
) -> Result<String, LlmError> {
    if transcript.turns.last().is_some_and(|t| t.role != Role::Assistant) {
        return Err(LlmError::PendingTurn);
    }
    let exchange = provider.respond(&transcript.turns, message)?;
    transcript.turns.push(Turn {
        role: message.role,
        text: message.text.clone(),
        ts: exchange.user_ts,
    });
    transcript.turns.push(Turn {
        role: Role::Assistant,
        text: exchange.text.clone(),
        ts: exchange.assistant_ts,
    });
    Ok(exchange.text)
}

/// Fixed responses in order. Timestamps are zero so runs are reproducible.
pub struct ScriptedProvider {
    responses: Vec<String>,
    next: usize,
}

impl ScriptedProvider {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedProvider {
            responses: responses.into_iter().map(Into::into).collect(),
            next: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.responses.len() - self.next
    }
}

impl ChatProvider for ScriptedProvider {
    fn tag(&self) -> &str {
        "scripted"
    }

    fn model(&self) -> &str {
        "scripted"
    }

    fn respond(&mut self, _: &[Turn], _: &PromptMessage) -> Result<Exchange, LlmError> {
        let text = self
            .responses
            .get(self.next)
            .cloned()
            .ok_or(LlmError::ScriptExhausted {
                given: self.responses.len(),
            })?;
        self.next += 1;
        Ok(Exchange {
            text,
            user_ts: 0,
            assistant_ts: 0,
        })
    }
}

/// Serves a recorded transcript, requiring each prompt to match the recording
/// byte for byte. With a fallback, continues live once the recording ends,
/// which is how an interrupted session resumes.
pub struct ReplayProvider {
    recorded: Transcript,
    /// Index into `recorded.turns` of the next user turn.
    cursor: usize,
    fallback: Option<Box<dyn ChatProvider>>,
}

impl ReplayProvider {
    pub fn new(recorded: Transcript) -> Self {
        ReplayProvider {
            recorded,
            cursor: 0,
            fallback: None,
        }
    }

    pub fn with_fallback(recorded: Transcript, fallback: Box<dyn ChatProvider>) -> Self {
        ReplayProvider {
            fallback: Some(fallback),
            ..ReplayProvider::new(recorded)
        }
    }

    fn recorded_pair(&self) -> Option<(&Turn, &Turn)> {
        let user = self.recorded.turns.get(self.cursor)?;
        let reply = self.recorded.turns.get(self.cursor + 1)?;
        (reply.role == Role::Assistant).then_some((user, reply))
    }
}

/// First difference between two prompts, as line number and both lines.
pub fn describe_divergence(expected: &str, actual: &str) -> String {
    let offset = expected
        .char_indices()
        .zip(actual.chars())
        .find(|((_, a), b)| a != b)
        .map(|((i, _), _)| i)
        .unwrap_or(expected.len().min(actual.len()));
    let line_no = expected[..offset].matches('\n').count() + 1;
    let line = |s: &str| s.lines().nth(line_no - 1).unwrap_or("<end of text>").to_owned();
    format!(
        "first difference at byte {offset}, line {line_no}\n- recorded: {}\n+ actual:   {}",
        line(expected),
        line(actual)
    )
}

impl ChatProvider for ReplayProvider {
    fn tag(&self) -> &str {
        &self.recorded.provider
    }

    fn model(&self) -> &str {
        &self.recorded.model
    }

    fn respond(&mut self, history: &[Turn], message: &PromptMessage) -> Result<Exchange, LlmError> {
        let turn = self.cursor / 2;
        let Some((user, reply)) = self.recorded_pair() else {
            return match &mut self.fallback {
                Some(inner) => inner.respond(history, message),
                None => Err(LlmError::ReplayExhausted {
                    turns: self.recorded.turns.len(),
                }),
            };
        };
        if user.text != message.text || user.role != message.role {
            return Err(LlmError::ReplayDivergence {
                turn,
                diff: describe_divergence(&user.text, &message.text),
            });
        }
        let exchange = Exchange {
            text: reply.text.clone(),
            user_ts: user.ts,
            assistant_ts: reply.ts,
        };
        self.cursor += 2;
        Ok(exchange)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Live,
    Replay,
    #[default]
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub provider: ProviderKind,
    /// Base address of a chat-completions server, e.g. `https://host`.
    pub endpoint: Option<String>,
    pub path: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_s: f64,
    pub retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub backoff_ms: u64,
    pub max_concurrent: usize,
    /// Recorded transcript for the replay provider.
    pub replay_path: Option<PathBuf>,
    /// JSON array of responses for the scripted provider.
    pub script_path: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            provider: ProviderKind::Scripted,
            endpoint: None,
            path: "/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key_env: "GENPLAN_API_KEY".into(),
            timeout_s: 600.0,
            retries: 3,
            backoff_ms: 1000,
            max_concurrent: 4,
            replay_path: None,
            script_path: None,
        }
    }
}

impl ProviderConfig {
    pub fn build(&self) -> Result<Box<dyn ChatProvider>, LlmError> {
        match self.provider {
            ProviderKind::Live => Ok(Box::new(LiveProvider::from_config(self)?)),
            ProviderKind::Replay => {
                let path = self
                    .replay_path
                    .as_ref()
                    .ok_or_else(|| LlmError::Config("replay requires a transcript path".into()))?;
                Ok(Box::new(ReplayProvider::new(Transcript::load(path)?)))
            }
            ProviderKind::Scripted => {
                let path = self
                    .script_path
                    .as_ref()
                    .ok_or_else(|| LlmError::Config("scripted provider requires a script path".into()))?;
                let text = fs::read_to_string(path)?;
                let responses: Vec<String> = serde_json::from_str(&text).map_err(|e| LlmError::Malformed {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                Ok(Box::new(ScriptedProvider::new(responses)))
            }
        }
    }
}

/// Process-wide cap on in-flight live requests.
struct Limiter {
    state: Mutex<(usize, usize)>,
    freed: Condvar,
}

static LIMITER: Limiter = Limiter {
    state: Mutex::new((0, usize::MAX)),
    freed: Condvar::new(),
};

struct Permit;

impl Limiter {
    fn set_cap(&self, cap: usize) {
        let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        state.1 = cap.max(1);
        self.freed.notify_all();
    }

    fn acquire(&'static self) -> Permit {
        let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        while state.0 >= state.1 {
            state = self.freed.wait(state).unwrap_or_else(|e| e.into_inner());
        }
        state.0 += 1;
        Permit
    }
}

impl Drop for Permit {
    fn drop(&mut self) {
        let mut state = LIMITER.state.lock().unwrap_or_else(|e| e.into_inner());
        state.0 -= 1;
        LIMITER.freed.notify_one();
    }
}

/// A generic chat-completions endpoint over HTTP and JSON.
pub struct LiveProvider {
    agent: ureq::Agent,
    url: String,
    model: String,
    api_key: String,
    retries: u32,
    backoff: Duration,
}

impl LiveProvider {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, LlmError> {
        let endpoint = cfg
            .endpoint
            .as_deref()
            .ok_or_else(|| LlmError::Config("live provider requires an endpoint".into()))?;
        let api_key = std::env::var(&cfg.api_key_env)
            .map_err(|_| LlmError::Config(format!("credential variable {} is not set", cfg.api_key_env)))?;
        LIMITER.set_cap(cfg.max_concurrent);
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_s.max(0.001))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(LiveProvider {
            agent,
            url: format!("{}{}", endpoint.trim_end_matches('/'), cfg.path),
            model: cfg.model.clone(),
            api_key,
            retries: cfg.retries,
            backoff: Duration::from_millis(cfg.backoff_ms),
        })
    }

    fn body(&self, history: &[Turn], message: &PromptMessage) -> Value {
        let role = |r: Role| match r {
            Role::User => "user",
            Role::Assistant => "assistant",
            Role::SystemNote => "system",
        };
        let mut messages: Vec<Value> = history
            .iter()
            .map(|t| json!({"role": role(t.role), "content": t.text}))
            .collect();
        messages.push(json!({"role": role(message.role), "content": message.text}));
        json!({"model": self.model, "messages": messages})
    }

    /// One request. `Err((retryable, message))` on failure.
    fn attempt(&self, body: &Value) -> Result<String, (bool, String)> {
        let _permit = LIMITER.acquire();
        let mut response = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| (true, e.to_string()))?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| (true, e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err((true, format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        if status >= 400 {
            return Err((false, format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| (false, format!("invalid JSON: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| (false, "no choices[0].message.content in response".to_owned()))
    }
}

impl ChatProvider for LiveProvider {
    fn tag(&self) -> &str {
        "live"
    }

    fn model(&self) -> &str {
        &self.model
    }

    fn respond(&mut self, history: &[Turn], message: &PromptMessage) -> Result<Exchange, LlmError> {
        let body = self.body(history, message);
        let user_ts = now_ms();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Ok(text) => {
                    return Ok(Exchange {
                        text,
                        user_ts,
                        assistant_ts: now_ms(),
                    })
                }
                Err((false, message)) => return Err(LlmError::Response(message)),
                Err((true, message)) if attempts > self.retries => {
                    return Err(LlmError::Transport { attempts, message })
                }
                Err((true, message)) => {
                    let delay = self.backoff * 2u32.saturating_pow(attempts - 1);
                    log::warn!("request failed ({message}); retrying in {delay:?}");
                    thread::sleep(delay);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_points_at_line() {
        let d = describe_divergence("a\nbcd\ne", "a\nbxd\ne");
        assert!(d.contains("line 2"), "{d}");
        assert!(d.contains("- recorded: bcd") && d.contains("+ actual:   bxd"));
        let d = describe_divergence("abc", "ab");
        assert!(d.contains("byte 2"), "{d}");
    }

    #[test]
    fn query_requires_completed_turn() {
        let mut t = Transcript::new("s", "scripted", "m");
        t.turns.push(Turn {
            role: Role::User,
            text: "hi".into(),
            ts: 0,
        });
        let mut p = ScriptedProvider::new(["x"]);
        assert!(matches!(
            query(&mut t, &PromptMessage::user("again"), &mut p),
            Err(LlmError::PendingTurn)
        ));
    }
}
