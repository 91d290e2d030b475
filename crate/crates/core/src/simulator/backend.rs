//! Chat backend contract, the file-scripted mock and an optional
//! OpenAI-compatible HTTP binding.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::Decoding;
use crate::corpus::Role;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    /// The other party's turns.
    User,
    /// The agent's own earlier turns.
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub system_prompt: String,
    pub history: Vec<ChatMessage>,
    pub decoding: Decoding,
}

impl ChatRequest {
    /// History roles must alternate.
    pub fn validate(&self) -> Result<()> {
        self.decoding.validate()?;
        if self.history.windows(2).any(|w| w[0].role == w[1].role) {
            return Err(Error::Protocol("chat history does not alternate".into()));
        }
        Ok(())
    }
}

pub trait ChatBackend: Send {
    fn model(&self) -> &str;
    /// One completion; errors are treated as transport failures and retried.
    fn complete(&self, request: &ChatRequest) -> Result<String>;
}

/// Creates one backend handle per (session, role).
pub trait BackendFactory: Sync {
    /// Label given to corpora produced with this factory.
    fn name(&self) -> &str;
    fn create(&self, session: usize, role: Role) -> Result<Box<dyn ChatBackend>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptEntry {
    Reply(String),
    /// Simulated transport failure.
    Failure { error: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionScript {
    #[serde(default)]
    pub buyer: Vec<ScriptEntry>,
    #[serde(default)]
    pub seller: Vec<ScriptEntry>,
}

impl SessionScript {
    pub fn from_replies(buyer: &[&str], seller: &[&str]) -> Self {
        let f = |xs: &[&str]| xs.iter().map(|s| ScriptEntry::Reply(s.to_string())).collect();
        SessionScript {
            buyer: f(buyer),
            seller: f(seller),
        }
    }

    fn entries(&self, role: Role) -> &[ScriptEntry] {
        match role {
            Role::Buyer => &self.buyer,
            Role::Seller => &self.seller,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScriptFile {
    Named { name: String, sessions: Vec<SessionScript> },
    Many(Vec<SessionScript>),
    One(SessionScript),
}

/// Replays canned replies in order. Session `i` uses script `i mod len`.
#[derive(Debug, Clone)]
pub struct ScriptedFactory {
    name: String,
    sessions: Vec<SessionScript>,
}

impl ScriptedFactory {
    pub fn new(name: impl Into<String>, sessions: Vec<SessionScript>) -> Result<Self> {
        if sessions.is_empty() {
            return Err(Error::Config("scripted backend needs at least one session".into()));
        }
        Ok(ScriptedFactory {
            name: name.into(),
            sessions,
        })
    }

    /// Accepts `{"name", "sessions": [...]}`, an array of sessions, or a
    /// single `{"buyer": [...], "seller": [...]}` object.
    pub fn from_json(json: &str) -> Result<Self> {
        let file: ScriptFile = serde_json::from_str(json).map_err(|e| Error::Config(format!("script: {e}")))?;
        match file {
            ScriptFile::Named { name, sessions } => Self::new(name, sessions),
            ScriptFile::Many(sessions) => Self::new("scripted", sessions),
            ScriptFile::One(s) => Self::new("scripted", vec![s]),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn sessions(&self) -> &[SessionScript] {
        &self.sessions
    }
}

impl BackendFactory for ScriptedFactory {
    fn name(&self) -> &str {
        &self.name
    }

    fn create(&self, session: usize, role: Role) -> Result<Box<dyn ChatBackend>> {
        let script = &self.sessions[session % self.sessions.len()];
        Ok(Box::new(ScriptedBackend {
            model: format!("{}-{}", self.name, role.as_str()),
            replies: Mutex::new(script.entries(role).iter().cloned().collect()),
        }))
    }
}

pub struct ScriptedBackend {
    model: String,
    replies: Mutex<VecDeque<ScriptEntry>>,
}

impl ChatBackend for ScriptedBackend {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, request: &ChatRequest) -> Result<String> {
        request.validate()?;
        let next = self.replies.lock().expect("script lock").pop_front();
        match next {
            Some(ScriptEntry::Reply(text)) => Ok(text),
            Some(ScriptEntry::Failure { error }) => Err(Error::Backend(error)),
            None => Err(Error::Backend(format!("{}: script exhausted", self.model))),
        }
    }
}

#[cfg(feature = "http")]
pub use http::{HttpBackend, HttpFactory};

#[cfg(feature = "http")]
mod http {
    use super::*;

    /// OpenAI-compatible `POST {base_url}/chat/completions`.
    pub struct HttpBackend {
        client: reqwest::blocking::Client,
        base_url: String,
        api_key: Option<String>,
        model: String,
    }

    impl ChatBackend for HttpBackend {
        fn model(&self) -> &str {
            &self.model
        }

        fn complete(&self, request: &ChatRequest) -> Result<String> {
            let mut messages = vec![serde_json::json!({"role": "system", "content": request.system_prompt})];
            for m in &request.history {
                messages.push(serde_json::json!({"role": m.role, "content": m.text}));
            }
            let body = serde_json::json!({
                "model": request.model,
                "messages": messages,
                "temperature": request.decoding.temperature,
                "top_p": request.decoding.top_p,
            });
            let mut req = self
                .client
                .post(format!("{}/chat/completions", self.base_url.trim_end_matches('/')))
                .json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            let resp = req.send().map_err(|e| Error::Backend(e.to_string()))?;
            let status = resp.status();
            let value: serde_json::Value = resp.json().map_err(|e| Error::Backend(e.to_string()))?;
            if !status.is_success() {
                return Err(Error::Backend(format!("HTTP {status}: {value}")));
            }
            value["choices"][0]["message"]["content"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Backend(format!("no message content in {value}")))
        }
    }

    #[derive(Debug, Clone)]
    pub struct HttpFactory {
        pub base_url: String,
        pub model: String,
        /// Environment variable holding the bearer token.
        pub api_key_env: String,
    }

    impl BackendFactory for HttpFactory {
        fn name(&self) -> &str {
            &self.model
        }

        fn create(&self, _session: usize, _role: Role) -> Result<Box<dyn ChatBackend>> {
            let client = reqwest::blocking::Client::builder()
                .timeout(std::time::Duration::from_secs(120))
                .build()
                .map_err(|e| Error::Backend(e.to_string()))?;
            Ok(Box::new(HttpBackend {
                client,
                base_url: self.base_url.clone(),
                api_key: std::env::var(&self.api_key_env).ok(),
                model: self.model.clone(),
            }))
        }
    }
}
