//! Chat-completions backend.
//!
//! Each decision is a fresh two-message request (system, user). When the
//! reply has no parsable action the conversation is extended with the reply
//! and a fixed corrective instruction, up to `max_retries` times.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::parse::{extract_thought, parse_action};
use super::{Observation, Policy, PolicyDecision, PromptBundle};
use crate::world::Action;

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "ROBOCOLLAB_API_KEY";

pub const CORRECTIVE_REPROMPT: &str = "Your previous reply could not be executed. \
Reply again with your reasoning followed by exactly one fenced block tagged action \
that contains a single action from the available action list.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatConfig {
    /// Full URL of the chat-completions route.
    pub endpoint: String,
    pub model_name: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Record full request/response transcripts in decisions.
    #[serde(default)]
    pub verbose: bool,
}

fn default_temperature() -> f64 {
    0.5
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> u32 {
    2
}

impl ChatConfig {
    pub fn new(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            temperature: default_temperature(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            verbose: false,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!("temperature {} is outside [0, 2]", self.temperature));
        }
        if self.endpoint.trim().is_empty() {
            return Err("chat endpoint is empty".into());
        }
        if self.timeout_secs == 0 {
            return Err("timeout must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    fn new(role: &str, content: impl Into<String>) -> Self {
        Self {
            role: role.into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("unexpected backend response: {0}")]
    Protocol(String),
}

pub trait ChatTransport: Send {
    /// Returns the assistant text of the first choice.
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Blocking HTTP transport. The API key is read from [`API_KEY_ENV`].
pub struct HttpChatTransport {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpChatTransport {
    pub fn new(config: &ChatConfig) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| TransportError::Unavailable(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: config.endpoint.clone(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        })
    }
}

impl ChatTransport for HttpChatTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut builder = self.client.post(&self.endpoint).json(request);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| TransportError::Unavailable(e.to_string()))?;
        let status = response.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(TransportError::Unavailable(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(TransportError::Protocol(format!("status {status}")));
        }
        let body: Value = response.json().map_err(|e| TransportError::Protocol(e.to_string()))?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| TransportError::Protocol(format!("no message content in {}", json!(body))))
    }
}

pub struct ChatPolicy {
    config: ChatConfig,
    transport: Box<dyn ChatTransport>,
    seed: u64,
}

impl ChatPolicy {
    pub fn new(config: ChatConfig, transport: Box<dyn ChatTransport>, seed: u64) -> Self {
        Self {
            config,
            transport,
            seed,
        }
    }
}

impl Policy for ChatPolicy {
    fn name(&self) -> &str {
        &self.config.model_name
    }

    fn decide(&mut self, obs: &Observation<'_>, prompt: &PromptBundle) -> PolicyDecision {
        let mut messages = vec![
            ChatMessage::new("system", &prompt.system_text),
            ChatMessage::new("user", &prompt.user_text),
        ];
        let mut retries = 0;
        loop {
            let request = ChatRequest {
                model: self.config.model_name.clone(),
                temperature: self.config.temperature,
                messages: messages.clone(),
                seed: Some(self.seed),
            };
            let reply = match self.transport.complete(&request) {
                Ok(r) => r,
                Err(e) => {
                    let mut d = PolicyDecision::fallback_wait(String::new(), Some(e.to_string()));
                    d.retries = retries;
                    if self.config.verbose {
                        d.transcript = messages;
                    }
                    return d;
                }
            };
            messages.push(ChatMessage::new("assistant", &reply));
            match parse_action(&reply, obs.robot.role, obs.roster) {
                Ok(action) => {
                    return PolicyDecision {
                        thought: extract_thought(&reply),
                        action,
                        raw_output: reply,
                        retries,
                        parse_failed: false,
                        error: None,
                        transcript: if self.config.verbose { messages } else { Vec::new() },
                    };
                }
                Err(failure) if retries < self.config.max_retries => {
                    retries += 1;
                    messages.push(ChatMessage::new("user", format!("{CORRECTIVE_REPROMPT} ({failure})")));
                }
                Err(failure) => {
                    return PolicyDecision {
                        thought: extract_thought(&reply),
                        action: Action::Wait,
                        raw_output: reply,
                        retries,
                        parse_failed: true,
                        error: Some(failure.to_string()),
                        transcript: if self.config.verbose { messages } else { Vec::new() },
                    };
                }
            }
        }
    }
}
