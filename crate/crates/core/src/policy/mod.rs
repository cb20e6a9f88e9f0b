//! Per-robot decision functions.
//!
//! A policy receives the robot's local [`Observation`] and its serialized
//! [`PromptBundle`] and returns exactly one atomic action. Every failure
//! path inside a policy degrades to `wait()`; `decide` never errors.

mod chat;
mod oracle;
mod parse;
mod prompt;

use serde::{Deserialize, Serialize};

use crate::comms::Message;
use crate::feedback::Feedback;
use crate::memory::MemoryBuffer;
use crate::scenegraph::SceneGraph;
use crate::tasks::TaskSpec;
use crate::world::{Action, GridMap, Robot, RobotId};

pub use chat::{
    ChatConfig, ChatMessage, ChatPolicy, ChatRequest, ChatTransport, HttpChatTransport, TransportError, API_KEY_ENV,
    CORRECTIVE_REPROMPT,
};
pub use oracle::OraclePolicy;
pub use parse::{extract_thought, parse_action, ParseFailure};
pub use prompt::{serialize_observation, system_prompt, PromptBundle, SECTION_HEADINGS};

/// Switches that remove parts of the observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ablations {
    #[serde(default)]
    pub no_feedback: bool,
    #[serde(default)]
    pub no_history: bool,
}

/// Everything a robot can see at its turn.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub step: u32,
    pub robot: &'a Robot,
    pub roster: &'a [RobotId],
    pub graph: &'a SceneGraph,
    /// Static occupancy map, known to every robot.
    pub map: &'a GridMap,
    /// Messages drained at the start of this turn.
    pub new_messages: &'a [Message],
    pub memory: &'a MemoryBuffer,
    pub task: &'a TaskSpec,
    pub task_text: &'a str,
    pub ablations: Ablations,
}

impl Observation<'_> {
    /// Most recent own feedback, hidden under the feedback ablation.
    pub fn latest_feedback(&self) -> Option<&Feedback> {
        if self.ablations.no_feedback {
            None
        } else {
            self.memory.latest_feedback()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision {
    pub thought: String,
    pub action: Action,
    pub raw_output: String,
    /// Re-queries after a parse failure.
    #[serde(default)]
    pub retries: u32,
    /// True when retries were exhausted and the action fell back to wait.
    #[serde(default)]
    pub parse_failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transcript: Vec<ChatMessage>,
}

impl PolicyDecision {
    /// A decision that was not produced by a language model.
    pub fn scripted(thought: impl Into<String>, action: Action) -> Self {
        let thought = thought.into();
        let raw_output = format!("{thought}\n```action\n{action}\n```");
        Self {
            thought,
            action,
            raw_output,
            retries: 0,
            parse_failed: false,
            error: None,
            transcript: Vec::new(),
        }
    }

    pub fn fallback_wait(raw_output: String, error: Option<String>) -> Self {
        Self {
            thought: String::new(),
            action: Action::Wait,
            raw_output,
            retries: 0,
            parse_failed: false,
            error,
            transcript: Vec::new(),
        }
    }
}

pub trait Policy: Send {
    fn name(&self) -> &str;
    fn decide(&mut self, obs: &Observation<'_>, prompt: &PromptBundle) -> PolicyDecision;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    ChatModel(ChatConfig),
    ScriptedOracle,
    AlwaysWait,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub backend: Backend,
    #[serde(default)]
    pub ablations: Ablations,
}

impl PolicyConfig {
    pub fn oracle() -> Self {
        Self {
            backend: Backend::ScriptedOracle,
            ablations: Ablations::default(),
        }
    }

    pub fn always_wait() -> Self {
        Self {
            backend: Backend::AlwaysWait,
            ablations: Ablations::default(),
        }
    }

    pub fn with_ablations(mut self, ablations: Ablations) -> Self {
        self.ablations = ablations;
        self
    }

    /// Builds the policy for one robot. Chat backends use the HTTP transport.
    pub fn build(&self, robot: RobotId, seed: u64) -> Result<Box<dyn Policy>, String> {
        Ok(match &self.backend {
            Backend::ScriptedOracle => Box::new(OraclePolicy::new(robot)),
            Backend::AlwaysWait => Box::new(WaitPolicy),
            Backend::ChatModel(cfg) => {
                cfg.check()?;
                let transport = HttpChatTransport::new(cfg).map_err(|e| e.to_string())?;
                Box::new(ChatPolicy::new(cfg.clone(), Box::new(transport), seed))
            }
        })
    }
}

/// Waits every step.
#[derive(Debug, Clone, Copy, Default)]
pub struct WaitPolicy;

impl Policy for WaitPolicy {
    fn name(&self) -> &str {
        "always_wait"
    }

    fn decide(&mut self, _obs: &Observation<'_>, _prompt: &PromptBundle) -> PolicyDecision {
        PolicyDecision::scripted("Nothing to do.", Action::Wait)
    }
}

/// Plays back a fixed action list, then waits.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPolicy {
    actions: std::collections::VecDeque<Action>,
}

impl ScriptedPolicy {
    pub fn new(actions: impl IntoIterator<Item = Action>) -> Self {
        Self {
            actions: actions.into_iter().collect(),
        }
    }
}

impl Policy for ScriptedPolicy {
    fn name(&self) -> &str {
        "scripted"
    }

    fn decide(&mut self, _obs: &Observation<'_>, _prompt: &PromptBundle) -> PolicyDecision {
        let action = self.actions.pop_front().unwrap_or(Action::Wait);
        PolicyDecision::scripted("Following the script.", action)
    }
}
