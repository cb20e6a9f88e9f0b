//! Line-delimited episode log: one JSON record per event.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comms::Message;
use crate::feedback::Feedback;
use crate::policy::{Ablations, PolicyDecision};
use crate::scenario::Scenario;
use crate::world::RobotId;

use super::EpisodeMetrics;

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub version: u32,
    pub scenario_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_path: Option<String>,
    pub scenario: Scenario,
    pub horizon: u32,
    pub seed: u64,
    pub no_mobile_robot: bool,
    pub roster: Vec<RobotId>,
    pub policies: BTreeMap<RobotId, String>,
    pub ablations: BTreeMap<RobotId, Ablations>,
    pub system_prompts: BTreeMap<RobotId, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Header(Box<LogHeader>),
    /// A message drained into the recipient's turn.
    Delivery {
        step: u32,
        robot: RobotId,
        message: Message,
    },
    Decision {
        step: u32,
        robot: RobotId,
        /// Objects in the robot's scene graph when it decided.
        known_objects: Vec<String>,
        prompt: String,
        decision: PolicyDecision,
    },
    Feedback {
        step: u32,
        robot: RobotId,
        feedback: Feedback,
    },
    /// A message accepted by the channel.
    Message {
        step: u32,
        message: Message,
    },
    StateHash {
        step: u32,
        hash: String,
    },
    Result(EpisodeMetrics),
}

impl LogRecord {
    pub fn step(&self) -> Option<u32> {
        match self {
            LogRecord::Delivery { step, .. }
            | LogRecord::Decision { step, .. }
            | LogRecord::Feedback { step, .. }
            | LogRecord::Message { step, .. }
            | LogRecord::StateHash { step, .. } => Some(*step),
            LogRecord::Header(_) | LogRecord::Result(_) => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LogRecord::Header(_) => "header",
            LogRecord::Delivery { .. } => "delivery",
            LogRecord::Decision { .. } => "decision",
            LogRecord::Feedback { .. } => "feedback",
            LogRecord::Message { .. } => "message",
            LogRecord::StateHash { .. } => "state_hash",
            LogRecord::Result(_) => "result",
        }
    }
}

/// One line per record, newline-terminated.
pub fn to_jsonl(records: &[LogRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("log records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_log(path: &Path, records: &[LogRecord]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_jsonl(records).as_bytes())?;
    f.flush()
}

#[derive(Debug, thiserror::Error)]
pub enum LogReadError {
    #[error("cannot read log: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn parse_jsonl(text: &str) -> Result<Vec<LogRecord>, LogReadError> {
    read_records(text.as_bytes())
}

pub fn read_log(path: &Path) -> Result<Vec<LogRecord>, LogReadError> {
    read_records(BufReader::new(std::fs::File::open(path)?))
}

fn read_records(reader: impl BufRead) -> Result<Vec<LogRecord>, LogReadError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| LogReadError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}
