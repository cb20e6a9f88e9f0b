use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use thiserror::Error;

use super::log::{read_log, LogRecord};
use super::{simulate, EpisodeResult};
use crate::policy::{Observation, Policy, PolicyDecision, PromptBundle};
use crate::scenario::Scenario;
use crate::world::RobotId;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("log is corrupt: {0}")]
    LogCorrupt(String),
    #[error("drift detected at step {step} (record {index}, {kind}): {detail}")]
    DriftDetected {
        step: u32,
        index: usize,
        kind: &'static str,
        detail: String,
    },
}

/// Returns the decisions recorded for one robot, in order.
struct Recorded {
    decisions: VecDeque<PolicyDecision>,
}

impl Policy for Recorded {
    fn name(&self) -> &str {
        "replay"
    }

    fn decide(&mut self, _obs: &Observation<'_>, _prompt: &PromptBundle) -> PolicyDecision {
        self.decisions
            .pop_front()
            .unwrap_or_else(|| PolicyDecision::scripted("log exhausted", crate::world::Action::Wait))
    }
}

/// Re-executes a log file and checks every recomputed record against it.
pub fn replay(path: &Path) -> Result<EpisodeResult, ReplayError> {
    let records = read_log(path).map_err(|e| ReplayError::LogCorrupt(e.to_string()))?;
    let mut result = replay_records(&records)?;
    result.log_path = Some(path.display().to_string());
    Ok(result)
}

pub fn replay_records(records: &[LogRecord]) -> Result<EpisodeResult, ReplayError> {
    let Some(LogRecord::Header(header)) = records.first() else {
        return Err(ReplayError::LogCorrupt("first record is not a header".into()));
    };
    let header = header.as_ref().clone();
    if header.scenario.content_hash() != header.scenario_hash {
        return Err(ReplayError::LogCorrupt(
            "embedded scenario does not match its hash".into(),
        ));
    }
    if let Some(path) = &header.scenario_path {
        // a missing file is tolerated; a changed one is not
        if let Ok(on_disk) = Scenario::load(path) {
            if on_disk.content_hash() != header.scenario_hash {
                return Err(ReplayError::LogCorrupt(format!(
                    "scenario file {path} changed since the log was written"
                )));
            }
        }
    }
    let mut queues: BTreeMap<RobotId, VecDeque<PolicyDecision>> = BTreeMap::new();
    for r in records {
        if let LogRecord::Decision { robot, decision, .. } = r {
            queues.entry(*robot).or_default().push_back(decision.clone());
        }
    }
    let mut policies: BTreeMap<RobotId, Box<dyn Policy>> = header
        .policies
        .keys()
        .map(|id| {
            let decisions = queues.remove(id).unwrap_or_default();
            (*id, Box::new(Recorded { decisions }) as Box<dyn Policy>)
        })
        .collect();
    let mut fresh_header = header.clone();
    fresh_header.roster.clear();
    fresh_header.system_prompts.clear();
    let (metrics, fresh) = simulate(fresh_header, &mut policies).map_err(|e| ReplayError::LogCorrupt(e.to_string()))?;

    for (index, (old, new)) in records.iter().zip(&fresh).enumerate() {
        if old != new {
            let step = new.step().or(old.step()).unwrap_or(header.horizon);
            return Err(ReplayError::DriftDetected {
                step,
                index,
                kind: old.kind(),
                detail: format!("logged {} differs from recomputed {}", old.kind(), new.kind()),
            });
        }
    }
    if records.len() != fresh.len() {
        let index = records.len().min(fresh.len());
        let at = fresh.get(index).or(records.get(index));
        return Err(ReplayError::DriftDetected {
            step: at.and_then(LogRecord::step).unwrap_or(header.horizon),
            index,
            kind: at.map(LogRecord::kind).unwrap_or("end"),
            detail: format!("logged {} records, recomputed {}", records.len(), fresh.len()),
        });
    }
    Ok(EpisodeResult {
        scenario: header.scenario.name.clone(),
        task: header.scenario.task.kind(),
        metrics,
        log_path: None,
        log: fresh,
    })
}
