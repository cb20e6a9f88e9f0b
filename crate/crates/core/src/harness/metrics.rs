use std::path::Path;

use serde::{Deserialize, Serialize};

use super::log::{read_log, LogReadError, LogRecord};
use super::EpisodeMetrics;
use crate::tasks::TaskKind;

/// Means of the four metrics over completed episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    /// Episodes attempted, including those that could not run.
    pub episodes: usize,
    pub completed: usize,
    pub succ_rate: f64,
    pub mean_ps: f64,
    pub mean_ts: f64,
    pub mean_as: f64,
}

pub fn aggregate<'a>(completed: impl IntoIterator<Item = &'a EpisodeMetrics>, errored: usize) -> AggregateMetrics {
    let items: Vec<&EpisodeMetrics> = completed.into_iter().collect();
    let n = items.len();
    let mean = |f: &dyn Fn(&EpisodeMetrics) -> f64| {
        if n == 0 {
            0.0
        } else {
            items.iter().map(|m| f(m)).sum::<f64>() / n as f64
        }
    };
    AggregateMetrics {
        episodes: n + errored,
        completed: n,
        succ_rate: mean(&|m| if m.success { 1.0 } else { 0.0 }),
        mean_ps: mean(&|m| m.partial_success),
        mean_ts: mean(&|m| m.temporal_steps as f64),
        mean_as: mean(&|m| m.action_steps as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task: TaskKind,
    pub metrics: AggregateMetrics,
}

/// One row per policy label; Succ, PS, TS and AS for each task.
pub fn format_table(rows: &[(String, Vec<TaskRow>)]) -> String {
    let mut head = String::from("| Policy |");
    let mut rule = String::from("|---|");
    for task in TaskKind::ALL {
        head.push_str(&format!(" {} Succ | PS | TS | AS |", task.title()));
        rule.push_str("---:|---:|---:|---:|");
    }
    let mut out = format!("{head}\n{rule}\n");
    for (label, tasks) in rows {
        out.push_str(&format!("| {label} |"));
        for task in TaskKind::ALL {
            match tasks.iter().find(|r| r.task == task) {
                Some(r) if r.metrics.completed > 0 => {
                    let m = &r.metrics;
                    out.push_str(&format!(
                        " {:.2} | {:.2} | {:.2} | {:.2} |",
                        m.succ_rate, m.mean_ps, m.mean_ts, m.mean_as
                    ));
                }
                _ => out.push_str(" - | - | - | - |"),
            }
        }
        out.push('\n');
    }
    let counts: Vec<String> = rows
        .iter()
        .flat_map(|(label, tasks)| {
            tasks.iter().map(move |r| {
                format!(
                    "{label} / {}: {} of {} episodes completed",
                    r.task.title(),
                    r.metrics.completed,
                    r.metrics.episodes
                )
            })
        })
        .collect();
    for c in counts {
        out.push_str(&c);
        out.push('\n');
    }
    out
}

/// Task kind, scenario name and recorded result of a log, without
/// re-execution.
pub fn metrics_from_log(path: &Path) -> Result<(TaskKind, String, EpisodeMetrics), LogReadError> {
    let records = read_log(path)?;
    let bad = |what: &str| {
        LogReadError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{}: {what}", path.display()),
        ))
    };
    let Some(LogRecord::Header(h)) = records.first() else {
        return Err(bad("missing header"));
    };
    let Some(LogRecord::Result(m)) = records.last() else {
        return Err(bad("missing result record"));
    };
    Ok((h.scenario.task.kind(), h.scenario.name.clone(), m.clone()))
}
