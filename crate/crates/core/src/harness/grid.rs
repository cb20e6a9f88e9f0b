use std::path::PathBuf;

use rayon::prelude::*;

use super::metrics::{aggregate, format_table, TaskRow};
use super::{run_episode, EpisodeConfig, EpisodeResult, DEFAULT_HORIZON};
use crate::policy::PolicyConfig;
use crate::scenario::{generate, shipped_file_name, Layout, Scenario, SHIPPED_OBJECT_COUNTS};
use crate::tasks::TaskKind;

#[derive(Debug, Clone)]
pub struct GridConfig {
    /// Directory holding the shipped scenario files. Scenarios are generated
    /// in memory when unset.
    pub scenario_dir: Option<PathBuf>,
    pub layouts: Vec<Layout>,
    pub tasks: Vec<TaskKind>,
    pub object_counts: Vec<usize>,
    pub horizon: u32,
    pub policy: PolicyConfig,
    pub no_mobile_robot: bool,
    pub verbose: bool,
    /// One `<scenario>.jsonl` log per episode is written here when set.
    pub output_dir: Option<PathBuf>,
    pub label: String,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            scenario_dir: None,
            layouts: Layout::ALL.to_vec(),
            tasks: TaskKind::ALL.to_vec(),
            object_counts: SHIPPED_OBJECT_COUNTS.to_vec(),
            horizon: DEFAULT_HORIZON,
            policy: PolicyConfig::oracle(),
            no_mobile_robot: false,
            verbose: false,
            output_dir: None,
            label: "oracle".into(),
        }
    }
}

#[derive(Debug)]
pub struct GridEpisode {
    pub layout: Layout,
    pub task: TaskKind,
    pub objects: usize,
    pub outcome: Result<EpisodeResult, String>,
}

#[derive(Debug)]
pub struct GridReport {
    pub label: String,
    pub rows: Vec<TaskRow>,
    pub episodes: Vec<GridEpisode>,
}

impl GridReport {
    pub fn table(&self) -> String {
        let mut out = format_table(&[(self.label.clone(), self.rows.clone())]);
        for e in &self.episodes {
            if let Err(err) = &e.outcome {
                out.push_str(&format!(
                    "error in {}: {err}\n",
                    shipped_file_name(e.layout, e.task, e.objects)
                ));
            }
        }
        out
    }

    pub fn results(&self) -> impl Iterator<Item = &EpisodeResult> {
        self.episodes.iter().filter_map(|e| e.outcome.as_ref().ok())
    }
}

fn load(cfg: &GridConfig, layout: Layout, task: TaskKind, n: usize) -> Result<(Scenario, Option<PathBuf>), String> {
    match &cfg.scenario_dir {
        Some(dir) => {
            let path = dir.join(shipped_file_name(layout, task, n));
            Scenario::load(&path)
                .map(|s| (s, Some(path)))
                .map_err(|e| e.to_string())
        }
        None => Ok((generate(layout, task, n), None)),
    }
}

/// Runs every configuration of the grid; episodes run in parallel and are
/// aggregated afterwards.
pub fn run_grid(cfg: &GridConfig) -> GridReport {
    let mut combos = Vec::new();
    for &task in &cfg.tasks {
        for &layout in &cfg.layouts {
            for &n in &cfg.object_counts {
                combos.push((layout, task, n));
            }
        }
    }
    let episodes: Vec<GridEpisode> = combos
        .par_iter()
        .map(|&(layout, task, n)| {
            let outcome = load(cfg, layout, task, n).and_then(|(scenario, path)| {
                let name = scenario.name.clone();
                let mut ep = EpisodeConfig::new(scenario);
                ep.scenario_path = path;
                ep.horizon = cfg.horizon;
                ep.policy = cfg.policy.clone();
                ep.no_mobile_robot = cfg.no_mobile_robot;
                ep.verbose = cfg.verbose;
                ep.log_path = cfg.output_dir.as_ref().map(|d| d.join(format!("{name}.jsonl")));
                run_episode(&ep).map_err(|e| e.to_string())
            });
            GridEpisode {
                layout,
                task,
                objects: n,
                outcome,
            }
        })
        .collect();
    let rows = cfg
        .tasks
        .iter()
        .map(|&task| {
            let of_task: Vec<&GridEpisode> = episodes.iter().filter(|e| e.task == task).collect();
            let errored = of_task.iter().filter(|e| e.outcome.is_err()).count();
            let metrics = aggregate(
                of_task
                    .iter()
                    .filter_map(|e| e.outcome.as_ref().ok())
                    .map(|r| &r.metrics),
                errored,
            );
            TaskRow { task, metrics }
        })
        .collect();
    GridReport {
        label: cfg.label.clone(),
        rows,
        episodes,
    }
}
