use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use robocollab::harness::{
    aggregate, format_table, metrics_from_log, replay, run_grid, GridConfig, TaskRow, DEFAULT_HORIZON,
};
use robocollab::policy::{Ablations, Backend, ChatConfig, PolicyConfig, API_KEY_ENV};
use robocollab::scenario::{generate, shipped_file_name, shipped_grid, Layout};
use robocollab::tasks::TaskKind;
use robocollab::{run_episode, EpisodeConfig, Scenario};

#[derive(Parser)]
#[command(
    name = "robocollab",
    version,
    about = "Heterogeneous robot team simulator and planning harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode.
    Run(RunArgs),
    /// Run the layout x task x object-count grid and print the metrics table.
    Grid(GridArgs),
    /// Re-execute a log and check it for drift.
    Replay { log: PathBuf },
    /// Lint scenario files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Aggregate metrics from episode logs (files or directories).
    Report {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Write the shipped scenario files.
    Generate {
        #[arg(long, default_value = "scenarios")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Oracle,
    Chat,
    Wait,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value = "oracle")]
    backend: BackendKind,
    /// Chat-completions URL.
    #[arg(long, default_value = "https://api.openai.com/v1/chat/completions")]
    endpoint: String,
    #[arg(long, default_value = "gpt-4o")]
    model: String,
    #[arg(long, default_value_t = 0.5)]
    temperature: f64,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    #[arg(long, default_value_t = 2)]
    max_retries: u32,
    #[arg(long)]
    no_feedback: bool,
    #[arg(long)]
    no_history: bool,
    /// Drop david from the team.
    #[arg(long)]
    no_mobile_robot: bool,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: u32,
    /// Keep full chat transcripts in the log.
    #[arg(long)]
    verbose: bool,
}

impl PolicyArgs {
    fn config(&self) -> Result<PolicyConfig> {
        let backend = match self.backend {
            BackendKind::Oracle => Backend::ScriptedOracle,
            BackendKind::Wait => Backend::AlwaysWait,
            BackendKind::Chat => {
                let mut c = ChatConfig::new(&self.endpoint, &self.model);
                c.temperature = self.temperature;
                c.timeout_secs = self.timeout;
                c.max_retries = self.max_retries;
                c.verbose = self.verbose;
                c.check().map_err(anyhow::Error::msg)?;
                if std::env::var_os(API_KEY_ENV).is_none() {
                    eprintln!("warning: {API_KEY_ENV} is not set; requests carry no credentials");
                }
                Backend::ChatModel(c)
            }
        };
        Ok(PolicyConfig {
            backend,
            ablations: Ablations {
                no_feedback: self.no_feedback,
                no_history: self.no_history,
            },
        })
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file; alternatively pick a shipped configuration.
    #[arg(long, conflicts_with_all = ["layout", "task", "objects"])]
    scenario: Option<PathBuf>,
    #[arg(long)]
    layout: Option<Layout>,
    #[arg(long)]
    task: Option<TaskKind>,
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Episode log destination.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Directory with shipped scenario files; generated in memory if unset.
    #[arg(long)]
    scenario_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<TaskKind>,
    #[arg(long, value_delimiter = ',')]
    layouts: Vec<Layout>,
    #[arg(long, value_delimiter = ',')]
    objects: Vec<usize>,
    /// Directory for per-episode logs.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match (&args.scenario, args.layout, args.task) {
        (Some(path), _, _) => EpisodeConfig::load(path)?,
        (None, Some(layout), Some(task)) => EpisodeConfig::new(generate(layout, task, args.objects.unwrap_or(3))),
        _ => bail!("give --scenario, or --layout and --task"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.horizon = args.policy.horizon;
    cfg.policy = args.policy.config()?;
    cfg.no_mobile_robot = args.policy.no_mobile_robot;
    cfg.verbose = args.policy.verbose;
    cfg.log_path = args.log;
    let result = run_episode(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

fn grid(args: GridArgs) -> Result<()> {
    let mut cfg = GridConfig {
        scenario_dir: args.scenario_dir,
        horizon: args.policy.horizon,
        policy: args.policy.config()?,
        no_mobile_robot: args.policy.no_mobile_robot,
        verbose: args.policy.verbose,
        output_dir: args.out,
        ..GridConfig::default()
    };
    if !args.tasks.is_empty() {
        cfg.tasks = args.tasks;
    }
    if !args.layouts.is_empty() {
        cfg.layouts = args.layouts;
    }
    if !args.objects.is_empty() {
        cfg.object_counts = args.objects;
    }
    cfg.label = match &cfg.policy.backend {
        Backend::ChatModel(c) => c.model_name.clone(),
        Backend::ScriptedOracle => "oracle".into(),
        Backend::AlwaysWait => "always_wait".into(),
    };
    let report = run_grid(&cfg);
    print!("{}", report.table());
    Ok(())
}

fn collect_logs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn report(paths: &[PathBuf]) -> Result<()> {
    let mut by_task: Vec<(TaskKind, Vec<_>)> = TaskKind::ALL.iter().map(|t| (*t, Vec::new())).collect();
    for log in collect_logs(paths)? {
        let (task, _, metrics) = metrics_from_log(&log)?;
        if let Some((_, list)) = by_task.iter_mut().find(|(t, _)| *t == task) {
            list.push(metrics);
        }
    }
    let rows: Vec<TaskRow> = by_task
        .iter()
        .filter(|(_, list)| !list.is_empty())
        .map(|(task, list)| TaskRow {
            task: *task,
            metrics: aggregate(list, 0),
        })
        .collect();
    print!("{}", format_table(&[("logs".to_string(), rows)]));
    Ok(())
}

fn validate(paths: &[PathBuf]) -> Result<bool> {
    let mut clean = true;
    for p in paths {
        match Scenario::load(p) {
            Ok(s) => {
                let issues = s.validate();
                if issues.is_empty() {
                    println!("{}: ok", p.display());
                } else {
                    clean = false;
                    println!("{}: {} issue(s)", p.display(), issues.len());
                    for i in issues {
                        println!("  {i}");
                    }
                }
            }
            Err(e) => {
                clean = false;
                println!("{}: {e}", p.display());
            }
        }
    }
    Ok(clean)
}

fn write_shipped(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    for (layout, task, n) in shipped_grid() {
        let path = out.join(shipped_file_name(layout, task, n));
        generate(layout, task, n).save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Grid(args) => grid(args),
        Command::Replay { log } => replay(&log).map_err(anyhow::Error::from).and_then(|r| {
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(())
        }),
        Command::Validate { paths } => match validate(&paths) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Report { paths } => report(&paths),
        Command::Generate { out } => write_shipped(&out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
