//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use robocollab::feedback::{render_feedback, PickFailure};
use robocollab::harness::{
    aggregate, metrics_from_log, replay, replay_records, write_log, GridReport, LogRecord, ReplayError,
};
use robocollab::policy::{Ablations, ChatConfig, PolicyConfig, API_KEY_ENV};
use robocollab::scenario::{generate, Layout};
use robocollab::tasks::TaskKind;
use robocollab::world::{plan_cells, Cell, PathError};
use robocollab::{evaluate, run_episode, EpisodeConfig, Feedback, RobotId};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Baseline {
    report: GridReport,
    elapsed: Duration,
}

fn mean_ts(report: &GridReport, task: TaskKind) -> f64 {
    report
        .rows
        .iter()
        .find(|r| r.task == task)
        .map(|r| r.metrics.mean_ts)
        .unwrap_or(f64::NAN)
}

fn oracle_completeness(base: &Baseline) -> Check {
    let r = &base.report;
    ensure(r.episodes.len() == 36, || format!("{} episodes", r.episodes.len()))?;
    for e in &r.episodes {
        let res = e
            .outcome
            .as_ref()
            .map_err(|err| format!("{:?}/{:?}/{}: {err}", e.layout, e.task, e.objects))?;
        let m = &res.metrics;
        ensure(m.success && m.partial_success == 1.0 && m.temporal_steps <= 50, || {
            format!(
                "{}: succ {} ps {} ts {}",
                res.scenario, m.success, m.partial_success, m.temporal_steps
            )
        })?;
    }
    ensure(base.elapsed < Duration::from_secs(60), || {
        format!("took {:?}", base.elapsed)
    })?;
    let max_ts = r.results().map(|x| x.metrics.temporal_steps).max().unwrap_or(0);
    Ok(format!(
        "36/36 succeed, max TS {max_ts}, mean TS pack {:.2} sort {:.2} sandwich {:.2}, {:.2}s",
        mean_ts(r, TaskKind::PackObjects),
        mean_ts(r, TaskKind::SortSolids),
        mean_ts(r, TaskKind::MakeSandwich),
        base.elapsed.as_secs_f64()
    ))
}

fn path_optimality() -> Check {
    let (mut solved, mut blocked) = (0, 0);
    for seed in 0..100 {
        let g = random_grid(seed);
        let s = Cell::new(g.start.0 as u32, g.start.1 as u32);
        let t = Cell::new(g.goal.0 as u32, g.goal.1 as u32);
        match (plan_cells(&g.map, s, t), ucs_cost(&g.occupied, g.start, g.goal)) {
            (Ok(p), Some(c)) if (p.cost.straight as u64, p.cost.diagonal as u64) == c => solved += 1,
            (Err(PathError::NoPath), None) => blocked += 1,
            (got, want) => return Err(format!("seed {seed}: planner {got:?}, search {want:?}")),
        }
    }
    Ok(format!("100 grids: {solved} optimal, {blocked} agreed unsolvable"))
}

fn feedback_taxonomy() -> Check {
    let (missing, mismatched) = taxonomy_gaps();
    ensure(mismatched.is_empty(), || mismatched.join("; "))?;
    ensure(missing.is_empty(), || format!("never produced: {}", missing.join(", ")))?;
    let cases = taxonomy_cases();
    for c in &cases {
        ensure(!render_feedback(&c.feedback).trim().is_empty(), || {
            format!("{}: empty rendering", c.name)
        })?;
    }
    let too_far = cases
        .iter()
        .find_map(|c| match &c.feedback {
            Feedback::PickFailed {
                reason:
                    PickFailure::TooFar {
                        distance,
                        dx: Some(dx),
                        dy: Some(dy),
                    },
                ..
            } => Some((render_feedback(&c.feedback), *distance, *dx, *dy)),
            _ => None,
        })
        .ok_or("no mobile TooFar case")?;
    let (text, d, dx, dy) = too_far;
    for n in [format!("{d:.2}"), format!("{dx:.2}"), format!("{dy:.2}")] {
        ensure(text.contains(&n), || format!("TooFar rendering lacks {n}: {text}"))?;
    }
    Ok(format!(
        "{} constructed states cover {} outcomes",
        cases.len(),
        TAXONOMY.len()
    ))
}

fn metric_arithmetic() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let paths = write_injected_logs(dir.path());
    for (task, _, want) in injected() {
        let of_task: Vec<_> = paths
            .iter()
            .map(|p| metrics_from_log(p).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|(t, _, _)| *t == task)
            .map(|(_, _, m)| m)
            .collect();
        let a = aggregate(&of_task, 0);
        let got = (a.succ_rate, a.mean_ps, a.mean_ts, a.mean_as);
        ensure(got == want, || format!("{task:?}: got {got:?}, want {want:?}"))?;
    }

    let mut s = generate(Layout::Kitchen, TaskKind::PackObjects, 4);
    for o in ["bottle", "phone", "soap"] {
        place_in_zone(&mut s, o, "tray");
    }
    let world = s.build_world().map_err(|e| e.to_string())?;
    let ps = evaluate(&world, &s.task).partial_success();
    ensure(ps == 0.75, || format!("3 of 4 placed gives PS {ps}"))?;

    let mut cfg = EpisodeConfig::new(generate(Layout::Kitchen, TaskKind::PackObjects, 3));
    cfg.policy = PolicyConfig::always_wait();
    let m = run_episode(&cfg).map_err(|e| e.to_string())?.metrics;
    ensure(m.temporal_steps == 50 && m.action_steps == 0 && !m.success, || {
        format!("all-Wait gives TS {} AS {}", m.temporal_steps, m.action_steps)
    })?;
    Ok("12 injected logs, 3-of-4 PS 0.75, all-Wait TS 50 AS 0".into())
}

fn determinism(base: &Baseline) -> Check {
    let again = oracle_grid(Ablations::default(), false);
    let mut replayed = 0;
    for (a, b) in base.report.results().zip(again.results()) {
        ensure(a.log_text() == b.log_text(), || {
            format!("{}: logs differ between runs", a.scenario)
        })?;
        let r = replay_records(&a.log).map_err(|e| format!("{}: {e}", a.scenario))?;
        ensure(r.log_text() == a.log_text(), || {
            format!("{}: replay log differs", a.scenario)
        })?;
        replayed += 1;

        // mutate the middle feedback record
        let fb: Vec<usize> = a
            .log
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, LogRecord::Feedback { feedback, .. } if *feedback != Feedback::WaitAck))
            .map(|(i, _)| i)
            .collect();
        let idx = fb[fb.len() / 2];
        let mut bad = a.log.clone();
        let step = bad[idx].step().unwrap_or(0);
        if let LogRecord::Feedback { feedback, .. } = &mut bad[idx] {
            *feedback = Feedback::WaitAck;
        }
        match replay_records(&bad) {
            Err(ReplayError::DriftDetected { step: s, .. }) if s == step => {}
            other => return Err(format!("{}: mutation at step {step} gave {other:?}", a.scenario)),
        }
    }
    ensure(replayed == 36, || format!("{replayed} logs replayed"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("episode.jsonl");
    let first = base.report.results().next().ok_or("no episodes")?;
    write_log(&path, &first.log).map_err(|e| e.to_string())?;
    replay(&path).map_err(|e| e.to_string())?;
    Ok("36 logs identical across runs, replay clean, 36/36 mutations detected".into())
}

fn no_clairvoyance(reports: &[&GridReport]) -> Check {
    let mut logs = 0;
    for report in reports {
        for r in report.results() {
            let v = clairvoyance_violations(&r.log);
            ensure(v.is_empty(), || format!("{}: {}", r.scenario, v.join("; ")))?;
            logs += 1;
        }
    }
    Ok(format!("{logs} episode logs checked"))
}

fn ablations(base: &Baseline, no_mobile: &GridReport) -> Check {
    let nf = oracle_grid(
        Ablations {
            no_feedback: true,
            no_history: false,
        },
        false,
    );
    for r in nf.results() {
        let leaks = feedback_leaks(&r.log);
        ensure(leaks.is_empty(), || format!("{}: {}", r.scenario, leaks[0]))?;
    }
    ensure(nf.results().count() == 36, || "no_feedback episodes errored".into())?;

    let nh = oracle_grid(
        Ablations {
            no_feedback: false,
            no_history: true,
        },
        false,
    );
    let mut tagged = 0;
    for r in nh.results() {
        let (t, bad) = untagged_history_lines(&r.log);
        ensure(bad.is_empty(), || format!("{}: {}", r.scenario, bad[0]))?;
        tagged += t;
    }
    ensure(tagged > 0, || "no tagged history lines at all".into())?;

    ensure(no_mobile.episodes.len() == 36, || "grid incomplete".into())?;
    for e in &no_mobile.episodes {
        let r = e.outcome.as_ref().map_err(|err| err.clone())?;
        ensure(r.metrics.success, || format!("{} fails without david", r.scenario))?;
        ensure(records_of(&r.log, RobotId::David) == 0, || {
            format!("{}: david acted", r.scenario)
        })?;
    }
    let slower: Vec<String> = TaskKind::ALL
        .iter()
        .filter(|t| mean_ts(no_mobile, **t) >= mean_ts(&base.report, **t))
        .map(|t| {
            format!(
                "{} {:.2} >= {:.2}",
                t.as_str(),
                mean_ts(no_mobile, *t),
                mean_ts(&base.report, *t)
            )
        })
        .collect();
    ensure(!slower.is_empty(), || {
        "mean TS without david is lower on every task".into()
    })?;
    Ok(format!(
        "no leaks in {} no_feedback episodes, {tagged} [LATEST] lines, two-robot team 36/36 ({})",
        nf.results().count(),
        slower.join(", ")
    ))
}

fn live_smoke() -> Outcome {
    let Ok(endpoint) = std::env::var("ROBOCOLLAB_LIVE_ENDPOINT") else {
        return Outcome::Skip("ROBOCOLLAB_LIVE_ENDPOINT not set".into());
    };
    if std::env::var_os(API_KEY_ENV).is_none() {
        return Outcome::Skip(format!("{API_KEY_ENV} not set"));
    }
    let model = std::env::var("ROBOCOLLAB_LIVE_MODEL").unwrap_or_else(|_| "gpt-4o".into());
    let mut cfg = EpisodeConfig::new(generate(Layout::Kitchen, TaskKind::PackObjects, 3));
    cfg.policy = PolicyConfig {
        backend: robocollab::policy::Backend::ChatModel(ChatConfig::new(&endpoint, &model)),
        ablations: Ablations::default(),
    };
    match run_episode(&cfg) {
        Err(e) => Outcome::Fail(format!("episode aborted: {e}")),
        Ok(r) => {
            let m = r.metrics;
            let rate = m.first_try_parses as f64 / m.decisions.max(1) as f64;
            let detail = format!(
                "{model}: {} decisions, {:.0}% first-try parses, {} backend errors, succ {}",
                m.decisions,
                rate * 100.0,
                m.backend_errors,
                m.success
            );
            if m.decisions > 0 && rate >= 0.8 {
                Outcome::Pass(detail)
            } else {
                Outcome::Fail(detail)
            }
        }
    }
}

fn guarded(f: impl FnOnce() -> Check) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(d)) => Outcome::Pass(d),
        Ok(Err(d)) => Outcome::Fail(d),
        Err(p) => Outcome::Fail(
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()),
        ),
    }
}

fn main() {
    let start = Instant::now();
    let report = oracle_grid(Ablations::default(), false);
    let base = Baseline {
        report,
        elapsed: start.elapsed(),
    };
    let no_mobile = oracle_grid(Ablations::default(), true);

    let mut results: BTreeMap<usize, (&str, Outcome)> = BTreeMap::new();
    results.insert(1, ("oracle completeness", guarded(|| oracle_completeness(&base))));
    results.insert(2, ("path-planning optimality", guarded(path_optimality)));
    results.insert(3, ("feedback taxonomy coverage", guarded(feedback_taxonomy)));
    results.insert(4, ("metric arithmetic", guarded(metric_arithmetic)));
    results.insert(5, ("determinism and replay", guarded(|| determinism(&base))));
    results.insert(
        6,
        (
            "no clairvoyance",
            guarded(|| no_clairvoyance(&[&base.report, &no_mobile])),
        ),
    );
    results.insert(7, ("ablation switches", guarded(|| ablations(&base, &no_mobile))));
    results.insert(8, ("live-backend smoke", live_smoke()));

    let mut failed = 0;
    for (name, outcome) in results.values() {
        match outcome {
            Outcome::Pass(d) => println!("PASS  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
        }
    }
    println!("acceptance: {} criteria, {failed} failed", results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
