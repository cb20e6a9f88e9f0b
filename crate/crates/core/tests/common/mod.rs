#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use robocollab::comms::MessagePayload;
use robocollab::feedback::render_feedback;
use robocollab::harness::{GridConfig, GridReport, LogRecord};
use robocollab::memory::LATEST_TAG;
use robocollab::policy::{Ablations, PolicyConfig};
use robocollab::scenario::Scenario;
use robocollab::world::{Cell, GridMap, Support};
use robocollab::{Feedback, Pose2D, RobotId};

pub fn oracle_grid(ablations: Ablations, no_mobile_robot: bool) -> GridReport {
    robocollab::harness::run_grid(&GridConfig {
        policy: PolicyConfig::oracle().with_ablations(ablations),
        no_mobile_robot,
        ..GridConfig::default()
    })
}

/// Moves an object of a scenario into a task zone, keeping every cross
/// reference consistent.
pub fn place_in_zone(s: &mut Scenario, object: &str, zone: &str) {
    let z = s.zones.iter_mut().find(|z| z.id == zone).expect("zone");
    z.contents.push(object.to_string());
    let (table, center) = (z.furniture.clone(), Pose2D::at(z.center.x, z.center.y));
    for f in &mut s.furniture {
        f.surface_object_ids.retain(|o| o != object);
        f.contained_object_ids.retain(|o| o != object);
        if f.id == table {
            f.surface_object_ids.push(object.to_string());
        }
    }
    let o = s.objects.iter_mut().find(|o| o.id == object).expect("object");
    o.support = Support::OnFurniture(table);
    o.zone = Some(zone.to_string());
    o.pose = center;
}

// ---------------------------------------------------------------------------
// independent uniform-cost search over the 8-connected grid

/// `a + b*sqrt(2)` compared exactly for non-negative integers.
fn cmp_cost(a: (u64, u64), b: (u64, u64)) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    // compare (a0 - b0) with (b1 - a1) * sqrt(2)
    let x = a.0 as i128 - b.0 as i128;
    let y = b.1 as i128 - a.1 as i128;
    let sign = |v: i128| v.cmp(&0);
    match (sign(x), sign(y)) {
        (Equal, Equal) => Equal,
        (Less, s) | (Equal, s) if s != Less => Less,
        (Greater, s) | (Equal, s) if s != Greater => Greater,
        (Less, Less) => (2 * y * y).cmp(&(x * x)),
        (Greater, Greater) => (x * x).cmp(&(2 * y * y)),
        // remaining: x == 0 with y of the opposite sign handled above
        (_, _) => unreachable!(),
    }
}

/// Cheapest `(straight, diagonal)` step counts, or None when unreachable.
/// Diagonal moves need both side cells free.
pub fn ucs_cost(occupied: &[Vec<bool>], start: (usize, usize), goal: (usize, usize)) -> Option<(u64, u64)> {
    let h = occupied.len();
    let w = occupied[0].len();
    let free =
        |c: i64, r: i64| c >= 0 && r >= 0 && (c as usize) < w && (r as usize) < h && !occupied[r as usize][c as usize];
    let mut best: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    best.insert(start, (0, 0));
    loop {
        let cur = best
            .iter()
            .filter(|(c, _)| !done.contains(*c))
            .min_by(|a, b| cmp_cost(*a.1, *b.1).then(a.0.cmp(b.0)))
            .map(|(c, g)| (*c, *g));
        let (cell, g) = cur?;
        if cell == goal {
            return Some(g);
        }
        done.insert(cell);
        let (c, r) = (cell.0 as i64, cell.1 as i64);
        for dr in -1..=1i64 {
            for dc in -1..=1i64 {
                if (dr, dc) == (0, 0) || !free(c + dc, r + dr) {
                    continue;
                }
                let diag = dr != 0 && dc != 0;
                if diag && !(free(c + dc, r) && free(c, r + dr)) {
                    continue;
                }
                let next = ((c + dc) as usize, (r + dr) as usize);
                if done.contains(&next) {
                    continue;
                }
                let ng = if diag { (g.0, g.1 + 1) } else { (g.0 + 1, g.1) };
                let better = best.get(&next).is_none_or(|old| cmp_cost(ng, *old).is_lt());
                if better {
                    best.insert(next, ng);
                }
            }
        }
    }
}

pub struct RandomGrid {
    pub map: GridMap,
    pub occupied: Vec<Vec<bool>>,
    pub start: (usize, usize),
    pub goal: (usize, usize),
}

/// A 20 x 20 grid at 25 % obstacle density with free endpoints.
pub fn random_grid(seed: u64) -> RandomGrid {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = 20usize;
    let mut map = GridMap::new(n as u32, n as u32, 1.0).unwrap();
    let mut occupied = vec![vec![false; n]; n];
    for (r, row) in occupied.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            if rng.gen_bool(0.25) {
                *cell = true;
                map.set_occupied(Cell::new(c as u32, r as u32), true);
            }
        }
    }
    let free_cell = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let (c, r) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if !occupied[r][c] {
            return (c, r);
        }
    };
    let start = free_cell(&mut rng);
    let goal = free_cell(&mut rng);
    RandomGrid {
        map,
        occupied,
        start,
        goal,
    }
}

// ---------------------------------------------------------------------------
// log checks

/// Violations of the rule that an object hidden in closed furniture enters a
/// robot's scene graph only after that furniture was opened or after a
/// location report about it reached the robot.
pub fn clairvoyance_violations(log: &[LogRecord]) -> Vec<String> {
    let Some(LogRecord::Header(h)) = log.first() else {
        return vec!["missing header".into()];
    };
    let hidden: BTreeMap<String, String> = h
        .scenario
        .objects
        .iter()
        .filter_map(|o| match &o.support {
            Support::InFurniture(f) if !h.scenario.furniture.iter().any(|x| x.id == *f && x.is_open) => {
                Some((o.id.clone(), f.clone()))
            }
            _ => None,
        })
        .collect();
    let mut opened: BTreeSet<String> = BTreeSet::new();
    let mut reported: BTreeSet<(RobotId, String)> = BTreeSet::new();
    let mut out = Vec::new();
    for r in log {
        match r {
            LogRecord::Feedback {
                feedback: Feedback::OpenSuccess { furniture, .. },
                ..
            } => {
                opened.insert(furniture.clone());
            }
            LogRecord::Delivery { robot, message, .. } => {
                if let MessagePayload::LocationReport { object_name, .. } = &message.payload {
                    reported.insert((*robot, object_name.clone()));
                }
            }
            LogRecord::Decision {
                step,
                robot,
                known_objects,
                ..
            } => {
                for o in known_objects {
                    if let Some(f) = hidden.get(o) {
                        if !opened.contains(f) && !reported.contains(&(*robot, o.clone())) {
                            out.push(format!("{robot} knew {o} in closed {f} at step {step}"));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Rendered feedback texts that leak into any prompt of the episode.
pub fn feedback_leaks(log: &[LogRecord]) -> Vec<String> {
    let texts: BTreeSet<String> = log
        .iter()
        .filter_map(|r| match r {
            LogRecord::Feedback { feedback, .. } => Some(render_feedback(feedback)),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for r in log {
        if let LogRecord::Decision {
            step, robot, prompt, ..
        } = r
        {
            for t in &texts {
                if prompt.contains(t.as_str()) {
                    out.push(format!("{robot} at step {step}: {t}"));
                }
            }
        }
    }
    out
}

/// Memory section of a prompt.
pub fn memory_section(prompt: &str) -> &str {
    let start = prompt
        .find("## Memory\n")
        .map(|i| i + "## Memory\n".len())
        .unwrap_or(prompt.len());
    let rest = &prompt[start..];
    let end = rest.find("\n## ").unwrap_or(rest.len());
    &rest[..end]
}

/// History entries of a prompt that lack the recency tag.
pub fn untagged_history_lines(log: &[LogRecord]) -> (usize, Vec<String>) {
    let mut tagged = 0;
    let mut bad = Vec::new();
    for r in log {
        if let LogRecord::Decision {
            step, robot, prompt, ..
        } = r
        {
            for line in memory_section(prompt).lines().filter(|l| l.starts_with("- ")) {
                if line.starts_with(&format!("- {LATEST_TAG}")) {
                    tagged += 1;
                } else {
                    bad.push(format!("{robot} at step {step}: {line}"));
                }
            }
        }
    }
    (tagged, bad)
}

/// Records attributed to a robot.
pub fn records_of(log: &[LogRecord], id: RobotId) -> usize {
    log.iter()
        .filter(|r| match r {
            LogRecord::Delivery { robot, message, .. } => *robot == id || message.sender == id,
            LogRecord::Decision { robot, .. } | LogRecord::Feedback { robot, .. } => *robot == id,
            LogRecord::Message { message, .. } => message.sender == id || message.recipient == id,
            _ => false,
        })
        .count()
}

// ---------------------------------------------------------------------------
// feedback taxonomy

/// `type` or `type/reason` of a feedback value, from its serialized form.
pub fn feedback_label(fb: &Feedback) -> String {
    let v = serde_json::to_value(fb).unwrap();
    let ty = v["type"].as_str().unwrap().to_string();
    match v.get("reason").and_then(|r| r["kind"].as_str()) {
        Some(kind) => format!("{ty}/{kind}"),
        None => ty,
    }
}

pub const TAXONOMY: [&str; 31] = [
    "navigation_success",
    "open_success",
    "move_success",
    "pick_success",
    "place_success",
    "navigation_failed/invalid_endpoint",
    "navigation_failed/invalid_target",
    "navigation_failed/pose_discrepancy",
    "navigation_failed/role_illegal",
    "open_failed/already_open_or_not_openable",
    "open_failed/out_of_range",
    "open_failed/role_illegal",
    "move_failed/invalid_endpoint",
    "move_failed/pose_discrepancy",
    "move_failed/role_illegal",
    "pick_failed/gripper_occupied",
    "pick_failed/unknown_object",
    "pick_failed/invalid_configuration",
    "pick_failed/too_far",
    "pick_failed/role_illegal",
    "place_failed/gripper_empty",
    "place_failed/object_mismatch",
    "place_failed/not_at_target",
    "place_failed/role_illegal",
    "task_status",
    "wait_ack",
    "message_sent",
    "message_undeliverable",
    // distinct endpoint reasons
    "navigation_failed/invalid_endpoint#start",
    "navigation_failed/invalid_endpoint#goal",
    "pick_failed/too_far#offset",
];

pub struct TaxonomyCase {
    pub name: &'static str,
    pub expected: &'static str,
    pub feedback: Feedback,
}

fn kitchen() -> (Scenario, robocollab::WorldState) {
    use robocollab::scenario::{generate, Layout};
    use robocollab::tasks::TaskKind;
    let s = generate(Layout::Kitchen, TaskKind::PackObjects, 4);
    let w = s.build_world().unwrap();
    (s, w)
}

fn navigate(f: &str, index: usize) -> robocollab::Action {
    robocollab::Action::Navigate {
        furniture: f.into(),
        index,
    }
}

fn pick(o: &str) -> robocollab::Action {
    robocollab::Action::Pick { object: o.into() }
}

fn place(o: &str, d: &str) -> robocollab::Action {
    robocollab::Action::Place {
        object: o.into(),
        destination: d.into(),
    }
}

fn open(f: &str) -> robocollab::Action {
    robocollab::Action::Open { furniture: f.into() }
}

fn mv(dx: f64, dy: f64) -> robocollab::Action {
    robocollab::Action::Move { dx, dy }
}

fn set_base(w: &mut robocollab::WorldState, id: RobotId, x: f64, y: f64) {
    w.robots.get_mut(&id).unwrap().base_pose = Pose2D::at(x, y);
}

/// Walls in the cell under a pose with a ring of obstacles two cells out.
fn enclose(w: &mut robocollab::WorldState, x: f64, y: f64) {
    let c = w.grid.world_to_cell(x, y).unwrap();
    for dr in -2i64..=2 {
        for dc in -2i64..=2 {
            if dr.abs() == 2 || dc.abs() == 2 {
                let cell = Cell::new((c.col as i64 + dc) as u32, (c.row as i64 + dr) as u32);
                w.grid.set_occupied(cell, true);
            }
        }
    }
}

/// One constructed world state per feedback outcome on the kitchen layout
/// (island at x 2.0..2.8, y 1.0..1.5; bob at 0.85, 2.9; alice at 3.5, 3.5).
pub fn taxonomy_cases() -> Vec<TaxonomyCase> {
    use robocollab::feedback::task_status;
    use RobotId::*;
    let mut out = Vec::new();
    let mut case = |name, expected, feedback| {
        out.push(TaxonomyCase {
            name,
            expected,
            feedback,
        })
    };

    let (_, mut w) = kitchen();
    case(
        "alice reaches the counter",
        "navigation_success",
        w.execute(Alice, &navigate("counter", 0)),
    );

    let (_, mut w) = kitchen();
    set_base(&mut w, Alice, 5.95, 5.3);
    case(
        "alice opens the fridge beside it",
        "open_success",
        w.execute(Alice, &open("fridge")),
    );

    let (_, mut w) = kitchen();
    case("alice shifts her base", "move_success", w.execute(Alice, &mv(0.2, 0.0)));

    let (_, mut w) = kitchen();
    case("bob picks the bottle", "pick_success", w.execute(Bob, &pick("bottle")));
    case(
        "bob puts it in the tray",
        "place_success",
        w.execute(Bob, &place("bottle", "tray")),
    );

    let (_, mut w) = kitchen();
    set_base(&mut w, Alice, 2.3, 1.2);
    case(
        "alice starts inside the island",
        "navigation_failed/invalid_endpoint#start",
        w.execute(Alice, &navigate("counter", 0)),
    );

    let (_, mut w) = kitchen();
    w.furniture.get_mut("counter").unwrap().nav_targets[0] = Pose2D::at(2.3, 1.2);
    case(
        "counter pose lies inside the island",
        "navigation_failed/invalid_endpoint#goal",
        w.execute(Alice, &navigate("counter", 0)),
    );

    let (_, mut w) = kitchen();
    case(
        "no such furniture",
        "navigation_failed/invalid_target",
        w.execute(Alice, &navigate("sofa", 0)),
    );
    case(
        "no such pose index",
        "navigation_failed/invalid_target",
        w.execute(Alice, &navigate("counter", 7)),
    );

    let (_, mut w) = kitchen();
    enclose(&mut w, 3.3, 5.2);
    case(
        "counter pose walled in",
        "navigation_failed/pose_discrepancy",
        w.execute(Alice, &navigate("counter", 0)),
    );
    case(
        "walled-in move",
        "move_failed/pose_discrepancy",
        w.execute(Alice, &mv(-0.2, 1.7)),
    );

    let (_, mut w) = kitchen();
    case(
        "bob cannot drive",
        "navigation_failed/role_illegal",
        w.execute(Bob, &navigate("counter", 0)),
    );
    case(
        "counter has no door",
        "open_failed/already_open_or_not_openable",
        w.execute(Alice, &open("counter")),
    );
    case(
        "fridge is across the room",
        "open_failed/out_of_range",
        w.execute(Alice, &open("fridge")),
    );
    case(
        "david has no arm to open",
        "open_failed/role_illegal",
        w.execute(David, &open("fridge")),
    );
    case(
        "move off the map",
        "move_failed/invalid_endpoint",
        w.execute(Alice, &mv(-10.0, 0.0)),
    );
    case(
        "bob cannot move",
        "move_failed/role_illegal",
        w.execute(Bob, &mv(0.1, 0.0)),
    );
    case(
        "no such object",
        "pick_failed/unknown_object",
        w.execute(Alice, &pick("ghost")),
    );
    case(
        "mug is behind a closed door",
        "pick_failed/invalid_configuration",
        w.execute(Alice, &pick("mug")),
    );
    case(
        "phone is out of alice's reach",
        "pick_failed/too_far#offset",
        w.execute(Alice, &pick("phone")),
    );
    case(
        "soap is out of bob's reach",
        "pick_failed/too_far",
        w.execute(Bob, &pick("soap")),
    );
    case(
        "david cannot pick",
        "pick_failed/role_illegal",
        w.execute(David, &pick("bottle")),
    );
    case(
        "bob holds nothing",
        "place_failed/gripper_empty",
        w.execute(Bob, &place("bottle", "tray")),
    );
    case(
        "david cannot place",
        "place_failed/role_illegal",
        w.execute(David, &place("bottle", "tray")),
    );
    case("wait", "wait_ack", w.execute(Alice, &robocollab::Action::Wait));
    let send = |to| robocollab::Action::SendMessage {
        recipient: to,
        payload: robocollab::MessagePayload::FreeText { text: "hi".into() },
    };
    case("alice messages bob", "message_sent", w.execute(Alice, &send(Bob)));
    case(
        "alice messages herself",
        "message_undeliverable",
        w.execute(Alice, &send(Alice)),
    );
    let (s, _) = kitchen();
    case("status report", "task_status", task_status(&w, &s.task));

    let (_, mut w) = kitchen();
    w.execute(Bob, &pick("bottle"));
    case(
        "bob already holds the bottle",
        "pick_failed/gripper_occupied",
        w.execute(Bob, &pick("soap")),
    );
    case(
        "bob holds the bottle, not the soap",
        "place_failed/object_mismatch",
        w.execute(Bob, &place("soap", "tray")),
    );
    case(
        "fridge is no destination for bob",
        "place_failed/not_at_target",
        w.execute(Bob, &place("bottle", "fridge")),
    );

    let (_, mut w) = kitchen();
    w.robots.remove(&David);
    case("david absent", "message_undeliverable", w.execute(Alice, &send(David)));
    out
}

/// Label of a case including the refinements listed in [`TAXONOMY`].
pub fn refined_label(fb: &Feedback) -> String {
    use robocollab::feedback::{NavFailure, PickFailure};
    use robocollab::world::Endpoint;
    let base = feedback_label(fb);
    match fb {
        Feedback::NavigationFailed {
            reason: NavFailure::InvalidEndpoint { endpoint },
            ..
        } => match endpoint {
            Endpoint::Start => format!("{base}#start"),
            Endpoint::Goal => format!("{base}#goal"),
        },
        Feedback::PickFailed {
            reason:
                PickFailure::TooFar {
                    dx: Some(_),
                    dy: Some(_),
                    ..
                },
            ..
        } => format!("{base}#offset"),
        _ => base,
    }
}

/// Taxonomy entries never produced by [`taxonomy_cases`], plus cases whose
/// outcome differs from the expected one.
pub fn taxonomy_gaps() -> (Vec<String>, Vec<String>) {
    let cases = taxonomy_cases();
    let mut mismatched = Vec::new();
    let mut seen = BTreeSet::new();
    for c in &cases {
        let got = refined_label(&c.feedback);
        if got != c.expected {
            mismatched.push(format!("{}: expected {}, got {got}", c.name, c.expected));
        }
        seen.insert(feedback_label(&c.feedback));
        seen.insert(got);
    }
    let missing = TAXONOMY
        .iter()
        .filter(|t| !seen.contains(**t))
        .map(|t| t.to_string())
        .collect();
    (missing, mismatched)
}

// ---------------------------------------------------------------------------
// injected results

use robocollab::harness::EpisodeMetrics;
use robocollab::tasks::TaskKind;

fn m(success: bool, ps: f64, ts: u32, actions: u32) -> EpisodeMetrics {
    EpisodeMetrics {
        success,
        partial_success: ps,
        temporal_steps: ts,
        action_steps: actions,
        decisions: 0,
        parse_failures: 0,
        first_try_parses: 0,
        backend_errors: 0,
    }
}

/// Twelve hand-picked results, four per task, with their means worked out
/// by hand as `(succ, ps, ts, as)`.
pub type Means = (f64, f64, f64, f64);

pub fn injected() -> Vec<(TaskKind, Vec<EpisodeMetrics>, Means)> {
    vec![
        (
            TaskKind::PackObjects,
            vec![
                m(true, 1.0, 20, 30),
                m(false, 0.75, 50, 41),
                m(true, 1.0, 12, 15),
                m(false, 0.0, 50, 0),
            ],
            (0.5, 0.6875, 33.0, 21.5),
        ),
        (
            TaskKind::SortSolids,
            vec![
                m(true, 1.0, 18, 22),
                m(true, 1.0, 26, 35),
                m(false, 0.5, 50, 40),
                m(true, 1.0, 30, 31),
            ],
            (0.75, 0.875, 31.0, 32.0),
        ),
        (
            TaskKind::MakeSandwich,
            vec![
                m(false, 0.25, 50, 44),
                m(false, 0.5, 50, 48),
                m(true, 1.0, 35, 40),
                m(false, 0.0, 50, 0),
            ],
            (0.25, 0.4375, 46.25, 33.0),
        ),
    ]
}

/// Writes one log per injected result: a real one-step episode whose result
/// record is replaced. Returns the paths.
pub fn write_injected_logs(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    use robocollab::scenario::{generate, Layout};
    let mut paths = Vec::new();
    for (task, list, _) in injected() {
        for (i, metrics) in list.into_iter().enumerate() {
            let mut cfg = robocollab::EpisodeConfig::new(generate(Layout::ALL[i % 3], task, 3 + i));
            cfg.horizon = 1;
            cfg.policy = PolicyConfig::always_wait();
            let mut log = robocollab::run_episode(&cfg).unwrap().log;
            *log.last_mut().unwrap() = LogRecord::Result(metrics);
            let path = dir.join(format!("{}_{i}.jsonl", task.as_str()));
            robocollab::harness::write_log(&path, &log).unwrap();
            paths.push(path);
        }
    }
    paths
}
