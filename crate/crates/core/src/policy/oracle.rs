//! Deterministic scripted team policy.
//!
//! The oracle knows the task but not where hidden objects are: it only reads
//! its own observation. Roles:
//!
//! * bob asks alice to find unknown objects and to fetch known out-of-reach
//!   ones, and otherwise picks and places whatever task object is in reach;
//! * alice delegates surface exploration to david, opens containers, and
//!   carries requested objects to the work table next to bob;
//! * david searches surfaces once activated and reports task objects.

use std::collections::{BTreeMap, BTreeSet};

use super::{Observation, Policy, PolicyDecision, PromptBundle};
use crate::comms::MessagePayload;
use crate::feedback::{Feedback, PickFailure};
use crate::scenegraph::{NodeKind, Relation, SceneNode};
use crate::tasks::TaskSpec;
use crate::world::{check_reach, plan_path, Action, GridMap, Pose2D, RobotId};

/// Distance under which the base counts as standing on a nav target.
const AT_TARGET: f64 = 0.05;

#[derive(Debug, Clone, Default)]
pub struct OraclePolicy {
    id: Option<RobotId>,
    // bob
    explore_sent: BTreeSet<String>,
    transport_sent: BTreeSet<String>,
    // alice
    wanted: Vec<String>,
    delegate_pending: bool,
    delegated: bool,
    delivered: BTreeSet<String>,
    last_place: Option<String>,
    approach: Option<String>,
    tried_navs: BTreeMap<String, BTreeSet<usize>>,
    // david
    assigned: Vec<String>,
    activated: bool,
    reported: BTreeSet<String>,
}

fn decision(thought: impl Into<String>, action: Action) -> PolicyDecision {
    PolicyDecision::scripted(thought, action)
}

fn nav_targets<'a>(obs: &'a Observation<'_>, furniture: &str) -> &'a [Pose2D] {
    match obs.graph.node(furniture).map(|n| &n.kind) {
        Some(NodeKind::Furniture { nav_targets, .. }) => nav_targets,
        _ => &[],
    }
}

fn at_any_target(obs: &Observation<'_>, furniture: &str) -> bool {
    nav_targets(obs, furniture)
        .iter()
        .any(|t| t.distance_to(&obs.robot.base_pose) < AT_TARGET)
}

fn is_openable(node: &SceneNode) -> bool {
    matches!(node.kind, NodeKind::Furniture { openable: true, .. })
}

/// Furniture carrying the task zones.
fn work_table(obs: &Observation<'_>) -> Option<String> {
    obs.task
        .zone_ids()
        .into_iter()
        .find_map(|z| match obs.graph.node(z).map(|n| &n.kind) {
            Some(NodeKind::Zone { furniture, .. }) => Some(furniture.clone()),
            _ => None,
        })
}

/// Known location of an object that is not held by anyone.
fn located<'a>(obs: &'a Observation<'_>, id: &str) -> Option<(&'a SceneNode, &'a str)> {
    let node = obs.graph.node(id).filter(|n| n.is_object())?;
    let furniture = obs.graph.relation(id)?.furniture()?;
    Some((node, furniture))
}

fn task_index(task: &TaskSpec, id: &str) -> usize {
    task.object_ids().iter().position(|o| *o == id).unwrap_or(usize::MAX)
}

fn is_done(obs: &Observation<'_>, id: &str) -> bool {
    let target = obs.task.target_zone(id);
    target.is_some()
        && obs.graph.node(id).and_then(|n| n.zone.as_deref()) == target
        && matches!(obs.graph.relation(id), Some(Relation::On(_)))
}

/// Largest fraction of `(dx, dy)`, in grid-resolution increments, that ends
/// on a free cell reachable from the current base.
fn clip_move(map: &GridMap, base: &Pose2D, dx: f64, dy: f64) -> Option<(f64, f64)> {
    let d = dx.hypot(dy);
    if !d.is_finite() || d < 1e-9 {
        return None;
    }
    let n = (d / map.resolution()).ceil().max(1.0) as u32;
    (1..=n).rev().find_map(|k| {
        let f = k as f64 / n as f64;
        let (mx, my) = (dx * f, dy * f);
        let dest = base.translated(mx, my);
        (map.is_free_at(dest.x, dest.y) && plan_path(map, base, &dest).is_ok()).then_some((mx, my))
    })
}

impl OraclePolicy {
    pub fn new(id: RobotId) -> Self {
        Self {
            id: Some(id),
            ..Self::default()
        }
    }

    fn bob(&mut self, obs: &Observation<'_>) -> PolicyDecision {
        let robot = obs.robot;
        let objects: Vec<&str> = obs.task.object_ids();
        if objects.iter().all(|o| is_done(obs, o)) {
            return decision("Every task object is in place.", Action::Wait);
        }
        if let Some(held) = robot.gripper.held() {
            if let Some(zone) = obs.task.target_zone(held) {
                return decision(
                    format!("I hold {held}; it belongs on {zone}."),
                    Action::Place {
                        object: held.to_string(),
                        destination: zone.to_string(),
                    },
                );
            }
        }
        let helper = obs.roster.contains(&RobotId::Alice);
        let unknown: Vec<String> = objects
            .iter()
            .filter(|o| obs.graph.node(o).is_none() && !self.explore_sent.contains(**o))
            .map(|o| o.to_string())
            .collect();
        if helper && !unknown.is_empty() {
            self.explore_sent.extend(unknown.iter().cloned());
            return decision(
                format!("I cannot see {}; alice should look for them.", unknown.join(", ")),
                Action::SendMessage {
                    recipient: RobotId::Alice,
                    payload: MessagePayload::ExploreRequest { object_names: unknown },
                },
            );
        }
        let remaining: Vec<&str> = objects.iter().copied().filter(|o| !is_done(obs, o)).collect();
        if helper {
            for o in &remaining {
                if self.explore_sent.contains(*o) || self.transport_sent.contains(*o) {
                    continue;
                }
                if let Some((node, furniture)) = located(obs, o) {
                    if !check_reach(robot, &node.pose).is_ok() {
                        self.transport_sent.insert(o.to_string());
                        return decision(
                            format!("{o} is out of my reach; alice can bring it."),
                            Action::SendMessage {
                                recipient: RobotId::Alice,
                                payload: MessagePayload::TransportRequest {
                                    object_name: o.to_string(),
                                    context_text: format!("it lies on {furniture}, beyond my reach"),
                                },
                            },
                        );
                    }
                }
            }
        }
        let candidates: &[&str] = match obs.task {
            TaskSpec::MakeSandwich { .. } => &remaining[..remaining.len().min(1)],
            _ => &remaining,
        };
        for o in candidates {
            if let Some((node, _)) = located(obs, o) {
                if check_reach(robot, &node.pose).is_ok() {
                    return decision(format!("{o} is within reach."), Action::Pick { object: o.to_string() });
                }
            }
        }
        decision("Waiting for objects to arrive.", Action::Wait)
    }

    fn alice(&mut self, obs: &Observation<'_>) -> PolicyDecision {
        let robot = obs.robot;
        let scout = obs.roster.contains(&RobotId::David);
        for m in obs.new_messages {
            match &m.payload {
                MessagePayload::ExploreRequest { object_names } => {
                    for n in object_names {
                        if !self.wanted.contains(n) {
                            self.wanted.push(n.clone());
                        }
                    }
                    if scout && !self.delegated {
                        self.delegate_pending = true;
                    }
                }
                MessagePayload::TransportRequest { object_name, .. } if !self.wanted.contains(object_name) => {
                    self.wanted.push(object_name.clone());
                }
                _ => {}
            }
        }
        if let Some(placed) = self.last_place.take() {
            if robot.gripper.held() != Some(placed.as_str()) {
                self.tried_navs.remove(&placed);
                self.delivered.insert(placed);
            }
        }
        let Some(table) = work_table(obs) else {
            return decision("There is no work table to deliver to.", Action::Wait);
        };

        if let Some(held) = robot.gripper.held() {
            let handoff = self.handoff_index(obs, &table);
            let here = nav_targets(obs, &table)
                .get(handoff)
                .is_some_and(|t| t.distance_to(&robot.base_pose) < AT_TARGET);
            if here {
                self.last_place = Some(held.to_string());
                return decision(
                    format!("I am next to bob; leaving {held} on {table}."),
                    Action::Place {
                        object: held.to_string(),
                        destination: table.clone(),
                    },
                );
            }
            return decision(
                format!("Carrying {held} to bob."),
                Action::Navigate {
                    furniture: table,
                    index: handoff,
                },
            );
        }

        if self.delegate_pending {
            self.delegate_pending = false;
            self.delegated = true;
            let surfaces: Vec<String> = obs
                .graph
                .nodes()
                .filter(|n| !is_openable(n) && matches!(n.kind, NodeKind::Furniture { .. }))
                .filter(|n| n.id != table && !n.contents_known)
                .map(|n| n.id.clone())
                .collect();
            if !surfaces.is_empty() {
                return decision(
                    "david can search the open surfaces while I check the containers.",
                    Action::SendMessage {
                        recipient: RobotId::David,
                        payload: MessagePayload::DelegatedExplore {
                            furniture_ids: surfaces,
                        },
                    },
                );
            }
        }

        let mut targets: Vec<String> = self
            .wanted
            .iter()
            .filter(|w| !self.delivered.contains(*w))
            .cloned()
            .collect();
        targets.sort_by_key(|t| task_index(obs.task, t));
        for t in &targets {
            if let Some((node, furniture)) = located(obs, t) {
                if let Some(d) = self.fetch(obs, t, node.pose, furniture) {
                    return d;
                }
            }
        }
        if targets.iter().any(|t| obs.graph.node(t).is_none()) {
            if let Some(d) = self.search(obs, &table, scout) {
                return d;
            }
        }
        decision("No pending requests.", Action::Wait)
    }

    /// Nav target of the work table closest to the task zones.
    fn handoff_index(&self, obs: &Observation<'_>, table: &str) -> usize {
        let zone = obs
            .task
            .zone_ids()
            .first()
            .and_then(|z| obs.graph.node(z))
            .map(|n| n.pose)
            .unwrap_or(Pose2D::at(0.0, 0.0));
        nav_targets(obs, table)
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance_to(&zone).total_cmp(&b.1.distance_to(&zone)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    fn fetch(&mut self, obs: &Observation<'_>, object: &str, pose: Pose2D, furniture: &str) -> Option<PolicyDecision> {
        let robot = obs.robot;
        let fnode = obs.graph.node(furniture)?;
        if self.approach.as_deref() != Some(object) {
            self.approach = None;
        }
        if is_openable(fnode) && fnode.open_state != Some(true) {
            if at_any_target(obs, furniture) {
                return Some(decision(
                    format!("{object} is inside {furniture}; opening it."),
                    Action::Open {
                        furniture: furniture.to_string(),
                    },
                ));
            }
            return self.approach_nav(obs, object, pose, furniture);
        }
        if check_reach(robot, &pose).is_ok() {
            self.approach = Some(object.to_string());
            return Some(decision(
                format!("{object} is within reach."),
                Action::Pick {
                    object: object.to_string(),
                },
            ));
        }
        if self.approach.as_deref() != Some(object) {
            return self.approach_nav(obs, object, pose, furniture);
        }
        let offset = match obs.latest_feedback() {
            Some(Feedback::PickFailed {
                object: o,
                reason:
                    PickFailure::TooFar {
                        dx: Some(dx),
                        dy: Some(dy),
                        ..
                    },
            }) if o == object => Some((*dx, *dy)),
            Some(_) => None,
            // feedback hidden: fall back to geometry
            None => Some((pose.x - robot.base_pose.x, pose.y - robot.base_pose.y)),
        };
        let Some((dx, dy)) = offset else {
            return Some(decision(
                format!("Checking whether {object} is within reach."),
                Action::Pick {
                    object: object.to_string(),
                },
            ));
        };
        match clip_move(obs.map, &robot.base_pose, dx, dy) {
            Some((mx, my)) => Some(decision(
                format!("{object} is too far; shifting the base towards it."),
                Action::Move { dx: mx, dy: my },
            )),
            None => self.approach_nav(obs, object, pose, furniture),
        }
    }

    /// Navigates to the closest untried nav target for this object.
    fn approach_nav(
        &mut self,
        obs: &Observation<'_>,
        object: &str,
        pose: Pose2D,
        furniture: &str,
    ) -> Option<PolicyDecision> {
        let tried = self.tried_navs.entry(object.to_string()).or_default();
        let best = nav_targets(obs, furniture)
            .iter()
            .enumerate()
            .filter(|(i, _)| !tried.contains(i))
            .min_by(|a, b| a.1.distance_to(&pose).total_cmp(&b.1.distance_to(&pose)))
            .map(|(i, _)| i)?;
        tried.insert(best);
        self.approach = Some(object.to_string());
        Some(decision(
            format!("Heading to {furniture} for {object}."),
            Action::Navigate {
                furniture: furniture.to_string(),
                index: best,
            },
        ))
    }

    /// Opens the nearest unexplored container, or visits surfaces when
    /// there is no scout.
    fn search(&mut self, obs: &Observation<'_>, table: &str, scout: bool) -> Option<PolicyDecision> {
        let base = obs.robot.base_pose;
        let candidate = obs
            .graph
            .nodes()
            .filter(|n| n.id != table && matches!(n.kind, NodeKind::Furniture { .. }))
            .filter(|n| {
                if is_openable(n) {
                    n.open_state != Some(true)
                } else {
                    !scout && !n.contents_known
                }
            })
            .filter_map(|n| {
                let t = nav_targets(obs, &n.id).first()?;
                Some((t.distance_to(&base), n))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, n)| n)?;
        if is_openable(candidate) && at_any_target(obs, &candidate.id) {
            return Some(decision(
                format!("Looking inside {}.", candidate.id),
                Action::Open {
                    furniture: candidate.id.clone(),
                },
            ));
        }
        Some(decision(
            format!("Searching {}.", candidate.id),
            Action::Navigate {
                furniture: candidate.id.clone(),
                index: 0,
            },
        ))
    }

    fn david(&mut self, obs: &Observation<'_>) -> PolicyDecision {
        for m in obs.new_messages {
            if let MessagePayload::DelegatedExplore { furniture_ids } = &m.payload {
                self.activated = true;
                for f in furniture_ids {
                    if !self.assigned.contains(f) {
                        self.assigned.push(f.clone());
                    }
                }
            }
        }
        let table = work_table(obs);
        if obs.roster.contains(&RobotId::Alice) {
            for o in obs.task.object_ids() {
                if self.reported.contains(o) {
                    continue;
                }
                let Some((node, furniture)) = located(obs, o) else {
                    continue;
                };
                if Some(furniture) == table.as_deref() {
                    continue;
                }
                self.reported.insert(o.to_string());
                return decision(
                    format!("Found {o} at {furniture}; telling alice."),
                    Action::SendMessage {
                        recipient: RobotId::Alice,
                        payload: MessagePayload::LocationReport {
                            object_name: o.to_string(),
                            pose: node.pose,
                            furniture_id: furniture.to_string(),
                        },
                    },
                );
            }
        }
        if !self.activated {
            return decision("No exploration assigned.", Action::Wait);
        }
        let unexplored = |id: &str| {
            obs.graph
                .node(id)
                .is_some_and(|n| !is_openable(n) && !n.contents_known && matches!(n.kind, NodeKind::Furniture { .. }))
        };
        let base = obs.robot.base_pose;
        let next = self.assigned.iter().find(|f| unexplored(f)).cloned().or_else(|| {
            obs.graph
                .nodes()
                .filter(|n| Some(n.id.as_str()) != table.as_deref() && unexplored(&n.id))
                .filter_map(|n| Some((nav_targets(obs, &n.id).first()?.distance_to(&base), n.id.clone())))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, id)| id)
        });
        match next {
            Some(f) => {
                let index = nav_targets(obs, &f)
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.distance_to(&base).total_cmp(&b.1.distance_to(&base)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                decision(format!("Exploring {f}."), Action::Navigate { furniture: f, index })
            }
            None => decision("Everything assigned has been explored.", Action::Wait),
        }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn decide(&mut self, obs: &Observation<'_>, _prompt: &PromptBundle) -> PolicyDecision {
        let id = *self.id.get_or_insert(obs.robot.id);
        match id {
            RobotId::Bob => self.bob(obs),
            RobotId::Alice => self.alice(obs),
            RobotId::David => self.david(obs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{put_in_zone, small_world};
    use crate::memory::{MemoryBuffer, MemoryEntry};
    use crate::policy::{serialize_observation, Ablations};
    use crate::scenegraph::SceneGraph;
    use crate::world::WorldState;

    fn step(
        policy: &mut OraclePolicy,
        world: &WorldState,
        graph: &SceneGraph,
        memory: &MemoryBuffer,
        task: &TaskSpec,
        messages: &[crate::comms::Message],
    ) -> Action {
        let robot = world.robot(policy.id.unwrap()).unwrap();
        let roster = world.roster();
        let obs = Observation {
            step: world.step,
            robot,
            roster: &roster,
            graph,
            map: &world.grid,
            new_messages: messages,
            memory,
            task,
            task_text: "",
            ablations: Ablations::default(),
        };
        let prompt = serialize_observation(&obs);
        policy.decide(&obs, &prompt).action
    }

    fn pack(ids: &[&str]) -> TaskSpec {
        TaskSpec::PackObjects {
            object_ids: ids.iter().map(|s| s.to_string()).collect(),
            tray_id: "tray".into(),
        }
    }

    #[test]
    fn bob_asks_for_hidden_apple_first() {
        let world = small_world();
        let mut graph = SceneGraph::from_world(RobotId::Bob, &world);
        let bob = world.robot(RobotId::Bob).unwrap().base_pose;
        graph.observe_surroundings(&world, &bob, 1.0, 0);
        let mut bob_policy = OraclePolicy::new(RobotId::Bob);
        let a = step(
            &mut bob_policy,
            &world,
            &graph,
            &MemoryBuffer::new(),
            &pack(&["apple", "toy_duck"]),
            &[],
        );
        assert_eq!(
            a,
            Action::SendMessage {
                recipient: RobotId::Alice,
                payload: MessagePayload::ExploreRequest {
                    object_names: vec!["apple".into()]
                }
            }
        );
        // toy_duck is in reach and gets picked next
        let a = step(
            &mut bob_policy,
            &world,
            &graph,
            &MemoryBuffer::new(),
            &pack(&["apple", "toy_duck"]),
            &[],
        );
        assert_eq!(
            a,
            Action::Pick {
                object: "toy_duck".into()
            }
        );
    }

    #[test]
    fn goal_already_met_means_everyone_waits() {
        let mut world = small_world();
        put_in_zone(&mut world, "toy_duck", "tray");
        let task = pack(&["toy_duck"]);
        for id in RobotId::ALL {
            let mut graph = SceneGraph::from_world(id, &world);
            let base = world.robot(id).unwrap().base_pose;
            graph.observe_surroundings(&world, &base, 1.0, 0);
            let mut p = OraclePolicy::new(id);
            assert_eq!(
                step(&mut p, &world, &graph, &MemoryBuffer::new(), &task, &[]),
                Action::Wait,
                "{id}"
            );
        }
    }

    #[test]
    fn too_far_feedback_turns_into_a_clipped_move() {
        let mut world = small_world();
        // alice stands at the first work-table nav target, soap lies deeper on the table
        let nav = world.furniture["work_table"].nav_targets[0];
        world.robots.get_mut(&RobotId::Alice).unwrap().base_pose = nav;
        let mut graph = SceneGraph::from_world(RobotId::Alice, &world);
        graph.observe_surroundings(&world, &nav, 1.0, 0);
        let soap = world.objects["soap"].pose;
        let feedback = world.execute(RobotId::Alice, &Action::Pick { object: "soap".into() });
        let (dx, dy) = match &feedback {
            Feedback::PickFailed {
                reason:
                    PickFailure::TooFar {
                        dx: Some(dx),
                        dy: Some(dy),
                        ..
                    },
                ..
            } => (*dx, *dy),
            other => panic!("expected TooFar, got {other:?}"),
        };
        let mut memory = MemoryBuffer::new();
        memory.append(MemoryEntry::Feedback(0, feedback)).unwrap();
        let mut alice = OraclePolicy::new(RobotId::Alice);
        alice.wanted.push("soap".into());
        alice.approach = Some("soap".into());
        let a = step(&mut alice, &world, &graph, &memory, &pack(&["soap"]), &[]);
        let Action::Move { dx: mx, dy: my } = a else {
            panic!("expected move, got {a:?}")
        };
        // same direction, never longer than asked
        assert!((mx * dy - my * dx).abs() < 1e-9);
        assert!(mx.hypot(my) <= dx.hypot(dy) + 1e-12);
        let dest = nav.translated(mx, my);
        assert!(world.grid.is_free_at(dest.x, dest.y));
        assert!(dest.distance_to(&soap) < nav.distance_to(&soap));
    }

    #[test]
    fn clip_keeps_whole_move_when_free() {
        let world = small_world();
        let base = Pose2D::at(0.55, 0.55);
        assert_eq!(clip_move(&world.grid, &base, 0.3, 0.0), Some((0.3, 0.0)));
        assert_eq!(clip_move(&world.grid, &base, 0.0, 0.0), None);
    }

    #[test]
    fn same_state_same_decision() {
        let world = small_world();
        let graph = SceneGraph::from_world(RobotId::Bob, &world);
        let task = pack(&["apple", "soap"]);
        let a = step(
            &mut OraclePolicy::new(RobotId::Bob),
            &world,
            &graph,
            &MemoryBuffer::new(),
            &task,
            &[],
        );
        let b = step(
            &mut OraclePolicy::new(RobotId::Bob),
            &world,
            &graph,
            &MemoryBuffer::new(),
            &task,
            &[],
        );
        assert_eq!(a, b);
    }
}
