use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{
    grid::{plan_path, PathError},
    Action, ActionKind, Furniture, GridMap, Gripper, Pose2D, Robot, RobotId, Role, SimObject, Support, Thresholds,
    Zone,
};
use crate::feedback::{
    Feedback, NavFailure, ObjectSighting, OpenFailure, PickFailure, PlaceFailure, PlacementRelation,
};

/// Inset used when dropping an object onto a furniture surface, so the drop
/// point sits strictly inside the footprint.
pub const SURFACE_INSET: f64 = 0.05;

/// What the acting robot believes exists. Pick consults it for the
/// "object missing from the scene graph" failure; navigation consults it for
/// unknown targets.
pub trait Belief {
    fn knows_object(&self, id: &str) -> bool;
    fn knows_furniture(&self, id: &str) -> bool;
}

/// Ground-truth knowledge: everything that exists is known.
pub struct Omniscient;

impl Belief for Omniscient {
    fn knows_object(&self, _id: &str) -> bool {
        true
    }

    fn knows_furniture(&self, _id: &str) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReachResult {
    Ok { distance: f64 },
    TooFar { distance: f64, dx: f64, dy: f64 },
}

impl ReachResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, ReachResult::Ok { .. })
    }
}

/// Planar reach test from the robot base. Robots without an arm never reach.
pub fn check_reach(robot: &Robot, target: &Pose2D) -> ReachResult {
    let dx = target.x - robot.base_pose.x;
    let dy = target.y - robot.base_pose.y;
    let distance = dx.hypot(dy);
    match robot.reach_radius {
        Some(reach) if distance <= reach => ReachResult::Ok { distance },
        _ => ReachResult::TooFar { distance, dx, dy },
    }
}

/// Ground truth of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub grid: GridMap,
    pub furniture: BTreeMap<String, Furniture>,
    pub zones: BTreeMap<String, Zone>,
    pub objects: BTreeMap<String, SimObject>,
    pub robots: BTreeMap<RobotId, Robot>,
    pub thresholds: Thresholds,
    pub step: u32,
}

#[derive(Serialize)]
struct DynamicView<'a> {
    step: u32,
    furniture: Vec<(&'a str, bool, &'a [String], &'a [String])>,
    zones: Vec<(&'a str, &'a [String])>,
    objects: &'a BTreeMap<String, SimObject>,
    robots: &'a BTreeMap<RobotId, Robot>,
}

impl WorldState {
    pub fn roster(&self) -> Vec<RobotId> {
        self.robots.keys().copied().collect()
    }

    pub fn robot(&self, id: RobotId) -> Option<&Robot> {
        self.robots.get(&id)
    }

    /// SHA-256 over everything that can change during an episode.
    pub fn state_hash(&self) -> String {
        let view = DynamicView {
            step: self.step,
            furniture: self
                .furniture
                .values()
                .map(|f| {
                    (
                        f.id.as_str(),
                        f.is_open,
                        f.surface_object_ids.as_slice(),
                        f.contained_object_ids.as_slice(),
                    )
                })
                .collect(),
            zones: self
                .zones
                .values()
                .map(|z| (z.id.as_str(), z.contents.as_slice()))
                .collect(),
            objects: &self.objects,
            robots: &self.robots,
        };
        let bytes = serde_json::to_vec(&view).expect("state view serializes");
        hex_digest(&bytes)
    }

    /// Distance from a point to the nearest footprint cell of a furniture.
    pub fn distance_to_footprint(&self, furniture: &Furniture, x: f64, y: f64) -> f64 {
        furniture
            .footprint
            .iter()
            .map(|rect| {
                let (x0, y0, x1, y1) = self.grid.rect_bounds(rect);
                let cx = x.clamp(x0, x1);
                let cy = y.clamp(y0, y1);
                (x - cx).hypot(y - cy)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Drop point on a furniture surface nearest to `(x, y)`.
    pub fn surface_drop_point(&self, furniture: &Furniture, x: f64, y: f64) -> Pose2D {
        let mut best = (f64::INFINITY, Pose2D::at(x, y));
        for rect in &furniture.footprint {
            let (x0, y0, x1, y1) = self.grid.rect_bounds(rect);
            let (ix0, ix1) = inset_range(x0, x1);
            let (iy0, iy1) = inset_range(y0, y1);
            let p = Pose2D::at(x.clamp(ix0, ix1), y.clamp(iy0, iy1));
            let d = (p.x - x).hypot(p.y - y);
            if d < best.0 {
                best = (d, p);
            }
        }
        best.1
    }

    pub fn advance_step(&mut self) {
        self.step += 1;
    }

    /// Executes with ground-truth belief.
    pub fn execute(&mut self, robot: RobotId, action: &Action) -> Feedback {
        self.execute_with_belief(robot, action, &Omniscient)
    }

    /// Applies one action. The state changes only when a success variant is
    /// returned; every failure comes back as feedback, never as an error.
    pub fn execute_with_belief(&mut self, robot_id: RobotId, action: &Action, belief: &dyn Belief) -> Feedback {
        let Some(robot) = self.robots.get(&robot_id).cloned() else {
            return Feedback::WaitAck;
        };
        let legal = robot.role.allows(action.kind());
        match action {
            Action::Wait => Feedback::WaitAck,
            Action::SendMessage { recipient, .. } => {
                if *recipient != robot_id && self.robots.contains_key(recipient) {
                    Feedback::MessageSent { recipient: *recipient }
                } else {
                    Feedback::MessageUndeliverable { recipient: *recipient }
                }
            }
            Action::Navigate { furniture, index } => {
                if !legal {
                    return Feedback::NavigationFailed {
                        furniture: furniture.clone(),
                        reason: NavFailure::RoleIllegal,
                    };
                }
                self.navigate(&robot, furniture, *index, belief)
            }
            Action::Move { dx, dy } => {
                if !legal {
                    return Feedback::MoveFailed {
                        dx: *dx,
                        dy: *dy,
                        reason: NavFailure::RoleIllegal,
                    };
                }
                self.apply_move(robot_id, *dx, *dy)
            }
            Action::Open { furniture } => {
                if !legal {
                    return Feedback::OpenFailed {
                        furniture: furniture.clone(),
                        reason: OpenFailure::RoleIllegal,
                    };
                }
                self.open(&robot, furniture)
            }
            Action::Pick { object } => {
                if !legal {
                    return Feedback::PickFailed {
                        object: object.clone(),
                        reason: PickFailure::RoleIllegal,
                    };
                }
                self.pick(&robot, object, belief)
            }
            Action::Place { object, destination } => {
                if !legal {
                    return Feedback::PlaceFailed {
                        object: object.clone(),
                        destination: destination.clone(),
                        reason: PlaceFailure::RoleIllegal,
                    };
                }
                self.place(&robot, object, destination)
            }
        }
    }

    fn set_base(&mut self, robot_id: RobotId, pose: Pose2D) {
        let held = {
            let robot = self.robots.get_mut(&robot_id).expect("robot exists");
            robot.base_pose = pose;
            robot.gripper.held().map(str::to_string)
        };
        if let Some(obj) = held.and_then(|id| self.objects.get_mut(&id)) {
            obj.pose = pose;
        }
    }

    fn navigate(&mut self, robot: &Robot, furniture_id: &str, index: usize, belief: &dyn Belief) -> Feedback {
        let fail = |reason| Feedback::NavigationFailed {
            furniture: furniture_id.to_string(),
            reason,
        };
        let Some(furniture) = self.furniture.get(furniture_id) else {
            return fail(NavFailure::InvalidTarget);
        };
        if !belief.knows_furniture(furniture_id) {
            return fail(NavFailure::InvalidTarget);
        }
        let Some(target) = furniture.nav_targets.get(index).copied() else {
            return fail(NavFailure::InvalidTarget);
        };
        match plan_path(&self.grid, &robot.base_pose, &target) {
            Err(PathError::InvalidEndpoint { endpoint }) => fail(NavFailure::InvalidEndpoint { endpoint }),
            Err(PathError::NoPath) => fail(NavFailure::PoseDiscrepancy {
                distance: robot.base_pose.distance_to(&target),
                heading_error: robot.base_pose.heading_error(&target),
            }),
            Ok(_) => {
                // The path is followed exactly; the arrival check still guards
                // the postcondition.
                let arrived = target;
                let th = self.thresholds;
                if arrived.distance_to(&target) > th.pose_tolerance_xy
                    || arrived.heading_error(&target) > th.pose_tolerance_theta
                {
                    return fail(NavFailure::PoseDiscrepancy {
                        distance: arrived.distance_to(&target),
                        heading_error: arrived.heading_error(&target),
                    });
                }
                self.set_base(robot.id, arrived);
                let furniture = &self.furniture[furniture_id];
                let surface_objects = (!furniture.openable).then(|| {
                    furniture
                        .surface_object_ids
                        .iter()
                        .filter_map(|id| self.objects.get(id))
                        .map(ObjectSighting::of)
                        .collect()
                });
                Feedback::NavigationSuccess {
                    furniture: furniture_id.to_string(),
                    nav_index: index,
                    pose: arrived,
                    surface_objects,
                }
            }
        }
    }

    /// Relative base displacement for mobile robots.
    pub fn apply_move(&mut self, robot_id: RobotId, dx: f64, dy: f64) -> Feedback {
        let fail = |reason| Feedback::MoveFailed { dx, dy, reason };
        let Some(robot) = self.robots.get(&robot_id).cloned() else {
            return fail(NavFailure::RoleIllegal);
        };
        if !robot.is_mobile() {
            return fail(NavFailure::RoleIllegal);
        }
        let dest = robot.base_pose.translated(dx, dy);
        match plan_path(&self.grid, &robot.base_pose, &dest) {
            Err(PathError::InvalidEndpoint { endpoint }) => fail(NavFailure::InvalidEndpoint { endpoint }),
            Err(PathError::NoPath) => fail(NavFailure::PoseDiscrepancy {
                distance: robot.base_pose.distance_to(&dest),
                heading_error: 0.0,
            }),
            Ok(_) => {
                self.set_base(robot_id, dest);
                Feedback::MoveSuccess { dx, dy }
            }
        }
    }

    fn open(&mut self, robot: &Robot, furniture_id: &str) -> Feedback {
        let fail = |reason| Feedback::OpenFailed {
            furniture: furniture_id.to_string(),
            reason,
        };
        let Some(furniture) = self.furniture.get(furniture_id) else {
            return fail(OpenFailure::AlreadyOpenOrNotOpenable);
        };
        if !furniture.openable || furniture.is_open {
            return fail(OpenFailure::AlreadyOpenOrNotOpenable);
        }
        let distance = self.distance_to_footprint(furniture, robot.base_pose.x, robot.base_pose.y);
        if distance > self.thresholds.open_radius {
            return fail(OpenFailure::OutOfRange { distance });
        }
        let furniture = self.furniture.get_mut(furniture_id).expect("checked");
        furniture.is_open = true;
        let contents = furniture
            .contained_object_ids
            .iter()
            .filter_map(|id| self.objects.get(id))
            .map(ObjectSighting::of)
            .collect();
        Feedback::OpenSuccess {
            furniture: furniture_id.to_string(),
            contents,
        }
    }

    /// Why an object cannot be grasped regardless of distance, if anything.
    fn configuration_blocked(&self, robot: &Robot, object: &SimObject) -> bool {
        match &object.support {
            Support::InGripper(holder) => *holder != robot.id,
            Support::InFurniture(f) => !self.furniture.get(f).is_some_and(|f| f.is_open),
            Support::OnFurniture(_) => object
                .zone
                .as_ref()
                .and_then(|z| self.zones.get(z))
                .is_some_and(|z| z.contents.last() != Some(&object.id)),
        }
    }

    fn pick(&mut self, robot: &Robot, object_id: &str, belief: &dyn Belief) -> Feedback {
        let fail = |reason| Feedback::PickFailed {
            object: object_id.to_string(),
            reason,
        };
        if let Some(held) = robot.gripper.held() {
            return fail(PickFailure::GripperOccupied { held: held.to_string() });
        }
        let Some(object) = self.objects.get(object_id) else {
            return fail(PickFailure::UnknownObject);
        };
        if !belief.knows_object(object_id) {
            return fail(PickFailure::UnknownObject);
        }
        if self.configuration_blocked(robot, object) {
            return fail(PickFailure::InvalidConfiguration);
        }
        if let ReachResult::TooFar { distance, dx, dy } = check_reach(robot, &object.pose) {
            let offsets = robot.role == Role::MobileManipulation;
            return fail(PickFailure::TooFar {
                distance,
                dx: offsets.then_some(dx),
                dy: offsets.then_some(dy),
            });
        }

        let object = self.objects.get(object_id).cloned().expect("checked");
        self.detach(&object);
        let obj = self.objects.get_mut(object_id).expect("checked");
        obj.support = Support::InGripper(robot.id);
        obj.zone = None;
        obj.pose = robot.base_pose;
        self.robots.get_mut(&robot.id).expect("robot").gripper = Gripper::Holding(object_id.to_string());
        Feedback::PickSuccess {
            object: object_id.to_string(),
            holder: robot.id,
        }
    }

    fn detach(&mut self, object: &SimObject) {
        match &object.support {
            Support::OnFurniture(f) | Support::InFurniture(f) => {
                if let Some(f) = self.furniture.get_mut(f) {
                    f.surface_object_ids.retain(|id| *id != object.id);
                    f.contained_object_ids.retain(|id| *id != object.id);
                }
            }
            Support::InGripper(_) => {}
        }
        if let Some(zone) = object.zone.as_ref().and_then(|z| self.zones.get_mut(z)) {
            zone.contents.retain(|id| *id != object.id);
        }
    }

    fn place(&mut self, robot: &Robot, object_id: &str, destination: &str) -> Feedback {
        let fail = |reason| Feedback::PlaceFailed {
            object: object_id.to_string(),
            destination: destination.to_string(),
            reason,
        };
        let held = match robot.gripper.held() {
            None => return fail(PlaceFailure::GripperEmpty),
            Some(h) => h.to_string(),
        };
        if held != object_id {
            return fail(PlaceFailure::ObjectMismatch { held });
        }

        // Resolve the release point, then verify it lands where asked.
        let (furniture_id, zone_id, drop, relation) = if let Some(zone) = self.zones.get(destination) {
            // zones are tabletop task areas operated by the fixed arm only
            if robot.role != Role::Manipulation {
                return fail(PlaceFailure::NotAtTarget);
            }
            (
                zone.furniture.clone(),
                Some(zone.id.clone()),
                zone.center_pose(),
                PlacementRelation::On,
            )
        } else if let Some(furniture) = self.furniture.get(destination) {
            if furniture.openable && !furniture.is_open {
                return fail(PlaceFailure::NotAtTarget);
            }
            let relation = if furniture.openable {
                PlacementRelation::In
            } else {
                PlacementRelation::On
            };
            let drop = self.surface_drop_point(furniture, robot.base_pose.x, robot.base_pose.y);
            (furniture.id.clone(), None, drop, relation)
        } else {
            return fail(PlaceFailure::NotAtTarget);
        };
        if !check_reach(robot, &drop).is_ok() {
            return fail(PlaceFailure::NotAtTarget);
        }

        let furniture = self.furniture.get_mut(&furniture_id).expect("resolved");
        match relation {
            PlacementRelation::On => furniture.surface_object_ids.push(object_id.to_string()),
            PlacementRelation::In => furniture.contained_object_ids.push(object_id.to_string()),
        }
        if let Some(z) = &zone_id {
            self.zones
                .get_mut(z)
                .expect("resolved")
                .contents
                .push(object_id.to_string());
        }
        let obj = self.objects.get_mut(object_id).expect("held object exists");
        obj.support = match relation {
            PlacementRelation::On => Support::OnFurniture(furniture_id.clone()),
            PlacementRelation::In => Support::InFurniture(furniture_id.clone()),
        };
        obj.zone = zone_id.clone();
        obj.pose = drop;
        self.robots.get_mut(&robot.id).expect("robot").gripper = Gripper::Empty;
        Feedback::PlaceSuccess {
            object: object_id.to_string(),
            location: zone_id.unwrap_or(furniture_id),
            relation,
            pose: drop,
        }
    }

    /// Checks cross references and the support invariants. Returns one line
    /// per violation.
    pub fn integrity_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for obj in self.objects.values() {
            let mut holders = 0;
            for f in self.furniture.values() {
                holders += f.surface_object_ids.iter().filter(|i| **i == obj.id).count();
                holders += f.contained_object_ids.iter().filter(|i| **i == obj.id).count();
            }
            let held_by: Vec<_> = self
                .robots
                .values()
                .filter(|r| r.gripper.held() == Some(obj.id.as_str()))
                .collect();
            match &obj.support {
                Support::OnFurniture(f) => {
                    if !self
                        .furniture
                        .get(f)
                        .is_some_and(|f| f.surface_object_ids.contains(&obj.id))
                    {
                        issues.push(format!("{} claims to rest on {f} but is not listed there", obj.id));
                    }
                }
                Support::InFurniture(f) => match self.furniture.get(f) {
                    Some(furn) if !furn.openable => {
                        issues.push(format!("{} is inside {f}, which cannot be opened", obj.id))
                    }
                    Some(furn) if !furn.contained_object_ids.contains(&obj.id) => {
                        issues.push(format!("{} claims to be in {f} but is not listed there", obj.id))
                    }
                    None => issues.push(format!("{} references unknown furniture {f}", obj.id)),
                    _ => {}
                },
                Support::InGripper(r) => {
                    if held_by.len() != 1 || held_by[0].id != *r {
                        issues.push(format!("{} claims to be held by {r}", obj.id));
                    }
                }
            }
            let expected = usize::from(!matches!(obj.support, Support::InGripper(_)));
            if holders != expected {
                issues.push(format!("{} has {holders} furniture listings", obj.id));
            }
            if held_by.len() > 1 {
                issues.push(format!("{} is held by several robots", obj.id));
            }
            if let Some(z) = &obj.zone {
                match self.zones.get(z) {
                    Some(zone) if !zone.contents.contains(&obj.id) => {
                        issues.push(format!("{} claims zone {z} but is not in its contents", obj.id))
                    }
                    None => issues.push(format!("{} references unknown zone {z}", obj.id)),
                    _ => {}
                }
            }
        }
        for f in self.furniture.values() {
            if !f.openable && (f.is_open || !f.contained_object_ids.is_empty()) {
                issues.push(format!("{} cannot be opened but is open or has contents", f.id));
            }
            for id in f.surface_object_ids.iter().chain(&f.contained_object_ids) {
                if !self.objects.contains_key(id) {
                    issues.push(format!("{} lists unknown object {id}", f.id));
                }
            }
            if f.nav_targets.is_empty() {
                issues.push(format!("{} has no navigation target", f.id));
            }
            for (i, t) in f.nav_targets.iter().enumerate() {
                if !self.grid.is_free_at(t.x, t.y) {
                    issues.push(format!("{} nav target {i} is not on a free cell", f.id));
                }
            }
        }
        for z in self.zones.values() {
            if !self.furniture.contains_key(&z.furniture) {
                issues.push(format!("zone {} references unknown furniture {}", z.id, z.furniture));
            }
            for id in &z.contents {
                match self.objects.get(id) {
                    Some(o) if o.zone.as_deref() == Some(z.id.as_str()) => {}
                    _ => issues.push(format!("zone {} lists {id} which is not in it", z.id)),
                }
            }
        }
        for r in self.robots.values() {
            if let Some(h) = r.gripper.held() {
                if !self
                    .objects
                    .get(h)
                    .is_some_and(|o| o.support == Support::InGripper(r.id))
                {
                    issues.push(format!("{} holds {h} which does not point back", r.id));
                }
            }
            if r.can_manipulate() != r.reach_radius.is_some() {
                issues.push(format!("{} reach radius must be present iff it has an arm", r.id));
            }
            if r.role != r.id.role() {
                issues.push(format!("{} must have role {:?}", r.id, r.id.role()));
            }
        }
        issues
    }

    /// Role legality for an action kind, used by log checks.
    pub fn is_legal(&self, robot: RobotId, kind: ActionKind) -> bool {
        self.robots.get(&robot).is_some_and(|r| r.role.allows(kind))
    }
}

fn inset_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo > 2.0 * SURFACE_INSET {
        (lo + SURFACE_INSET, hi - SURFACE_INSET)
    } else {
        let mid = (lo + hi) / 2.0;
        (mid, mid)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
