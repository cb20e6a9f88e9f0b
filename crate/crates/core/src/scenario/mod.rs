//! On-disk scenario format.
//!
//! A scenario is a single JSON document: grid dimensions and static
//! obstacles, furniture with footprints and navigation targets, task zones,
//! objects with their initial support, robots, interaction thresholds and
//! the task. The canonical text form is pretty-printed JSON with a trailing
//! newline; loading and saving it again reproduces the same bytes.

mod generate;
mod layouts;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tasks::TaskSpec;
use crate::world::{
    hex_digest, plan_path, CellRect, Furniture, GridMap, Pose2D, Robot, RobotId, SimObject, Support, Thresholds,
    WorldState, Zone,
};

pub use generate::{
    default_seed, generate, generate_with_seed, shipped_file_name, shipped_grid, SHIPPED_OBJECT_COUNTS,
};
pub use layouts::Layout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: f64,
    pub width: u32,
    pub height: u32,
    /// Static obstacles besides furniture footprints.
    #[serde(default)]
    pub obstacles: Vec<CellRect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub layout: String,
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub furniture: Vec<Furniture>,
    pub zones: Vec<Zone>,
    pub objects: Vec<SimObject>,
    pub robots: Vec<Robot>,
    pub task: TaskSpec,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_canonical_json()).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// SHA-256 of the canonical text.
    pub fn content_hash(&self) -> String {
        hex_digest(self.to_canonical_json().as_bytes())
    }

    /// The same scenario with one robot taken out of the team.
    pub fn without_robot(&self, id: RobotId) -> Scenario {
        let mut s = self.clone();
        s.robots.retain(|r| r.id != id);
        s
    }

    fn assemble(&self) -> Result<WorldState, Vec<String>> {
        let mut issues = Vec::new();
        let mut grid =
            GridMap::new(self.grid.width, self.grid.height, self.grid.resolution).map_err(|e| vec![e.to_string()])?;
        for rect in self
            .grid
            .obstacles
            .iter()
            .chain(self.furniture.iter().flat_map(|f| &f.footprint))
        {
            if !rect.is_well_formed() || !grid.contains_cell(rect.max) {
                issues.push(format!("rectangle {rect:?} is malformed or leaves the map"));
            }
            grid.fill_rect(rect);
        }
        let mut seen = BTreeSet::new();
        let ids = self
            .furniture
            .iter()
            .map(|f| &f.id)
            .chain(self.zones.iter().map(|z| &z.id))
            .chain(self.objects.iter().map(|o| &o.id));
        for id in ids {
            if !seen.insert(id.as_str()) {
                issues.push(format!("duplicate id {id}"));
            }
        }
        let mut robot_ids = BTreeSet::new();
        for r in &self.robots {
            if !robot_ids.insert(r.id) {
                issues.push(format!("robot {} listed twice", r.id));
            }
        }
        if !issues.is_empty() {
            return Err(issues);
        }
        Ok(WorldState {
            grid,
            furniture: self.furniture.iter().map(|f| (f.id.clone(), f.clone())).collect(),
            zones: self.zones.iter().map(|z| (z.id.clone(), z.clone())).collect(),
            objects: self.objects.iter().map(|o| (o.id.clone(), o.clone())).collect(),
            robots: self.robots.iter().map(|r| (r.id, r.clone())).collect(),
            thresholds: self.thresholds,
            step: 0,
        })
    }

    /// Every problem found, empty when the scenario is usable.
    pub fn validate(&self) -> Vec<String> {
        let world = match self.assemble() {
            Ok(w) => w,
            Err(issues) => return issues,
        };
        let mut issues = world.integrity_issues();
        if let Err(task) = self.task.validate(&world) {
            issues.extend(task);
        }
        let th = self.thresholds;
        if !(th.open_radius > 0.0 && th.pose_tolerance_xy >= 0.0 && th.pose_tolerance_theta >= 0.0) {
            issues.push("thresholds must be non-negative, open radius positive".into());
        }
        if !world.robots.contains_key(&RobotId::Bob) || !world.robots.contains_key(&RobotId::Alice) {
            issues.push("the team needs at least alice and bob".into());
        }
        for r in world.robots.values() {
            if !r.base_pose.is_finite() || !world.grid.is_free_at(r.base_pose.x, r.base_pose.y) {
                issues.push(format!("{} does not start on a free cell", r.id));
            }
        }
        for o in world.objects.values() {
            if !o.pose.is_finite() {
                issues.push(format!("{} has a non-finite pose", o.id));
            }
            if let Support::InGripper(r) = o.support {
                issues.push(format!("{} starts in the gripper of {r}", o.id));
            }
        }
        if let Some(bob) = world.robots.get(&RobotId::Bob) {
            for zone in self.task.zone_ids() {
                if let Some(z) = world.zones.get(zone) {
                    if !crate::world::check_reach(bob, &z.center_pose()).is_ok() {
                        issues.push(format!("zone {zone} is beyond bob's reach"));
                    }
                }
            }
        }
        // every nav target must be reachable from every mobile robot
        for r in world.robots.values().filter(|r| r.is_mobile()) {
            for f in world.furniture.values() {
                for (i, t) in f.nav_targets.iter().enumerate() {
                    if plan_path(&world.grid, &r.base_pose, t).is_err() {
                        issues.push(format!("{} cannot reach nav target {i} of {}", r.id, f.id));
                    }
                }
            }
        }
        issues
    }

    /// Validates and builds the initial world.
    pub fn build_world(&self) -> Result<WorldState, ScenarioError> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(ScenarioError::Invalid(issues));
        }
        self.assemble().map_err(ScenarioError::Invalid)
    }

    /// Robot start pose, if present.
    pub fn robot_pose(&self, id: RobotId) -> Option<Pose2D> {
        self.robots.iter().find(|r| r.id == id).map(|r| r.base_pose)
    }
}
