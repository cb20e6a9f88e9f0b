//! Household tasks, goal predicates and partial-success scoring.

use serde::{Deserialize, Serialize};

use crate::world::{Support, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub solid_id: String,
    pub panel_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskSpec {
    PackObjects {
        object_ids: Vec<String>,
        tray_id: String,
    },
    SortSolids {
        assignments: Vec<Assignment>,
    },
    /// Ingredients listed bottom to top.
    MakeSandwich {
        ordered_ingredient_ids: Vec<String>,
        board_id: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    PackObjects,
    SortSolids,
    MakeSandwich,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::PackObjects, TaskKind::SortSolids, TaskKind::MakeSandwich];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::PackObjects => "pack_objects",
            TaskKind::SortSolids => "sort_solids",
            TaskKind::MakeSandwich => "make_sandwich",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            TaskKind::PackObjects => "Pack Objects",
            TaskKind::SortSolids => "Sort Solids",
            TaskKind::MakeSandwich => "Make Sandwich",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pack_objects" | "pack" => Ok(TaskKind::PackObjects),
            "sort_solids" | "sort" => Ok(TaskKind::SortSolids),
            "make_sandwich" | "sandwich" => Ok(TaskKind::MakeSandwich),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalReport {
    pub success: bool,
    pub correctly_placed: usize,
    pub total: usize,
}

impl GoalReport {
    fn new(correctly_placed: usize, total: usize) -> Self {
        Self {
            success: correctly_placed == total,
            correctly_placed,
            total,
        }
    }

    /// Fraction placed; an empty task counts as complete.
    pub fn partial_success(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correctly_placed as f64 / self.total as f64
        }
    }
}

impl TaskSpec {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskSpec::PackObjects { .. } => TaskKind::PackObjects,
            TaskSpec::SortSolids { .. } => TaskKind::SortSolids,
            TaskSpec::MakeSandwich { .. } => TaskKind::MakeSandwich,
        }
    }

    /// Task objects in task order.
    pub fn object_ids(&self) -> Vec<&str> {
        match self {
            TaskSpec::PackObjects { object_ids, .. } => object_ids.iter().map(String::as_str).collect(),
            TaskSpec::SortSolids { assignments } => assignments.iter().map(|a| a.solid_id.as_str()).collect(),
            TaskSpec::MakeSandwich {
                ordered_ingredient_ids, ..
            } => ordered_ingredient_ids.iter().map(String::as_str).collect(),
        }
    }

    pub fn involves(&self, object_id: &str) -> bool {
        self.object_ids().contains(&object_id)
    }

    /// Zone a task object must end up in.
    pub fn target_zone(&self, object_id: &str) -> Option<&str> {
        match self {
            TaskSpec::PackObjects { object_ids, tray_id } => {
                object_ids.iter().any(|o| o == object_id).then_some(tray_id.as_str())
            }
            TaskSpec::SortSolids { assignments } => assignments
                .iter()
                .find(|a| a.solid_id == object_id)
                .map(|a| a.panel_id.as_str()),
            TaskSpec::MakeSandwich {
                ordered_ingredient_ids,
                board_id,
            } => ordered_ingredient_ids
                .iter()
                .any(|o| o == object_id)
                .then_some(board_id.as_str()),
        }
    }

    /// Zones the task writes to.
    pub fn zone_ids(&self) -> Vec<&str> {
        let mut zones: Vec<&str> = match self {
            TaskSpec::PackObjects { tray_id, .. } => vec![tray_id],
            TaskSpec::SortSolids { assignments } => assignments.iter().map(|a| a.panel_id.as_str()).collect(),
            TaskSpec::MakeSandwich { board_id, .. } => vec![board_id],
        };
        zones.sort_unstable();
        zones.dedup();
        zones
    }

    /// Goal statement shown to every robot.
    pub fn describe(&self, state: &WorldState) -> String {
        let name = |id: &str| {
            state
                .objects
                .get(id)
                .map(|o| format!("{} ({id})", o.display_name))
                .unwrap_or_else(|| id.to_string())
        };
        match self {
            TaskSpec::PackObjects { object_ids, tray_id } => format!(
                "Pack Objects: put every one of the following objects into the {tray_id} zone on the work table: {}.",
                object_ids.iter().map(|o| name(o)).collect::<Vec<_>>().join(", ")
            ),
            TaskSpec::SortSolids { assignments } => format!(
                "Sort Solids: place each solid onto the panel of the same colour on the work table: {}.",
                assignments
                    .iter()
                    .map(|a| format!("{} -> {}", name(&a.solid_id), a.panel_id))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            TaskSpec::MakeSandwich {
                ordered_ingredient_ids,
                board_id,
            } => format!(
                "Make Sandwich: stack the ingredients on the {board_id} zone of the work table in this order, bottom to top: {}. Bread slices are interchangeable.",
                ordered_ingredient_ids
                    .iter()
                    .map(|o| name(o))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }

    /// Consistency against a world: referenced ids exist and colours match.
    pub fn validate(&self, state: &WorldState) -> Result<(), Vec<String>> {
        let mut issues = Vec::new();
        for obj in self.object_ids() {
            if !state.objects.contains_key(obj) {
                issues.push(format!("task object {obj} does not exist"));
            }
        }
        let mut sorted = self.object_ids();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            issues.push("task lists an object twice".to_string());
        }
        for zone in self.zone_ids() {
            if !state.zones.contains_key(zone) {
                issues.push(format!("task zone {zone} does not exist"));
            }
        }
        if let TaskSpec::SortSolids { assignments } = self {
            for a in assignments {
                let solid = state.objects.get(&a.solid_id).and_then(|o| o.color);
                let panel = state.zones.get(&a.panel_id).and_then(|z| z.color);
                if solid.is_none() || solid != panel {
                    issues.push(format!("{} and {} do not share a colour", a.solid_id, a.panel_id));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }
}

/// Placed in `zone`: listed there, supported by the zone's furniture and
/// resting inside the zone area.
fn in_zone(state: &WorldState, object_id: &str, zone_id: &str) -> bool {
    let (Some(obj), Some(zone)) = (state.objects.get(object_id), state.zones.get(zone_id)) else {
        return false;
    };
    obj.zone.as_deref() == Some(zone_id)
        && zone.contents.iter().any(|c| c == object_id)
        && obj.support == Support::OnFurniture(zone.furniture.clone())
        && zone.contains_point(obj.pose.x, obj.pose.y)
}

fn category_of<'a>(state: &'a WorldState, id: &'a str) -> &'a str {
    state.objects.get(id).map(|o| o.category.as_str()).unwrap_or(id)
}

/// Scores a task against the current state.
pub fn evaluate(state: &WorldState, task: &TaskSpec) -> GoalReport {
    match task {
        TaskSpec::PackObjects { object_ids, tray_id } => {
            let placed = object_ids.iter().filter(|o| in_zone(state, o, tray_id)).count();
            GoalReport::new(placed, object_ids.len())
        }
        TaskSpec::SortSolids { assignments } => {
            let placed = assignments
                .iter()
                .filter(|a| in_zone(state, &a.solid_id, &a.panel_id))
                .count();
            GoalReport::new(placed, assignments.len())
        }
        TaskSpec::MakeSandwich {
            ordered_ingredient_ids,
            board_id,
        } => {
            let stack = state
                .zones
                .get(board_id)
                .map(|z| z.contents.as_slice())
                .unwrap_or_default();
            let placed = stack
                .iter()
                .zip(ordered_ingredient_ids)
                .take_while(|(have, want)| {
                    in_zone(state, have, board_id) && category_of(state, have) == category_of(state, want)
                })
                .count();
            GoalReport::new(placed, ordered_ingredient_ids.len())
        }
    }
}
