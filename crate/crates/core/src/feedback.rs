//! Textual feedback returned after every executed action.
//!
//! The union is closed: five success kinds, five failure kinds with their
//! enumerated reasons, the task-status report for the tabletop robot, and
//! two neutral acknowledgements (waiting and message hand-off).

use serde::{Deserialize, Serialize};

use crate::tasks::TaskSpec;
use crate::world::{Color, Endpoint, Pose2D, RobotId, SimObject, WorldState};

/// What a robot sees of an object when it is listed in feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSighting {
    pub id: String,
    pub display_name: String,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    pub pose: Pose2D,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone: Option<String>,
}

impl ObjectSighting {
    pub fn of(object: &SimObject) -> Self {
        Self {
            id: object.id.clone(),
            display_name: object.display_name.clone(),
            category: object.category.clone(),
            color: object.color,
            pose: object.pose,
            zone: object.zone.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementRelation {
    On,
    In,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NavFailure {
    /// Start or goal of global planning is on an obstacle or off the map.
    InvalidEndpoint {
        endpoint: Endpoint,
    },
    /// Target missing from the scene graph or not navigable.
    InvalidTarget,
    /// The base ended too far from the target pose.
    PoseDiscrepancy {
        distance: f64,
        heading_error: f64,
    },
    RoleIllegal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpenFailure {
    AlreadyOpenOrNotOpenable,
    OutOfRange { distance: f64 },
    RoleIllegal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PickFailure {
    GripperOccupied {
        held: String,
    },
    UnknownObject,
    InvalidConfiguration,
    /// `dx`/`dy` are present only for mobile manipulators.
    TooFar {
        distance: f64,
        dx: Option<f64>,
        dy: Option<f64>,
    },
    RoleIllegal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlaceFailure {
    GripperEmpty,
    ObjectMismatch { held: String },
    NotAtTarget,
    RoleIllegal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Feedback {
    NavigationSuccess {
        furniture: String,
        nav_index: usize,
        pose: Pose2D,
        /// Listed only for furniture that does not need opening.
        surface_objects: Option<Vec<ObjectSighting>>,
    },
    OpenSuccess {
        furniture: String,
        contents: Vec<ObjectSighting>,
    },
    MoveSuccess {
        dx: f64,
        dy: f64,
    },
    PickSuccess {
        object: String,
        holder: RobotId,
    },
    PlaceSuccess {
        object: String,
        location: String,
        relation: PlacementRelation,
        pose: Pose2D,
    },
    NavigationFailed {
        furniture: String,
        reason: NavFailure,
    },
    OpenFailed {
        furniture: String,
        reason: OpenFailure,
    },
    MoveFailed {
        dx: f64,
        dy: f64,
        reason: NavFailure,
    },
    PickFailed {
        object: String,
        reason: PickFailure,
    },
    PlaceFailed {
        object: String,
        destination: String,
        reason: PlaceFailure,
    },
    TaskStatus {
        text: String,
    },
    WaitAck,
    MessageSent {
        recipient: RobotId,
    },
    MessageUndeliverable {
        recipient: RobotId,
    },
}

/// Discriminant names, one per variant, in declaration order.
pub const VARIANT_NAMES: [&str; 14] = [
    "navigation_success",
    "open_success",
    "move_success",
    "pick_success",
    "place_success",
    "navigation_failed",
    "open_failed",
    "move_failed",
    "pick_failed",
    "place_failed",
    "task_status",
    "wait_ack",
    "message_sent",
    "message_undeliverable",
];

impl Feedback {
    pub fn variant_name(&self) -> &'static str {
        let idx = match self {
            Feedback::NavigationSuccess { .. } => 0,
            Feedback::OpenSuccess { .. } => 1,
            Feedback::MoveSuccess { .. } => 2,
            Feedback::PickSuccess { .. } => 3,
            Feedback::PlaceSuccess { .. } => 4,
            Feedback::NavigationFailed { .. } => 5,
            Feedback::OpenFailed { .. } => 6,
            Feedback::MoveFailed { .. } => 7,
            Feedback::PickFailed { .. } => 8,
            Feedback::PlaceFailed { .. } => 9,
            Feedback::TaskStatus { .. } => 10,
            Feedback::WaitAck => 11,
            Feedback::MessageSent { .. } => 12,
            Feedback::MessageUndeliverable { .. } => 13,
        };
        VARIANT_NAMES[idx]
    }

    /// Success variants are exactly those that changed the physical world.
    pub fn is_success(&self) -> bool {
        matches!(
            self,
            Feedback::NavigationSuccess { .. }
                | Feedback::OpenSuccess { .. }
                | Feedback::MoveSuccess { .. }
                | Feedback::PickSuccess { .. }
                | Feedback::PlaceSuccess { .. }
        )
    }

    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            Feedback::NavigationFailed { .. }
                | Feedback::OpenFailed { .. }
                | Feedback::MoveFailed { .. }
                | Feedback::PickFailed { .. }
                | Feedback::PlaceFailed { .. }
                | Feedback::MessageUndeliverable { .. }
        )
    }
}

fn list_sightings(items: &[ObjectSighting]) -> String {
    items
        .iter()
        .map(|s| {
            let zone = s.zone.as_ref().map(|z| format!(" on {z}")).unwrap_or_default();
            format!(
                "{} ({}) at ({:.2}, {:.2}){zone}",
                s.id, s.display_name, s.pose.x, s.pose.y
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn nav_reason(reason: &NavFailure) -> String {
    match reason {
        NavFailure::InvalidEndpoint { endpoint } => {
            let which = match endpoint {
                Endpoint::Start => "start",
                Endpoint::Goal => "goal",
            };
            format!("the {which} point of global path planning lies on an obstacle or exceeds the map boundary")
        }
        NavFailure::InvalidTarget => {
            "the target does not exist in the scene graph or does not support navigation".to_string()
        }
        NavFailure::PoseDiscrepancy {
            distance,
            heading_error,
        } => format!(
            "the final base pose differs from the target pose by {distance:.2} m and {heading_error:.2} rad, beyond the acceptable threshold"
        ),
        NavFailure::RoleIllegal => "this robot has no mobile base and cannot drive".to_string(),
    }
}

/// Deterministic one-paragraph rendering. Numbers use two decimals.
pub fn render_feedback(feedback: &Feedback) -> String {
    match feedback {
        Feedback::NavigationSuccess {
            furniture,
            nav_index,
            pose,
            surface_objects,
        } => {
            let mut text = format!(
                "Navigation succeeded: arrived at navigation target {nav_index} of {furniture}, base pose ({:.2}, {:.2}, {:.2}).",
                pose.x, pose.y, pose.theta
            );
            match surface_objects {
                Some(items) if items.is_empty() => {
                    text.push_str(&format!(" Nothing is placed on the surface of {furniture}."))
                }
                Some(items) => text.push_str(&format!(
                    " Objects on the surface of {furniture}: {}.",
                    list_sightings(items)
                )),
                None => {}
            }
            text
        }
        Feedback::OpenSuccess { furniture, contents } => {
            if contents.is_empty() {
                format!("Open succeeded: {furniture} is now open and contains nothing.")
            } else {
                format!(
                    "Open succeeded: {furniture} is now open. Items inside: {}.",
                    list_sightings(contents)
                )
            }
        }
        Feedback::MoveSuccess { dx, dy } => {
            format!("Move succeeded: the base shifted {dx:.2} m along the x-axis and {dy:.2} m along the y-axis.")
        }
        Feedback::PickSuccess { object, holder } => {
            format!("Pick succeeded: {object} is now held in the gripper of {holder}.")
        }
        Feedback::PlaceSuccess {
            object,
            location,
            relation,
            ..
        } => {
            let prep = match relation {
                PlacementRelation::On => "on",
                PlacementRelation::In => "in",
            };
            format!("Place succeeded: {object} was placed {prep} {location}.")
        }
        Feedback::NavigationFailed { furniture, reason } => {
            format!("Navigation to {furniture} failed: {}.", nav_reason(reason))
        }
        Feedback::OpenFailed { furniture, reason } => match reason {
            OpenFailure::AlreadyOpenOrNotOpenable => {
                format!("Open {furniture} failed: it is already open or cannot be opened.")
            }
            OpenFailure::OutOfRange { distance } => {
                format!("Open {furniture} failed: it is {distance:.2} m from the base, beyond the operational range.")
            }
            OpenFailure::RoleIllegal => {
                format!("Open {furniture} failed: this robot is not able to open furniture.")
            }
        },
        Feedback::MoveFailed { dx, dy, reason } => {
            format!("Move by ({dx:.2}, {dy:.2}) failed: {}.", nav_reason(reason))
        }
        Feedback::PickFailed { object, reason } => match reason {
            PickFailure::GripperOccupied { held } => {
                format!("Pick {object} failed: the gripper is already holding {held}.")
            }
            PickFailure::UnknownObject => {
                format!("Pick {object} failed: the scene graph has no information about {object}.")
            }
            PickFailure::InvalidConfiguration => {
                format!("Pick {object} failed: the initial or target arm configuration is invalid.")
            }
            PickFailure::TooFar { distance, dx, dy } => {
                let mut text = format!(
                    "Pick {object} failed: the object is {distance:.2} m from the end effector, exceeding the allowable threshold."
                );
                if let (Some(dx), Some(dy)) = (dx, dy) {
                    text.push_str(&format!(
                        " Relative offset from the base to the object: dx = {dx:.2} m, dy = {dy:.2} m."
                    ));
                }
                text
            }
            PickFailure::RoleIllegal => {
                format!("Pick {object} failed: this robot has no arm.")
            }
        },
        Feedback::PlaceFailed {
            object,
            destination,
            reason,
        } => match reason {
            PlaceFailure::GripperEmpty => {
                format!("Place {object} on {destination} failed: the gripper is empty.")
            }
            PlaceFailure::ObjectMismatch { held } => {
                format!("Place {object} on {destination} failed: the gripper is holding {held}, not {object}.")
            }
            PlaceFailure::NotAtTarget => format!(
                "Place {object} on {destination} failed: the object could not be placed at the target location."
            ),
            PlaceFailure::RoleIllegal => {
                format!("Place {object} on {destination} failed: this robot has no arm.")
            }
        },
        Feedback::TaskStatus { text } => format!("Target task status: {text}."),
        Feedback::WaitAck => "Wait acknowledged: no action was taken this step.".to_string(),
        Feedback::MessageSent { recipient } => {
            format!("Message handed to the channel for {recipient}.")
        }
        Feedback::MessageUndeliverable { recipient } => {
            format!("Message could not be sent: {recipient} is not part of the team.")
        }
    }
}

/// Target task status for the tabletop robot.
pub fn task_status(state: &WorldState, task: &TaskSpec) -> Feedback {
    let names = |ids: &[String]| -> String {
        if ids.is_empty() {
            "nothing".to_string()
        } else {
            ids.iter()
                .map(|id| {
                    state
                        .objects
                        .get(id)
                        .map(|o| o.display_name.clone())
                        .unwrap_or_else(|| id.clone())
                })
                .collect::<Vec<_>>()
                .join(", ")
        }
    };
    let text = match task {
        TaskSpec::PackObjects { tray_id, .. } => {
            let contents = state.zones.get(tray_id).map(|z| z.contents.clone()).unwrap_or_default();
            format!("tray contains: {}", names(&contents))
        }
        TaskSpec::SortSolids { assignments } => {
            let mut panels: Vec<&str> = assignments.iter().map(|a| a.panel_id.as_str()).collect();
            panels.sort_unstable();
            panels.dedup();
            let listing = panels
                .iter()
                .map(|panel| {
                    let contents = state.zones.get(*panel).map(|z| z.contents.clone()).unwrap_or_default();
                    format!("{panel} holds {}", names(&contents))
                })
                .collect::<Vec<_>>()
                .join("; ");
            format!("panels: {listing}")
        }
        TaskSpec::MakeSandwich { board_id, .. } => {
            let contents = state
                .zones
                .get(board_id)
                .map(|z| z.contents.clone())
                .unwrap_or_default();
            format!("cutting board stack from bottom to top: {}", names(&contents))
        }
    };
    Feedback::TaskStatus { text }
}
