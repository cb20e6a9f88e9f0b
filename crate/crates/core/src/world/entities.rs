use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CellRect, Pose2D};

/// The three robots of the team. The derived order (alice < bob < david) is
/// the intra-step acting order and the tie-break order for messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotId {
    Alice,
    Bob,
    David,
}

impl RobotId {
    pub const ALL: [RobotId; 3] = [RobotId::Alice, RobotId::Bob, RobotId::David];

    pub fn as_str(&self) -> &'static str {
        match self {
            RobotId::Alice => "alice",
            RobotId::Bob => "bob",
            RobotId::David => "david",
        }
    }

    /// The role each robot is built for.
    pub fn role(&self) -> Role {
        match self {
            RobotId::Alice => Role::MobileManipulation,
            RobotId::Bob => Role::Manipulation,
            RobotId::David => Role::Mobile,
        }
    }
}

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RobotId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alice" => Ok(RobotId::Alice),
            "bob" => Ok(RobotId::Bob),
            "david" => Ok(RobotId::David),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Mobile,
    Manipulation,
    MobileManipulation,
}

impl Role {
    pub fn is_mobile(&self) -> bool {
        matches!(self, Role::Mobile | Role::MobileManipulation)
    }

    pub fn can_manipulate(&self) -> bool {
        matches!(self, Role::Manipulation | Role::MobileManipulation)
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Role::Mobile => "mobile robot",
            Role::Manipulation => "manipulation robot",
            Role::MobileManipulation => "mobile manipulation robot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gripper {
    #[default]
    Empty,
    Holding(String),
}

impl Gripper {
    pub fn held(&self) -> Option<&str> {
        match self {
            Gripper::Empty => None,
            Gripper::Holding(id) => Some(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Robot {
    pub id: RobotId,
    pub role: Role,
    pub base_pose: Pose2D,
    #[serde(default)]
    pub gripper: Gripper,
    /// Maximum planar grasp distance from the base; present iff the robot
    /// can manipulate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reach_radius: Option<f64>,
}

impl Robot {
    pub fn is_mobile(&self) -> bool {
        self.role.is_mobile()
    }

    pub fn can_manipulate(&self) -> bool {
        self.role.can_manipulate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FurnitureKind {
    Table,
    Counter,
    Fridge,
    Cabinet,
    Drawer,
    Microwave,
    TrayStand,
}

impl FurnitureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FurnitureKind::Table => "table",
            FurnitureKind::Counter => "counter",
            FurnitureKind::Fridge => "fridge",
            FurnitureKind::Cabinet => "cabinet",
            FurnitureKind::Drawer => "drawer",
            FurnitureKind::Microwave => "microwave",
            FurnitureKind::TrayStand => "tray-stand",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Furniture {
    pub id: String,
    pub kind: FurnitureKind,
    pub footprint: Vec<CellRect>,
    pub openable: bool,
    #[serde(default)]
    pub is_open: bool,
    pub nav_targets: Vec<Pose2D>,
    #[serde(default)]
    pub surface_object_ids: Vec<String>,
    #[serde(default)]
    pub contained_object_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
    Pink,
    Green,
    Yellow,
    Purple,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Blue,
        Color::Pink,
        Color::Green,
        Color::Yellow,
        Color::Purple,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Pink => "pink",
            Color::Green => "green",
            Color::Yellow => "yellow",
            Color::Purple => "purple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// A named placement area on a piece of furniture: the tray, a coloured
/// panel or the cutting board. `contents` is ordered bottom to top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub id: String,
    pub furniture: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    pub center: Point2,
    pub half_extent: Point2,
    #[serde(default)]
    pub contents: Vec<String>,
}

impl Zone {
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        (x - self.center.x).abs() <= self.half_extent.x + 1e-9 && (y - self.center.y).abs() <= self.half_extent.y + 1e-9
    }

    pub fn center_pose(&self) -> Pose2D {
        Pose2D::at(self.center.x, self.center.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    OnFurniture(String),
    InFurniture(String),
    InGripper(RobotId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimObject {
    pub id: String,
    pub display_name: String,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    pub pose: Pose2D,
    pub support: Support,
    /// Set when the object rests in a named zone of its supporting furniture.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone: Option<String>,
}

/// Interaction thresholds shared by the whole scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Maximum base-to-footprint distance for opening furniture.
    pub open_radius: f64,
    /// Arrival tolerance on position, metres.
    pub pose_tolerance_xy: f64,
    /// Arrival tolerance on heading, radians.
    pub pose_tolerance_theta: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            open_radius: 1.0,
            pose_tolerance_xy: 0.10,
            pose_tolerance_theta: 0.17,
        }
    }
}

pub const DEFAULT_REACH_ALICE: f64 = 0.85;
pub const DEFAULT_REACH_BOB: f64 = 0.70;
