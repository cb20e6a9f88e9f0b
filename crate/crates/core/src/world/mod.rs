//! Ground-truth environment: map, furniture, objects, robots and the
//! deterministic transition applied by [`WorldState::execute`].

mod action;
mod entities;
pub mod grid;
mod pose;
mod state;

pub use action::{Action, ActionKind};
pub use entities::{
    Color, Furniture, FurnitureKind, Gripper, Point2, Robot, RobotId, Role, SimObject, Support, Thresholds, Zone,
    DEFAULT_REACH_ALICE, DEFAULT_REACH_BOB,
};
pub use grid::{plan_cells, plan_path, Cell, CellRect, Endpoint, GridMap, GridPath, PathCost, PathError};
pub use pose::{normalize_angle, Pose2D};
pub use state::{check_reach, Belief, Omniscient, ReachResult, WorldState, SURFACE_INSET};

pub(crate) use state::hex_digest;
