//! Desk-scale simulator and planning harness for a decentralized team of
//! three heterogeneous robots: a mobile explorer (`david`), a fixed tabletop
//! manipulator (`bob`) and a mobile manipulator (`alice`).
//!
//! The crate is organised bottom-up:
//!
//! * [`world`] holds the ground-truth environment, the action set and the
//!   deterministic state transition, including A* global path planning.
//! * [`feedback`] is the closed taxonomy of textual feedback returned by every
//!   executed action.
//! * [`scenegraph`], [`comms`] and [`memory`] make up each robot's local view:
//!   structured belief, typed messages and recency-tagged histories.
//! * [`policy`] turns an observation into one atomic action, either through a
//!   chat-completions backend or through a scripted oracle.
//! * [`tasks`] defines the three household tasks and their goal predicates.
//! * [`harness`] runs episodes, writes replayable logs and aggregates metrics.
//! * [`scenario`] is the on-disk scenario format and the shipped layouts.

pub mod comms;
pub mod feedback;
pub mod harness;
pub mod memory;
pub mod policy;
pub mod scenario;
pub mod scenegraph;
pub mod tasks;
pub mod world;

#[cfg(test)]
mod fixtures;

pub use comms::{Message, MessageBus, MessagePayload};
pub use feedback::Feedback;
pub use harness::{run_episode, EpisodeConfig, EpisodeResult};
pub use scenario::Scenario;
pub use scenegraph::SceneGraph;
pub use tasks::{evaluate, GoalReport, TaskSpec};
pub use world::{Action, Pose2D, RobotId, WorldState};
