use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Observation;
use crate::memory::RenderOptions;
use crate::world::{ActionKind, Robot, RobotId};

/// Headings of the dynamic prompt, in order.
pub const SECTION_HEADINGS: [&str; 7] = [
    "## Task",
    "## Scene graph",
    "## Robot status",
    "## New messages",
    "## Memory",
    "## Available actions",
    "## Response format",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
}

/// Fixed instructions for one robot; identical at every step of an episode.
pub fn system_prompt(robot: &Robot, roster: &[RobotId]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "You are {}, one robot in a household team. You are a {}.",
        robot.id,
        robot.role.describe()
    );
    let _ = writeln!(s, "Team members:");
    for id in roster {
        let _ = writeln!(s, "- {id}: {}", id.role().describe());
    }
    s.push_str(
        "There is no central controller. You only know what is in your scene graph, \
your own status, your memory and the messages sent to you. Robots act one after \
another in a fixed order and each robot executes exactly one action per step.\n",
    );
    s.push_str(
        "Objects inside closed furniture are invisible until the furniture is opened. \
Use messages to ask teammates for help or to share what you found. Choose wait() \
when there is nothing useful to do, in particular once the task is complete.\n",
    );
    s
}

fn robot_status(robot: &Robot, step: u32) -> String {
    let p = robot.base_pose;
    let gripper = match (robot.can_manipulate(), robot.gripper.held()) {
        (false, _) => "no arm".to_string(),
        (true, None) => "empty".to_string(),
        (true, Some(id)) => format!("holding {id}"),
    };
    let reach = match robot.reach_radius {
        Some(r) => format!("{r:.2} m"),
        None => "none".to_string(),
    };
    let base = if robot.is_mobile() { "mobile" } else { "fixed" };
    format!(
        "name: {}\nrole: {}\ncurrent step: {step}\nbase ({base}) pose: ({:.2}, {:.2}, {:.2})\ngripper: {gripper}\nreach radius: {reach}\n",
        robot.id,
        robot.role.describe(),
        p.x,
        p.y,
        p.theta
    )
}

fn action_list(robot: &Robot, roster: &[RobotId]) -> String {
    let mut s = String::new();
    for kind in robot.role.legal_actions() {
        let _ = writeln!(s, "- {}: {}", kind.syntax(), kind.description());
        if kind == ActionKind::Send {
            let others: Vec<&str> = roster.iter().filter(|r| **r != robot.id).map(|r| r.as_str()).collect();
            let _ = writeln!(s, "  recipients: {}", others.join(", "));
            s.push_str(
                "  payloads: explore_request(<object>, ...), transport_request(<object>, \"<context>\"), \
delegated_explore(<furniture>, ...), location_report(<object>, <furniture>, <x>, <y>), \
status(\"<text>\") or \"<free text>\"\n",
            );
        }
    }
    s
}

const RESPONSE_FORMAT: &str = "First think step by step in plain text about what to do next. \
Then give exactly one action in a fenced block tagged action, for example:\n\
```action\nwait()\n```\n\
Only the last action block is executed.\n";

/// Renders the observation of one robot at one step. Equal inputs give
/// byte-identical output.
pub fn serialize_observation(obs: &Observation<'_>) -> PromptBundle {
    let messages = if obs.new_messages.is_empty() {
        "(none)\n".to_string()
    } else {
        obs.new_messages.iter().map(|m| format!("- {}\n", m.render())).collect()
    };
    let memory = obs.memory.render_with(RenderOptions {
        omit_feedback: obs.ablations.no_feedback,
        latest_only: obs.ablations.no_history,
    });
    let bodies = [
        format!("{}\n", obs.task_text.trim_end()),
        obs.graph.render(),
        robot_status(obs.robot, obs.step),
        messages,
        memory,
        action_list(obs.robot, obs.roster),
        RESPONSE_FORMAT.to_string(),
    ];
    let mut user_text = String::new();
    for (i, (heading, body)) in SECTION_HEADINGS.iter().zip(bodies).enumerate() {
        if i > 0 {
            user_text.push('\n');
        }
        user_text.push_str(heading);
        user_text.push('\n');
        user_text.push_str(&body);
    }
    PromptBundle {
        system_text: system_prompt(obs.robot, obs.roster),
        user_text,
    }
}
