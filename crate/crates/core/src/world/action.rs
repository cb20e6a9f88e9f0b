use std::fmt;

use serde::{Deserialize, Serialize};

use super::{RobotId, Role};
use crate::comms::MessagePayload;

/// One atomic robot command, executed within a single temporal step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Navigate {
        furniture: String,
        index: usize,
    },
    Move {
        dx: f64,
        dy: f64,
    },
    Open {
        furniture: String,
    },
    Pick {
        object: String,
    },
    Place {
        object: String,
        destination: String,
    },
    Wait,
    SendMessage {
        recipient: RobotId,
        payload: MessagePayload,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Navigate,
    Move,
    Open,
    Pick,
    Place,
    Wait,
    Send,
}

impl ActionKind {
    pub const ALL: [ActionKind; 7] = [
        ActionKind::Navigate,
        ActionKind::Move,
        ActionKind::Open,
        ActionKind::Pick,
        ActionKind::Place,
        ActionKind::Wait,
        ActionKind::Send,
    ];

    pub fn keyword(&self) -> &'static str {
        match self {
            ActionKind::Navigate => "navigate",
            ActionKind::Move => "move",
            ActionKind::Open => "open",
            ActionKind::Pick => "pick",
            ActionKind::Place => "place",
            ActionKind::Wait => "wait",
            ActionKind::Send => "send",
        }
    }

    /// Argument syntax shown to the policy.
    pub fn syntax(&self) -> &'static str {
        match self {
            ActionKind::Navigate => "navigate(<furniture>[, <nav_target_index>])",
            ActionKind::Move => "move(<dx>, <dy>)",
            ActionKind::Open => "open(<furniture>)",
            ActionKind::Pick => "pick(<object>)",
            ActionKind::Place => "place(<object>, <furniture_or_zone>)",
            ActionKind::Wait => "wait()",
            ActionKind::Send => "send(<recipient>, <payload_or_text>)",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ActionKind::Navigate => {
                "drive the base to a navigation target of a piece of furniture (index defaults to 0)"
            }
            ActionKind::Move => "shift the base by dx, dy metres along the map x and y axes",
            ActionKind::Open => "open a closed piece of furniture within reach of the base",
            ActionKind::Pick => "grasp an object known in the scene graph",
            ActionKind::Place => {
                "put the held object on a furniture surface, into open furniture, or onto a named zone"
            }
            ActionKind::Wait => "do nothing this step",
            ActionKind::Send => "send a message to a teammate",
        }
    }
}

impl Role {
    pub fn allows(&self, kind: ActionKind) -> bool {
        use ActionKind::*;
        match self {
            Role::Mobile => matches!(kind, Navigate | Move | Wait | Send),
            Role::Manipulation => matches!(kind, Pick | Place | Wait | Send),
            Role::MobileManipulation => true,
        }
    }

    pub fn legal_actions(&self) -> Vec<ActionKind> {
        ActionKind::ALL.into_iter().filter(|k| self.allows(*k)).collect()
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Navigate { .. } => ActionKind::Navigate,
            Action::Move { .. } => ActionKind::Move,
            Action::Open { .. } => ActionKind::Open,
            Action::Pick { .. } => ActionKind::Pick,
            Action::Place { .. } => ActionKind::Place,
            Action::Wait => ActionKind::Wait,
            Action::SendMessage { .. } => ActionKind::Send,
        }
    }

    pub fn is_wait(&self) -> bool {
        matches!(self, Action::Wait)
    }
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for MessagePayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessagePayload::ExploreRequest { object_names } => {
                write!(f, "explore_request({})", object_names.join(", "))
            }
            MessagePayload::TransportRequest {
                object_name,
                context_text,
            } => write!(f, "transport_request({object_name}, {})", quote(context_text)),
            MessagePayload::DelegatedExplore { furniture_ids } => {
                write!(f, "delegated_explore({})", furniture_ids.join(", "))
            }
            MessagePayload::LocationReport {
                object_name,
                pose,
                furniture_id,
            } => write!(
                f,
                "location_report({object_name}, {furniture_id}, {}, {}, {})",
                pose.x, pose.y, pose.theta
            ),
            MessagePayload::TaskStatusShare { text } => write!(f, "status({})", quote(text)),
            MessagePayload::FreeText { text } => f.write_str(&quote(text)),
        }
    }
}

/// Canonical call syntax; `parse_action` reads it back to an equal action.
impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Navigate { furniture, index } => write!(f, "navigate({furniture}, {index})"),
            Action::Move { dx, dy } => write!(f, "move({dx}, {dy})"),
            Action::Open { furniture } => write!(f, "open({furniture})"),
            Action::Pick { object } => write!(f, "pick({object})"),
            Action::Place { object, destination } => write!(f, "place({object}, {destination})"),
            Action::Wait => f.write_str("wait()"),
            Action::SendMessage { recipient, payload } => write!(f, "send({recipient}, {payload})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_filters_match_team_capabilities() {
        assert_eq!(
            Role::Mobile.legal_actions(),
            vec![
                ActionKind::Navigate,
                ActionKind::Move,
                ActionKind::Wait,
                ActionKind::Send
            ]
        );
        assert_eq!(
            Role::Manipulation.legal_actions(),
            vec![ActionKind::Pick, ActionKind::Place, ActionKind::Wait, ActionKind::Send]
        );
        assert_eq!(Role::MobileManipulation.legal_actions().len(), 7);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Action::Move { dx: 0.2, dy: -0.1 }.to_string(), "move(0.2, -0.1)");
        assert_eq!(Action::Wait.to_string(), "wait()");
        let send = Action::SendMessage {
            recipient: RobotId::Alice,
            payload: MessagePayload::FreeText {
                text: "say \"hi\"".into(),
            },
        };
        assert_eq!(send.to_string(), r#"send(alice, "say \"hi\"")"#);
    }
}
