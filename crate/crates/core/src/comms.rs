//! Typed point-to-point messages between robots.
//!
//! Delivery is tied to the fixed acting order alice → bob → david: a message
//! is drained at the start of the recipient's next turn, which is later in
//! the same step when the recipient acts after the sender, otherwise in the
//! following step.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Pose2D, RobotId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MessagePayload {
    /// Find these task objects (tabletop robot to mobile manipulator).
    ExploreRequest {
        object_names: Vec<String>,
    },
    /// Bring an out-of-reach object within reach (tabletop robot to mobile
    /// manipulator).
    TransportRequest {
        object_name: String,
        context_text: String,
    },
    /// Search these pieces of furniture (mobile manipulator to explorer).
    DelegatedExplore {
        furniture_ids: Vec<String>,
    },
    /// Where an object was found.
    LocationReport {
        object_name: String,
        pose: Pose2D,
        furniture_id: String,
    },
    TaskStatusShare {
        text: String,
    },
    FreeText {
        text: String,
    },
}

impl MessagePayload {
    /// Whether `sender` plays the role this payload expects.
    pub fn allowed_sender(&self, sender: RobotId) -> bool {
        match self {
            MessagePayload::ExploreRequest { .. } | MessagePayload::TransportRequest { .. } => sender == RobotId::Bob,
            MessagePayload::DelegatedExplore { .. } => sender == RobotId::Alice,
            MessagePayload::LocationReport { .. } => {
                matches!(sender, RobotId::David | RobotId::Alice)
            }
            MessagePayload::TaskStatusShare { .. } | MessagePayload::FreeText { .. } => true,
        }
    }

    /// Natural-language rendering used in prompts.
    pub fn render(&self) -> String {
        match self {
            MessagePayload::ExploreRequest { object_names } => format!(
                "please explore the environment to locate {} and bring them to my table",
                object_names.join(", ")
            ),
            MessagePayload::TransportRequest {
                object_name,
                context_text,
            } => format!("please transport {object_name} within my reach ({context_text})"),
            MessagePayload::DelegatedExplore { furniture_ids } => format!(
                "please explore {} and report the task objects you find",
                furniture_ids.join(", ")
            ),
            MessagePayload::LocationReport {
                object_name,
                pose,
                furniture_id,
            } => format!(
                "{object_name} is at {furniture_id}, position ({:.2}, {:.2})",
                pose.x, pose.y
            ),
            MessagePayload::TaskStatusShare { text } => format!("status update: {text}"),
            MessagePayload::FreeText { text } => text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: RobotId,
    pub recipient: RobotId,
    pub sent_step: u32,
    pub payload: MessagePayload,
    /// Set when the sender is outside the payload's protocol role.
    #[serde(default)]
    pub protocol_warning: bool,
}

impl Message {
    pub fn new(sender: RobotId, recipient: RobotId, sent_step: u32, payload: MessagePayload) -> Self {
        let protocol_warning = !payload.allowed_sender(sender);
        Self {
            sender,
            recipient,
            sent_step,
            payload,
            protocol_warning,
        }
    }

    /// `From <sender> at step <t>: <payload>`
    pub fn render(&self) -> String {
        format!(
            "From {} at step {}: {}",
            self.sender,
            self.sent_step,
            self.payload.render()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommsError {
    #[error("unknown recipient `{0}`")]
    UnknownRecipient(String),
    #[error("{0} cannot message itself")]
    SelfAddressed(RobotId),
}

/// Resolves a recipient name against the active roster.
pub fn resolve_recipient(name: &str, roster: &[RobotId]) -> Result<RobotId, CommsError> {
    name.parse::<RobotId>()
        .ok()
        .filter(|id| roster.contains(id))
        .ok_or_else(|| CommsError::UnknownRecipient(name.to_string()))
}

#[derive(Debug, Clone, Default)]
pub struct MessageBus {
    roster: BTreeSet<RobotId>,
    inboxes: BTreeMap<RobotId, Vec<Message>>,
    sent: u64,
    drained: u64,
}

impl MessageBus {
    pub fn new(roster: impl IntoIterator<Item = RobotId>) -> Self {
        Self {
            roster: roster.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn send(&mut self, msg: Message) -> Result<(), CommsError> {
        if !self.roster.contains(&msg.recipient) {
            return Err(CommsError::UnknownRecipient(msg.recipient.to_string()));
        }
        if msg.sender == msg.recipient {
            return Err(CommsError::SelfAddressed(msg.sender));
        }
        self.sent += 1;
        self.inboxes.entry(msg.recipient).or_default().push(msg);
        Ok(())
    }

    /// Pending messages ordered by (sent_step, sender); the inbox is emptied.
    pub fn drain_inbox(&mut self, robot: RobotId) -> Vec<Message> {
        let mut msgs = self.inboxes.remove(&robot).unwrap_or_default();
        msgs.sort_by_key(|m| (m.sent_step, m.sender));
        self.drained += msgs.len() as u64;
        msgs
    }

    pub fn pending(&self) -> usize {
        self.inboxes.values().map(Vec::len).sum()
    }

    /// (sent, drained) counters.
    pub fn counters(&self) -> (u64, u64) {
        (self.sent, self.drained)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(t: &str) -> MessagePayload {
        MessagePayload::FreeText { text: t.into() }
    }

    #[test]
    fn empty_inbox_drains_empty() {
        let mut bus = MessageBus::new(RobotId::ALL);
        assert!(bus.drain_inbox(RobotId::Alice).is_empty());
    }

    #[test]
    fn same_step_ties_break_by_sender_order() {
        let mut bus = MessageBus::new(RobotId::ALL);
        bus.send(Message::new(RobotId::David, RobotId::Bob, 4, text("d")))
            .unwrap();
        bus.send(Message::new(RobotId::Alice, RobotId::Bob, 4, text("a")))
            .unwrap();
        let got = bus.drain_inbox(RobotId::Bob);
        assert_eq!(got[0].sender, RobotId::Alice);
        assert_eq!(got[1].sender, RobotId::David);
        assert!(bus.drain_inbox(RobotId::Bob).is_empty());
        assert_eq!(bus.counters(), (2, 2));
    }

    #[test]
    fn unknown_recipient_rejected() {
        let roster = RobotId::ALL;
        assert_eq!(
            resolve_recipient("carol", &roster),
            Err(CommsError::UnknownRecipient("carol".into()))
        );
        let mut bus = MessageBus::new([RobotId::Alice, RobotId::Bob]);
        assert!(matches!(
            bus.send(Message::new(RobotId::Bob, RobotId::David, 0, text("x"))),
            Err(CommsError::UnknownRecipient(_))
        ));
    }

    #[test]
    fn protocol_roles_flag_deviations() {
        let ok = Message::new(
            RobotId::Bob,
            RobotId::Alice,
            0,
            MessagePayload::ExploreRequest {
                object_names: vec!["apple".into()],
            },
        );
        assert!(!ok.protocol_warning);
        let odd = Message::new(
            RobotId::David,
            RobotId::Alice,
            0,
            MessagePayload::DelegatedExplore { furniture_ids: vec![] },
        );
        assert!(odd.protocol_warning);
    }

    #[test]
    fn rendered_with_fixed_template() {
        let m = Message::new(RobotId::Bob, RobotId::Alice, 3, text("hello"));
        assert_eq!(m.render(), "From bob at step 3: hello");
    }
}
