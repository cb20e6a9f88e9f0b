//! Per-robot histories of actions, feedback and received messages.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comms::Message;
use crate::feedback::{render_feedback, Feedback};
use crate::world::Action;

pub const LATEST_TAG: &str = "[LATEST]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MemoryEntry {
    Action(u32, Action),
    Feedback(u32, Feedback),
    Message(u32, Message),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemoryError {
    #[error("entry for step {got} appended after step {last}")]
    NonMonotoneStep { last: u32, got: u32 },
}

/// Rendering variants for the ablation switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    /// Omit the feedback section entirely.
    pub omit_feedback: bool,
    /// Keep only the `[LATEST]` entries.
    pub latest_only: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MemoryBuffer {
    actions: Vec<(u32, Action)>,
    feedback: Vec<(u32, Feedback)>,
    messages: Vec<(u32, Message)>,
    capacity: Option<usize>,
}

fn push_bounded<T>(log: &mut Vec<(u32, T)>, step: u32, item: T, cap: Option<usize>) -> Result<(), MemoryError> {
    if let Some((last, _)) = log.last() {
        if step < *last {
            return Err(MemoryError::NonMonotoneStep { last: *last, got: step });
        }
    }
    log.push((step, item));
    if let Some(cap) = cap {
        if log.len() > cap {
            let excess = log.len() - cap;
            log.drain(..excess);
        }
    }
    Ok(())
}

impl MemoryBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity: Some(capacity),
            ..Self::default()
        }
    }

    pub fn append(&mut self, entry: MemoryEntry) -> Result<(), MemoryError> {
        let cap = self.capacity;
        match entry {
            MemoryEntry::Action(step, a) => push_bounded(&mut self.actions, step, a, cap),
            MemoryEntry::Feedback(step, f) => push_bounded(&mut self.feedback, step, f, cap),
            MemoryEntry::Message(step, m) => push_bounded(&mut self.messages, step, m, cap),
        }
    }

    pub fn actions(&self) -> &[(u32, Action)] {
        &self.actions
    }

    pub fn feedback(&self) -> &[(u32, Feedback)] {
        &self.feedback
    }

    pub fn messages(&self) -> &[(u32, Message)] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.actions.len() + self.feedback.len() + self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn latest_feedback(&self) -> Option<&Feedback> {
        self.feedback.last().map(|(_, f)| f)
    }

    /// Feedback recorded at the step of the most recent action.
    pub fn last_turn_feedback(&self) -> Vec<&Feedback> {
        let Some((step, _)) = self.actions.last() else {
            return Vec::new();
        };
        self.feedback
            .iter()
            .filter(|(s, _)| s == step)
            .map(|(_, f)| f)
            .collect()
    }

    pub fn render(&self) -> String {
        self.render_with(RenderOptions::default())
    }

    /// Three chronological sections. The single newest feedback and message
    /// entries carry the `[LATEST]` tag; actions are never tagged.
    pub fn render_with(&self, opts: RenderOptions) -> String {
        let mut out = String::new();
        out.push_str("Action history:\n");
        if opts.latest_only {
            out.push_str("(omitted)\n");
        } else {
            section(&mut out, &self.actions, false, false, |a| a.to_string());
        }
        if !opts.omit_feedback {
            out.push_str("Feedback history:\n");
            section(&mut out, &self.feedback, true, opts.latest_only, render_feedback);
        }
        out.push_str("Message history:\n");
        section(&mut out, &self.messages, true, opts.latest_only, Message::render);
        out
    }
}

fn section<T>(out: &mut String, log: &[(u32, T)], tag_latest: bool, latest_only: bool, render: impl Fn(&T) -> String) {
    if log.is_empty() {
        out.push_str("(none)\n");
        return;
    }
    let last = log.len() - 1;
    for (i, (step, item)) in log.iter().enumerate() {
        let latest = tag_latest && i == last;
        if latest_only && !latest {
            continue;
        }
        let tag = if latest { "[LATEST] " } else { "" };
        out.push_str(&format!("- {tag}step {step}: {}\n", render(item)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fb(step: u32) -> MemoryEntry {
        MemoryEntry::Feedback(
            step,
            Feedback::MoveSuccess {
                dx: step as f64,
                dy: 0.0,
            },
        )
    }

    #[test]
    fn append_to_empty() {
        let mut m = MemoryBuffer::new();
        m.append(fb(0)).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn rejects_step_regression() {
        let mut m = MemoryBuffer::new();
        m.append(fb(5)).unwrap();
        assert_eq!(m.append(fb(2)), Err(MemoryError::NonMonotoneStep { last: 5, got: 2 }));
        // equal steps are allowed
        m.append(fb(5)).unwrap();
    }

    #[test]
    fn capacity_evicts_oldest() {
        let mut m = MemoryBuffer::with_capacity(3);
        for s in 0..4 {
            m.append(fb(s)).unwrap();
        }
        let steps: Vec<u32> = m.feedback().iter().map(|(s, _)| *s).collect();
        assert_eq!(steps, vec![1, 2, 3]);
    }

    #[test]
    fn empty_sections_render_none() {
        let text = MemoryBuffer::new().render();
        assert_eq!(text.matches("(none)").count(), 3);
        assert!(!text.contains(LATEST_TAG));
    }

    #[test]
    fn only_newest_feedback_is_tagged() {
        let mut m = MemoryBuffer::new();
        m.append(fb(1)).unwrap();
        m.append(fb(2)).unwrap();
        m.append(MemoryEntry::Action(2, Action::Wait)).unwrap();
        let text = m.render();
        assert_eq!(text.matches(LATEST_TAG).count(), 1);
        let tagged = text.lines().find(|l| l.contains(LATEST_TAG)).unwrap();
        assert!(tagged.contains("step 2"));
        assert_eq!(text, m.render());
    }

    #[test]
    fn latest_only_hides_older_entries() {
        let mut m = MemoryBuffer::new();
        m.append(fb(1)).unwrap();
        m.append(fb(2)).unwrap();
        m.append(MemoryEntry::Action(2, Action::Wait)).unwrap();
        let text = m.render_with(RenderOptions {
            latest_only: true,
            ..Default::default()
        });
        let entries: Vec<&str> = text.lines().filter(|l| l.starts_with("- ")).collect();
        assert_eq!(entries.len(), 1);
        assert!(entries[0].starts_with("- [LATEST]"));
    }

    proptest! {
        #[test]
        fn capacity_keeps_latest_in_order(cap in 1usize..6, n in 0u32..15) {
            let mut m = MemoryBuffer::with_capacity(cap);
            for s in 0..n {
                m.append(fb(s)).unwrap();
            }
            let steps: Vec<u32> = m.feedback().iter().map(|(s, _)| *s).collect();
            let expect: Vec<u32> = (n.saturating_sub(cap as u32)..n).collect();
            prop_assert_eq!(steps, expect);
        }

        #[test]
        fn prefix_renders_are_prefix_consistent(k in 0usize..10, n in 0usize..10) {
            let entries: Vec<MemoryEntry> = (0..n as u32)
                .flat_map(|s| [MemoryEntry::Action(s, Action::Wait), fb(s)])
                .collect();
            let k = k.min(entries.len());
            let mut full = MemoryBuffer::new();
            let mut prefix = MemoryBuffer::new();
            for (i, e) in entries.into_iter().enumerate() {
                if i < k {
                    prefix.append(e.clone()).unwrap();
                }
                full.append(e).unwrap();
            }
            let strip = |t: String| -> Vec<String> {
                t.replace("[LATEST] ", "").lines().map(str::to_string).collect()
            };
            let (p, f) = (strip(prefix.render()), strip(full.render()));
            // per section, the prefix entries appear first and in order
            for header in ["Action history:", "Feedback history:", "Message history:"] {
                let grab = |lines: &[String]| -> Vec<String> {
                    lines.iter()
                        .skip_while(|l| l.as_str() != header)
                        .skip(1)
                        .take_while(|l| l.starts_with("- "))
                        .cloned()
                        .collect()
                };
                let (ps, fs) = (grab(&p), grab(&f));
                prop_assert!(fs.starts_with(&ps));
            }
        }
    }
}
