//! Extraction of the executable action from free-form model output.
//!
//! Only the last fenced block tagged `action` is executed (an untagged fence
//! is accepted when no tagged one exists). Everything before it is kept as
//! the thought. An optional fenced `message` block holding a JSON payload
//! replaces the payload of a `send(...)` action.

use thiserror::Error;

use crate::comms::{resolve_recipient, MessagePayload};
use crate::world::{Action, ActionKind, Pose2D, RobotId, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFailure {
    #[error("no fenced action block found")]
    NoActionBlock,
    #[error("the action block is empty")]
    EmptyBlock,
    #[error("`{0}` is not a known action")]
    UnknownAction(String),
    #[error("bad arguments for {action}: {detail}")]
    BadArguments { action: String, detail: String },
    #[error("{0} is not available to this robot")]
    RoleIllegal(String),
    #[error("unknown recipient `{0}`")]
    UnknownRecipient(String),
    #[error("message block is not a valid payload: {0}")]
    BadMessageBlock(String),
}

impl ParseFailure {
    pub fn code(&self) -> &'static str {
        match self {
            ParseFailure::NoActionBlock => "no_action_block",
            ParseFailure::EmptyBlock => "empty_block",
            ParseFailure::UnknownAction(_) => "unknown_action",
            ParseFailure::BadArguments { .. } => "bad_arguments",
            ParseFailure::RoleIllegal(_) => "role_illegal",
            ParseFailure::UnknownRecipient(_) => "unknown_recipient",
            ParseFailure::BadMessageBlock(_) => "bad_message_block",
        }
    }
}

struct Fence<'a> {
    tag: &'a str,
    body: &'a str,
    start: usize,
}

fn fences(text: &str) -> Vec<Fence<'_>> {
    let mut out = Vec::new();
    let mut rest = 0;
    while let Some(open) = text[rest..].find("```") {
        let open = rest + open;
        let after = open + 3;
        let line_end = text[after..].find('\n').map(|i| after + i).unwrap_or(text.len());
        let tag = text[after..line_end].trim();
        let body_start = (line_end + 1).min(text.len());
        let Some(close) = text[body_start..].find("```") else {
            break;
        };
        let close = body_start + close;
        out.push(Fence {
            tag,
            body: &text[body_start..close],
            start: open,
        });
        rest = close + 3;
    }
    out
}

/// Free text preceding the executed block.
pub fn extract_thought(raw: &str) -> String {
    let fs = fences(raw);
    let cut = fs
        .iter()
        .rev()
        .find(|f| f.tag.eq_ignore_ascii_case("action"))
        .or_else(|| fs.iter().rev().find(|f| f.tag.is_empty()))
        .map(|f| f.start)
        .unwrap_or(raw.len());
    raw[..cut].trim().to_string()
}

/// Parses the executable action for a robot of `role` within `roster`.
pub fn parse_action(raw: &str, role: Role, roster: &[RobotId]) -> Result<Action, ParseFailure> {
    let fs = fences(raw);
    let block = fs
        .iter()
        .rev()
        .find(|f| f.tag.eq_ignore_ascii_case("action"))
        .or_else(|| fs.iter().rev().find(|f| f.tag.is_empty()))
        .ok_or(ParseFailure::NoActionBlock)?;
    let line = block
        .body
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"))
        .ok_or(ParseFailure::EmptyBlock)?;
    let mut action = parse_call(line.trim_end_matches(';'), roster)?;
    if !role.allows(action.kind()) {
        return Err(ParseFailure::RoleIllegal(action.kind().keyword().to_string()));
    }
    if let Action::SendMessage { payload, .. } = &mut action {
        if let Some(msg) = fs.iter().rev().find(|f| f.tag.eq_ignore_ascii_case("message")) {
            *payload =
                serde_json::from_str(msg.body.trim()).map_err(|e| ParseFailure::BadMessageBlock(e.to_string()))?;
        }
    }
    Ok(action)
}

/// `name(args)` with the argument list split at top-level commas.
fn split_call(text: &str) -> Option<(&str, Vec<String>)> {
    let text = text.trim();
    let open = text.find('(')?;
    if !text.ends_with(')') {
        return None;
    }
    let name = text[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let inner = &text[open + 1..text.len() - 1];
    Some((name, split_args(inner)?))
}

fn split_args(inner: &str) -> Option<Vec<String>> {
    let mut args = Vec::new();
    let mut cur = String::new();
    let (mut depth, mut in_str, mut escaped) = (0i32, false, false);
    for ch in inner.chars() {
        if in_str {
            cur.push(ch);
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_str = false;
            }
            continue;
        }
        match ch {
            '"' => {
                in_str = true;
                cur.push(ch);
            }
            '(' | '[' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
                cur.push(ch);
            }
            ',' if depth == 0 => args.push(std::mem::take(&mut cur).trim().to_string()),
            c => cur.push(c),
        }
    }
    if in_str || depth != 0 {
        return None;
    }
    let last = cur.trim().to_string();
    if !last.is_empty() || !args.is_empty() {
        args.push(last);
    }
    Some(args)
}

fn unquote(text: &str) -> Option<String> {
    let inner = text.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                'n' => out.push('\n'),
                other => out.push(other),
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// Identifiers may be written bare or quoted.
fn ident(arg: &str) -> String {
    unquote(arg).unwrap_or_else(|| arg.trim().to_string())
}

fn bad(action: &str, detail: impl Into<String>) -> ParseFailure {
    ParseFailure::BadArguments {
        action: action.to_string(),
        detail: detail.into(),
    }
}

fn number(action: &str, arg: &str) -> Result<f64, ParseFailure> {
    let v: f64 = arg
        .trim()
        .parse()
        .map_err(|_| bad(action, format!("`{arg}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(action, "numbers must be finite"))
    }
}

fn arity(action: &str, args: &[String], allowed: &[usize]) -> Result<(), ParseFailure> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(bad(
            action,
            format!("expected {allowed:?} arguments, got {}", args.len()),
        ))
    }
}

fn parse_call(line: &str, roster: &[RobotId]) -> Result<Action, ParseFailure> {
    let (name, args) = split_call(line).ok_or_else(|| ParseFailure::UnknownAction(line.to_string()))?;
    let kind = ActionKind::ALL
        .into_iter()
        .find(|k| k.keyword() == name.to_ascii_lowercase())
        .ok_or_else(|| ParseFailure::UnknownAction(name.to_string()))?;
    let action = match kind {
        ActionKind::Navigate => {
            arity(name, &args, &[1, 2])?;
            let index = match args.get(1) {
                Some(a) => a
                    .trim()
                    .parse()
                    .map_err(|_| bad(name, format!("`{a}` is not a nav target index")))?,
                None => 0,
            };
            Action::Navigate {
                furniture: ident(&args[0]),
                index,
            }
        }
        ActionKind::Move => {
            arity(name, &args, &[2])?;
            Action::Move {
                dx: number(name, &args[0])?,
                dy: number(name, &args[1])?,
            }
        }
        ActionKind::Open => {
            arity(name, &args, &[1])?;
            Action::Open {
                furniture: ident(&args[0]),
            }
        }
        ActionKind::Pick => {
            arity(name, &args, &[1])?;
            Action::Pick {
                object: ident(&args[0]),
            }
        }
        ActionKind::Place => {
            arity(name, &args, &[2])?;
            Action::Place {
                object: ident(&args[0]),
                destination: ident(&args[1]),
            }
        }
        ActionKind::Wait => {
            arity(name, &args, &[0])?;
            Action::Wait
        }
        ActionKind::Send => {
            if args.len() < 2 {
                return Err(bad(name, "expected a recipient and a payload"));
            }
            let who = ident(&args[0]);
            let recipient = resolve_recipient(&who, roster).map_err(|_| ParseFailure::UnknownRecipient(who))?;
            // the payload is everything after the first comma
            let open = line.find('(').unwrap_or(0);
            let body = &line[open + 1..line.len() - 1];
            let rest = body.split_once(',').map(|(_, r)| r.trim()).unwrap_or_default();
            Action::SendMessage {
                recipient,
                payload: parse_payload(rest)?,
            }
        }
    };
    Ok(action)
}

fn parse_payload(text: &str) -> Result<MessagePayload, ParseFailure> {
    if let Some(t) = unquote(text) {
        return Ok(MessagePayload::FreeText { text: t });
    }
    let Some((name, args)) = split_call(text) else {
        return Ok(MessagePayload::FreeText { text: text.to_string() });
    };
    let list = |args: &[String]| args.iter().map(|a| ident(a)).filter(|a| !a.is_empty()).collect();
    let payload = match name {
        "explore_request" => MessagePayload::ExploreRequest {
            object_names: list(&args),
        },
        "delegated_explore" => MessagePayload::DelegatedExplore {
            furniture_ids: list(&args),
        },
        "transport_request" => {
            arity(name, &args, &[1, 2])?;
            MessagePayload::TransportRequest {
                object_name: ident(&args[0]),
                context_text: args.get(1).map(|a| ident(a)).unwrap_or_default(),
            }
        }
        "location_report" => {
            arity(name, &args, &[4, 5])?;
            let theta = match args.get(4) {
                Some(a) => number(name, a)?,
                None => 0.0,
            };
            MessagePayload::LocationReport {
                object_name: ident(&args[0]),
                furniture_id: ident(&args[1]),
                pose: Pose2D::new(number(name, &args[2])?, number(name, &args[3])?, theta),
            }
        }
        "status" => {
            arity(name, &args, &[1])?;
            MessagePayload::TaskStatusShare { text: ident(&args[0]) }
        }
        _ => MessagePayload::FreeText { text: text.to_string() },
    };
    Ok(payload)
}
