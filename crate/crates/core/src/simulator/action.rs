//! Reading protocol actions out of raw agent replies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::NegotiationConfig;
use crate::error::{Error, Result};

pub const SUBMISSION_TOKEN: &str = "SUBMISSION:";
pub const ACCEPT_TOKEN: &str = "ACCEPT-DEAL";
pub const WALK_AWAY_TOKEN: &str = "WALK-AWAY";

/// issue code -> canonical option.
pub type Submission = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentAction {
    Message { text: String },
    Submission {
        bindings: Submission,
        /// Text before the submission line, if any.
        commentary: Option<String>,
    },
    AcceptDeal,
    WalkAway,
}

/// Byte offset of the first line that starts (after indentation) with the
/// submission token.
fn submission_start(raw: &str) -> Option<usize> {
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let indent = line.len() - line.trim_start().len();
        if line[indent..].starts_with(SUBMISSION_TOKEN) {
            return Some(offset + indent);
        }
        offset += line.len();
    }
    None
}

/// Classifies a reply. A malformed submission is a protocol error; the
/// caller decides whether that aborts the session or degrades to a message.
pub fn parse_action(raw: &str, config: &NegotiationConfig) -> Result<AgentAction> {
    let text = raw.trim();
    if text.is_empty() {
        return Err(Error::Protocol("empty reply".into()));
    }
    if text == ACCEPT_TOKEN {
        return Ok(AgentAction::AcceptDeal);
    }
    if text == WALK_AWAY_TOKEN {
        return Ok(AgentAction::WalkAway);
    }
    let Some(start) = submission_start(text) else {
        return Ok(AgentAction::Message { text: text.to_string() });
    };
    let commentary = text[..start].trim();
    let body = text[start + SUBMISSION_TOKEN.len()..].trim();
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| Error::Protocol(format!("submission is not a JSON object: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Protocol("submission is not a JSON object".into()))?;
    let mut bindings = Submission::new();
    for (issue, option) in obj {
        if !config.issues.contains(issue) {
            return Err(Error::Protocol(format!("unknown issue `{issue}` in submission")));
        }
        let option = option
            .as_str()
            .ok_or_else(|| Error::Protocol(format!("option for `{issue}` is not a string")))?;
        let canonical = config
            .canonical_option(issue, option)
            .ok_or_else(|| Error::Protocol(format!("`{option}` is not an option for `{issue}`")))?;
        bindings.insert(issue.clone(), canonical.to_string());
    }
    if let Some(missing) = config.issues.iter().find(|i| !bindings.contains_key(*i)) {
        return Err(Error::Protocol(format!("submission leaves `{missing}` open")));
    }
    Ok(AgentAction::Submission {
        bindings,
        commentary: (!commentary.is_empty()).then(|| commentary.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NegotiationConfig {
        NegotiationConfig::default()
    }

    #[test]
    fn plain_tokens() {
        assert_eq!(parse_action("ACCEPT-DEAL", &cfg()).unwrap(), AgentAction::AcceptDeal);
        assert_eq!(parse_action("  WALK-AWAY\n", &cfg()).unwrap(), AgentAction::WalkAway);
        // tokens are case-sensitive and exact
        assert!(matches!(parse_action("accept-deal", &cfg()).unwrap(), AgentAction::Message { .. }));
        assert!(matches!(parse_action("ACCEPT-DEAL!", &cfg()).unwrap(), AgentAction::Message { .. }));
    }

    #[test]
    fn message_default() {
        assert_eq!(
            parse_action("I want a full refund.", &cfg()).unwrap(),
            AgentAction::Message { text: "I want a full refund.".into() }
        );
    }

    #[test]
    fn bare_submission() {
        let a = parse_action(
            r#"SUBMISSION: {"REF": "partial", "SNR": "remove", "BNR": "remove", "SAP": "not apologize", "BAP": "not apologize"}"#,
            &cfg(),
        )
        .unwrap();
        let AgentAction::Submission { bindings, commentary } = a else { panic!() };
        assert_eq!(bindings["REF"], "partial");
        assert_eq!(bindings["SAP"], "not apologize");
        assert_eq!(commentary, None);
    }

    #[test]
    fn submission_after_commentary_spanning_lines() {
        let raw = "Fine, that works for me.\nSUBMISSION: {\"REF\": \"None\", \"SNR\": \"remove\", \"BNR\":\n \"remove\", \"SAP\": \"apologize\", \"BAP\": \"not apologize\"}";
        let AgentAction::Submission { bindings, commentary } = parse_action(raw, &cfg()).unwrap() else {
            panic!()
        };
        assert_eq!(bindings["REF"], "none");
        assert_eq!(commentary.as_deref(), Some("Fine, that works for me."));
    }

    #[test]
    fn malformed_submissions_are_protocol_errors() {
        let c = cfg();
        for raw in [
            "SUBMISSION: {not json}",
            "SUBMISSION: [1, 2]",
            r#"SUBMISSION: {"REF": "full"}"#,
            r#"SUBMISSION: {"REF": "double", "SNR": "remove", "BNR": "remove", "SAP": "apologize", "BAP": "apologize"}"#,
            r#"SUBMISSION: {"XYZ": "a", "REF": "full", "SNR": "remove", "BNR": "remove", "SAP": "apologize", "BAP": "apologize"}"#,
            r#"SUBMISSION: {"REF": 1, "SNR": "remove", "BNR": "remove", "SAP": "apologize", "BAP": "apologize"}"#,
        ] {
            assert!(matches!(parse_action(raw, &c), Err(Error::Protocol(_))), "{raw}");
        }
        assert!(parse_action("   ", &c).is_err());
    }

    #[test]
    fn token_mid_line_is_not_a_submission() {
        let a = parse_action("I will send a SUBMISSION: soon", &cfg()).unwrap();
        assert!(matches!(a, AgentAction::Message { .. }));
    }
}
