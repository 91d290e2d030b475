//! Interests-Rights-Power strategy taxonomy.
//!
//! Nine labels in four groups. Labels arrive through annotations (one label
//! per segment, several segments per turn); this module turns them into
//! per-dialogue usage distributions and builds the prompt used by external
//! annotators.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Dialogue;
use crate::error::{Error, Result};
use crate::prob::{smooth_normalize, SMOOTHING_EPSILON};

const DEFAULT_TAXONOMY: &str = include_str!("../data/irp_taxonomy.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrpLabel {
    Concession,
    Proposal,
    Interests,
    PositiveExpectations,
    Facts,
    Procedural,
    Power,
    Rights,
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IrpGroup {
    Cooperative,
    Neutral,
    Competitive,
    Residual,
}

impl IrpLabel {
    pub const ALL: [IrpLabel; 9] = [
        IrpLabel::Concession,
        IrpLabel::Proposal,
        IrpLabel::Interests,
        IrpLabel::PositiveExpectations,
        IrpLabel::Facts,
        IrpLabel::Procedural,
        IrpLabel::Power,
        IrpLabel::Rights,
        IrpLabel::Residual,
    ];

    pub fn group(self) -> IrpGroup {
        use IrpLabel::*;
        match self {
            Concession | Proposal | Interests | PositiveExpectations => IrpGroup::Cooperative,
            Facts | Procedural => IrpGroup::Neutral,
            Power | Rights => IrpGroup::Competitive,
            Residual => IrpGroup::Residual,
        }
    }

    pub fn name(self) -> &'static str {
        use IrpLabel::*;
        match self {
            Concession => "Concession",
            Proposal => "Proposal",
            Interests => "Interests",
            PositiveExpectations => "PositiveExpectations",
            Facts => "Facts",
            Procedural => "Procedural",
            Power => "Power",
            Rights => "Rights",
            Residual => "Residual",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for IrpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IrpLabel {
    type Err = Error;

    /// Exact, case-sensitive canonical names only.
    fn from_str(s: &str) -> Result<Self> {
        IrpLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Taxonomy(format!("unknown IRP label `{s}`")))
    }
}

impl fmt::Display for IrpGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IrpGroup::Cooperative => "Cooperative",
            IrpGroup::Neutral => "Neutral",
            IrpGroup::Competitive => "Competitive",
            IrpGroup::Residual => "Residual",
        };
        f.write_str(s)
    }
}

/// Smoothed proportions over the nine labels in [`IrpLabel::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrpDistribution {
    values: [f64; 9],
}

impl IrpDistribution {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a IrpLabel>) -> Result<Self> {
        let mut counts = [0.0; 9];
        for l in labels {
            counts[l.index()] += 1.0;
        }
        if counts.iter().all(|c| *c == 0.0) {
            return Err(Error::EmptyInput("no IRP segments".into()));
        }
        let p = smooth_normalize(&counts, SMOOTHING_EPSILON).expect("non-zero counts");
        Ok(IrpDistribution {
            values: p.try_into().expect("nine labels"),
        })
    }

    pub fn get(&self, label: IrpLabel) -> f64 {
        self.values[label.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Label usage over every annotated segment of the dialogue.
pub fn usage_distribution(dialogue: &Dialogue) -> Result<IrpDistribution> {
    let ann = dialogue
        .annotations
        .as_ref()
        .ok_or_else(|| Error::annotation(&dialogue.id, "dialogue has no annotations"))?;
    IrpDistribution::from_labels(ann.per_turn.iter().flat_map(|t| t.irp.iter()))
        .map_err(|_| Error::annotation(&dialogue.id, "dialogue has no IRP segments"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDefinition {
    pub label: IrpLabel,
    pub group: IrpGroup,
    pub definition: String,
    pub example: String,
    pub non_example: String,
}

/// Definitions for (ideally) all nine labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Taxonomy {
    definitions: Vec<LabelDefinition>,
}

impl Taxonomy {
    pub fn new(definitions: Vec<LabelDefinition>) -> Result<Self> {
        for (i, d) in definitions.iter().enumerate() {
            if d.group != d.label.group() {
                return Err(Error::Taxonomy(format!(
                    "{} belongs to {}, not {}",
                    d.label,
                    d.label.group(),
                    d.group
                )));
            }
            if definitions[..i].iter().any(|e| e.label == d.label) {
                return Err(Error::Taxonomy(format!("duplicate definition for {}", d.label)));
            }
        }
        Ok(Taxonomy { definitions })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let defs: Vec<LabelDefinition> = serde_json::from_str(json)?;
        Taxonomy::new(defs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn get(&self, label: IrpLabel) -> Option<&LabelDefinition> {
        self.definitions.iter().find(|d| d.label == label)
    }

    pub fn without(&self, label: IrpLabel) -> Taxonomy {
        Taxonomy {
            definitions: self.definitions.iter().filter(|d| d.label != label).cloned().collect(),
        }
    }

    /// Errors unless every label has a definition, an example and a non-example.
    pub fn check_complete(&self) -> Result<()> {
        for label in IrpLabel::ALL {
            let d = self
                .get(label)
                .ok_or_else(|| Error::Taxonomy(format!("missing definition for {label}")))?;
            for (field, value) in [
                ("definition", &d.definition),
                ("example", &d.example),
                ("non-example", &d.non_example),
            ] {
                if value.trim().is_empty() {
                    return Err(Error::Taxonomy(format!("{label} has an empty {field}")));
                }
            }
        }
        Ok(())
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Taxonomy::from_json(DEFAULT_TAXONOMY).expect("bundled taxonomy parses")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub text: String,
    pub label: IrpLabel,
}

/// One labeled utterance shown to the annotator as a worked example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub utterance: String,
    pub segments: Vec<Segment>,
}

/// Builds the utterance-level annotation prompt: definitions grouped by
/// strategy type, instructions with the expected JSON reply shape, optional
/// worked examples, then the conversation with ids `u1..uN`.
pub fn build_annotation_prompt(
    dialogue: &Dialogue,
    taxonomy: &Taxonomy,
    few_shot: &[FewShotExample],
) -> Result<String> {
    taxonomy.check_complete()?;
    let mut out = String::new();
    out.push_str("# IRP Strategy Definitions and Examples\n");
    for group in [
        IrpGroup::Cooperative,
        IrpGroup::Neutral,
        IrpGroup::Competitive,
        IrpGroup::Residual,
    ] {
        out.push_str(&format!("\n[{group} Strategies]\n"));
        for label in IrpLabel::ALL.into_iter().filter(|l| l.group() == group) {
            let d = taxonomy.get(label).expect("checked complete");
            out.push_str(&format!(
                "\n{}: {}\nExample: \"{}\"\nNon-example: \"{}\"\n",
                label.name().to_uppercase(),
                d.definition,
                d.example,
                d.non_example
            ));
        }
    }
    out.push_str("\n# Annotation Instructions\n");
    out.push_str(
        "Annotate the conversation below one utterance at a time. Split each utterance \
         into subject-verb segments and give every segment exactly one label from: ",
    );
    let names: Vec<&str> = IrpLabel::ALL.iter().map(|l| l.name()).collect();
    out.push_str(&names.join(", "));
    out.push_str(
        ".\nReply with a JSON array holding one object per utterance, in order:\n\
         [{\"id\": \"u1\", \"segments\": [{\"text\": \"...\", \"label\": \"...\"}]}]\n",
    );
    if !few_shot.is_empty() {
        out.push_str("\n# Examples\n");
        for ex in few_shot {
            let segs = serde_json::to_string(&ex.segments)?;
            out.push_str(&format!("\nUtterance: {}\nSegments: {segs}\n", ex.utterance));
        }
    }
    out.push_str("\n# Conversation\n");
    for turn in &dialogue.turns {
        out.push_str(&format!(
            "u{} ({}): {}\n",
            turn.index + 1,
            turn.speaker.title(),
            turn.text
        ));
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct ResponseItem {
    id: String,
    segments: Vec<Segment>,
}

/// Parses a reply in the format requested by [`build_annotation_prompt`]
/// into one label list per turn. Utterances missing from the reply get an
/// empty list.
pub fn parse_annotation_response(reply: &str, turns: usize) -> Result<Vec<Vec<IrpLabel>>> {
    let start = reply.find('[').ok_or_else(|| Error::Taxonomy("reply has no JSON array".into()))?;
    let end = reply.rfind(']').ok_or_else(|| Error::Taxonomy("reply has no JSON array".into()))?;
    let items: Vec<ResponseItem> = serde_json::from_str(&reply[start..=end])?;
    let mut out = vec![Vec::new(); turns];
    for item in items {
        let idx: usize = item
            .id
            .strip_prefix('u')
            .and_then(|n| n.parse().ok())
            .filter(|n| (1..=turns).contains(n))
            .ok_or_else(|| Error::Taxonomy(format!("bad utterance id `{}`", item.id)))?;
        out[idx - 1].extend(item.segments.iter().map(|s| s.label));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotationSet, Dialogue, Role, TurnAnnotation};

    fn dialogue_with(labels: Vec<Vec<IrpLabel>>) -> Dialogue {
        let texts: Vec<String> = (0..labels.len()).map(|i| format!("turn {i}")).collect();
        let mut d = Dialogue::from_texts("d1", Role::Buyer, &texts);
        d.annotations = Some(AnnotationSet {
            dialogue_id: "d1".into(),
            per_turn: labels
                .into_iter()
                .map(|irp| TurnAnnotation { anger: 0.0, irp })
                .collect(),
        });
        d
    }

    #[test]
    fn groups_follow_the_table() {
        assert_eq!(IrpLabel::Power.group(), IrpGroup::Competitive);
        assert_eq!(IrpLabel::Rights.group(), IrpGroup::Competitive);
        assert_eq!(IrpLabel::Facts.group(), IrpGroup::Neutral);
        assert_eq!(IrpLabel::Concession.group(), IrpGroup::Cooperative);
        assert_eq!(IrpLabel::Residual.group(), IrpGroup::Residual);
    }

    #[test]
    fn labels_round_trip_exactly() {
        for l in IrpLabel::ALL {
            let json = serde_json::to_string(&l).unwrap();
            assert_eq!(json, format!("\"{}\"", l.name()));
            assert_eq!(serde_json::from_str::<IrpLabel>(&json).unwrap(), l);
            assert_eq!(l.name().parse::<IrpLabel>().unwrap(), l);
        }
        assert!("power".parse::<IrpLabel>().is_err());
    }

    #[test]
    fn usage_of_four_segments() {
        use IrpLabel::*;
        let d = dialogue_with(vec![vec![Proposal, Proposal], vec![Power, Residual]]);
        let dist = usage_distribution(&d).unwrap();
        assert!((dist.get(Proposal) - 0.5).abs() < 1e-5);
        assert!((dist.get(Power) - 0.25).abs() < 1e-5);
        assert!((dist.get(Residual) - 0.25).abs() < 1e-5);
        assert!(dist.get(Facts) < 1e-5);
        assert!((dist.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_residual_is_point_mass() {
        let d = dialogue_with(vec![vec![IrpLabel::Residual], vec![IrpLabel::Residual]]);
        let dist = usage_distribution(&d).unwrap();
        assert!((dist.get(IrpLabel::Residual) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_segments_or_unannotated_is_error() {
        let d = dialogue_with(vec![vec![], vec![]]);
        assert!(usage_distribution(&d).is_err());
        let plain = Dialogue::from_texts("d2", Role::Buyer, &["a".into(), "b".into()]);
        assert!(usage_distribution(&plain).is_err());
    }

    #[test]
    fn default_taxonomy_is_complete() {
        Taxonomy::default().check_complete().unwrap();
    }

    #[test]
    fn prompt_lists_utterance_ids() {
        let d = Dialogue::from_texts("d", Role::Buyer, &["Hello there.".into(), "Hi.".into()]);
        let p = build_annotation_prompt(&d, &Taxonomy::default(), &[]).unwrap();
        assert!(p.contains("u1 (Buyer): Hello there."));
        assert!(p.contains("u2 (Seller): Hi."));
        assert!(!p.contains("# Examples"));
        let again = build_annotation_prompt(&d, &Taxonomy::default(), &[]).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn prompt_includes_few_shot() {
        let d = Dialogue::from_texts("d", Role::Buyer, &["a".into(), "b".into()]);
        let shots = [FewShotExample {
            utterance: "Ok fine, half refund.".into(),
            segments: vec![Segment {
                text: "Ok fine, half refund.".into(),
                label: IrpLabel::Concession,
            }],
        }];
        let p = build_annotation_prompt(&d, &Taxonomy::default(), &shots).unwrap();
        assert!(p.contains("# Examples"));
        assert!(p.contains("\"label\":\"Concession\""));
    }

    #[test]
    fn missing_power_definition_rejected() {
        let d = Dialogue::from_texts("d", Role::Buyer, &["a".into(), "b".into()]);
        let tax = Taxonomy::default().without(IrpLabel::Power);
        assert!(matches!(build_annotation_prompt(&d, &tax, &[]), Err(Error::Taxonomy(_))));
    }

    #[test]
    fn wrong_group_rejected() {
        let mut defs = Taxonomy::default().definitions;
        defs[0].group = IrpGroup::Neutral;
        assert!(Taxonomy::new(defs).is_err());
    }

    #[test]
    fn parse_reply() {
        let reply = r#"Here you go:
[{"id": "u2", "segments": [{"text": "x", "label": "Power"}, {"text": "y", "label": "Facts"}]},
 {"id": "u1", "segments": [{"text": "z", "label": "Procedural"}]}]"#;
        let labels = parse_annotation_response(reply, 3).unwrap();
        assert_eq!(labels[0], vec![IrpLabel::Procedural]);
        assert_eq!(labels[1], vec![IrpLabel::Power, IrpLabel::Facts]);
        assert!(labels[2].is_empty());
        assert!(parse_annotation_response(r#"[{"id": "u9", "segments": []}]"#, 3).is_err());
    }
}
