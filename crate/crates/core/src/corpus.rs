//! Dialogue corpora: data model, JSON ingestion, annotation attachment and
//! outcome statistics.
//!
//! A corpus file holds one labelled list of dialogues. Every dialogue is a
//! strictly alternating buyer/seller turn sequence, optionally carrying the
//! personality profiles and issue weights of both parties, the negotiation
//! outcome, and per-turn annotations (anger intensity plus IRP labels).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::irp::IrpLabel;
use crate::personality::{IssueImportance, PersonalityProfile};
use crate::prob::{mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Buyer,
    Seller,
}

impl Role {
    pub const BOTH: [Role; 2] = [Role::Buyer, Role::Seller];

    pub fn other(self) -> Role {
        match self {
            Role::Buyer => Role::Seller,
            Role::Seller => Role::Buyer,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Buyer => "buyer",
            Role::Seller => "seller",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Role::Buyer => "Buyer",
            Role::Seller => "Seller",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buyer" => Ok(Role::Buyer),
            "seller" => Ok(Role::Seller),
            other => Err(Error::Schema(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    /// 0-based position in the dialogue.
    pub index: usize,
    pub speaker: Role,
    pub text: String,
    /// 1-based exchange number; one exchange is two consecutive turns.
    pub round: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Accepted,
    WalkedAway,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// Issue code to chosen option; present iff the deal was accepted.
    pub submission: Option<BTreeMap<String, String>>,
    pub deal_score: Option<BTreeMap<Role, f64>>,
    /// `|buyer - seller|` deal score, fixed at ingestion or simulation time.
    pub score_gap: Option<f64>,
}

impl Outcome {
    pub fn new(
        kind: OutcomeKind,
        submission: Option<BTreeMap<String, String>>,
        deal_score: Option<BTreeMap<Role, f64>>,
    ) -> Self {
        let score_gap = deal_score.as_ref().and_then(|s| {
            Some((s.get(&Role::Buyer)? - s.get(&Role::Seller)?).abs())
        });
        Outcome {
            kind,
            submission,
            deal_score,
            score_gap,
        }
    }

    pub fn walked_away() -> Self {
        Outcome::new(OutcomeKind::WalkedAway, None, None)
    }
}

/// Per-turn annotations for one dialogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub dialogue_id: String,
    #[serde(rename = "turns")]
    pub per_turn: Vec<TurnAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnAnnotation {
    /// Anger intensity in `[0, 1]`.
    pub anger: f64,
    /// One label per annotated segment of the turn.
    #[serde(default)]
    pub irp: Vec<IrpLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawDialogue", try_from = "RawDialogue")]
pub struct Dialogue {
    pub id: String,
    pub turns: Vec<Utterance>,
    pub personality: Option<BTreeMap<Role, PersonalityProfile>>,
    pub importance: Option<BTreeMap<Role, IssueImportance>>,
    pub outcome: Option<Outcome>,
    /// Label of the corpus the dialogue was loaded into.
    pub source: String,
    /// Free-form provenance (decoding parameters, seeds, backend names).
    pub metadata: BTreeMap<String, Value>,
    pub annotations: Option<AnnotationSet>,
}

impl Dialogue {
    /// Plain alternating dialogue starting with `first`, no extras attached.
    pub fn from_texts(id: &str, first: Role, texts: &[String]) -> Self {
        let mut speaker = first;
        let turns = texts
            .iter()
            .enumerate()
            .map(|(index, text)| {
                let u = Utterance {
                    index,
                    speaker,
                    text: text.clone(),
                    round: index / 2 + 1,
                };
                speaker = speaker.other();
                u
            })
            .collect();
        Dialogue {
            id: id.to_string(),
            turns,
            personality: None,
            importance: None,
            outcome: None,
            source: String::new(),
            metadata: BTreeMap::new(),
            annotations: None,
        }
    }

    /// Number of exchanges, `ceil(turns / 2)`.
    pub fn rounds(&self) -> usize {
        self.turns.len().div_ceil(2)
    }

    pub fn turns_by(&self, role: Role) -> impl Iterator<Item = &Utterance> {
        self.turns.iter().filter(move |u| u.speaker == role)
    }

    pub fn is_annotated(&self) -> bool {
        self.annotations.is_some()
    }

    /// Checks every structural invariant; the error names the dialogue.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::invariant(&self.id, reason));
        if self.id.trim().is_empty() {
            return Err(Error::invariant("<empty>", "dialogue id is empty"));
        }
        if self.turns.len() < 2 {
            return fail(format!("needs at least 2 turns, has {}", self.turns.len()));
        }
        for (i, u) in self.turns.iter().enumerate() {
            if u.index != i {
                return fail(format!("turn {i} carries index {}", u.index));
            }
            if u.round != i / 2 + 1 {
                return fail(format!("turn {i} carries round {}", u.round));
            }
            if u.text.trim().is_empty() {
                return fail(format!("turn {i} has empty text"));
            }
            if i > 0 && self.turns[i - 1].speaker == u.speaker {
                return fail(format!("turns {} and {i} are both by the {}", i - 1, u.speaker));
            }
        }
        if let Some(o) = &self.outcome {
            match (o.kind, &o.submission) {
                (OutcomeKind::Accepted, None) => {
                    return fail("accepted outcome without a submission".into())
                }
                (OutcomeKind::Accepted, Some(s)) if s.is_empty() => {
                    return fail("accepted outcome with an empty submission".into())
                }
                (OutcomeKind::WalkedAway | OutcomeKind::Exhausted, Some(_)) => {
                    return fail("submission present on a non-accepted outcome".into())
                }
                _ => {}
            }
        }
        if let Some(a) = &self.annotations {
            check_annotation(self, a)?;
        }
        Ok(())
    }
}

fn check_annotation(d: &Dialogue, a: &AnnotationSet) -> Result<()> {
    if a.dialogue_id != d.id {
        return Err(Error::annotation(
            &d.id,
            format!("annotation references `{}`", a.dialogue_id),
        ));
    }
    if a.per_turn.len() != d.turns.len() {
        return Err(Error::annotation(
            &d.id,
            format!("{} annotated turns for {} dialogue turns", a.per_turn.len(), d.turns.len()),
        ));
    }
    for (i, t) in a.per_turn.iter().enumerate() {
        if !(0.0..=1.0).contains(&t.anger) {
            return Err(Error::annotation(
                &d.id,
                format!("turn {i} anger {} outside [0, 1]", t.anger),
            ));
        }
    }
    Ok(())
}

/// A labelled, validated, immutable collection of dialogues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawCorpus", try_from = "RawCorpus")]
pub struct Corpus {
    label: String,
    dialogues: Vec<Dialogue>,
}

impl Corpus {
    pub fn new(label: impl Into<String>, dialogues: Vec<Dialogue>) -> Result<Self> {
        let label = label.into();
        if dialogues.is_empty() {
            return Err(Error::Schema(format!("corpus `{label}` has no dialogues")));
        }
        let mut seen = BTreeSet::new();
        let mut bad = Vec::new();
        for d in &dialogues {
            if !seen.insert(d.id.as_str()) {
                bad.push(format!("duplicate dialogue id `{}`", d.id));
            } else if let Err(e) = d.validate() {
                bad.push(e.to_string());
            }
        }
        if !bad.is_empty() {
            return Err(Error::InvalidDialogues(bad));
        }
        let dialogues = dialogues
            .into_iter()
            .map(|mut d| {
                d.source = label.clone();
                d
            })
            .collect();
        Ok(Corpus { label, dialogues })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dialogues(&self) -> &[Dialogue] {
        &self.dialogues
    }

    pub fn len(&self) -> usize {
        self.dialogues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Dialogue> {
        self.dialogues.iter().find(|d| d.id == id)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        for d in &mut self.dialogues {
            d.source = self.label.clone();
        }
        self
    }

    /// Dialogues of both corpora under `label`; ids must stay unique.
    pub fn concat(&self, other: &Corpus, label: &str) -> Result<Corpus> {
        let mut all = self.dialogues.clone();
        all.extend(other.dialogues.iter().cloned());
        Corpus::new(label, all)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Version tag of the on-disk schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemaVersion {
    #[default]
    V1,
}

impl FromStr for SchemaVersion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v1" | "1" => Ok(SchemaVersion::V1),
            other => Err(Error::Schema(format!("unsupported schema version `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Drop dialogues that violate invariants instead of failing the load.
    pub skip_invalid: bool,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub corpus: Corpus,
    /// One diagnostic per dropped dialogue (only with `skip_invalid`).
    pub rejected: Vec<String>,
}

pub fn load_corpus(path: &Path, schema: SchemaVersion, opts: LoadOptions) -> Result<Loaded> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&bytes, schema, opts)
}

pub fn parse_corpus(bytes: &[u8], schema: SchemaVersion, opts: LoadOptions) -> Result<Loaded> {
    let SchemaVersion::V1 = schema;
    let raw: RawCorpus = serde_json::from_slice(bytes).map_err(|e| {
        if e.is_data() {
            Error::Schema(e.to_string())
        } else {
            Error::Parse(e)
        }
    })?;
    let mut dialogues = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = BTreeSet::new();
    for rd in raw.dialogues {
        let id = rd.id.clone();
        let checked = Dialogue::try_from(rd).and_then(|d| {
            if seen.contains(&d.id) {
                Err(Error::invariant(&d.id, "duplicate dialogue id"))
            } else {
                Ok(d)
            }
        });
        match checked {
            Ok(d) => {
                seen.insert(id);
                dialogues.push(d);
            }
            Err(e) => rejected.push(e.to_string()),
        }
    }
    if !rejected.is_empty() && !opts.skip_invalid {
        return Err(Error::InvalidDialogues(rejected));
    }
    for r in &rejected {
        log::warn!("skipping invalid dialogue: {r}");
    }
    Ok(Loaded {
        corpus: Corpus::new(raw.label, dialogues)?,
        rejected,
    })
}

/// Annotation files hold one annotation object or an array of them.
pub fn parse_annotations(json: &str) -> Result<Vec<AnnotationSet>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(AnnotationSet),
        Many(Vec<AnnotationSet>),
    }
    Ok(match serde_json::from_str(json)? {
        OneOrMany::One(a) => vec![a],
        OneOrMany::Many(v) => v,
    })
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationSet>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text)
}

/// Attaches each annotation set to its dialogue. A set for a dialogue that
/// already carries annotations replaces them; dialogues without a set keep
/// whatever they had.
pub fn attach_annotations(corpus: &Corpus, annotations: Vec<AnnotationSet>) -> Result<Corpus> {
    let mut by_id: BTreeMap<String, AnnotationSet> = BTreeMap::new();
    for a in annotations {
        if corpus.get(&a.dialogue_id).is_none() {
            return Err(Error::annotation(&a.dialogue_id, "no such dialogue in corpus"));
        }
        if by_id.contains_key(&a.dialogue_id) {
            return Err(Error::annotation(&a.dialogue_id, "duplicate annotation set"));
        }
        by_id.insert(a.dialogue_id.clone(), a);
    }
    let mut dialogues = corpus.dialogues.clone();
    for d in &mut dialogues {
        if let Some(a) = by_id.remove(&d.id) {
            check_annotation(d, &a)?;
            d.annotations = Some(a);
        }
    }
    Corpus::new(corpus.label.clone(), dialogues)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub dialogues: usize,
    pub avg_rounds: f64,
    pub rounds_sd: f64,
    pub walkaway_ratio: f64,
    /// Over accepted dialogues with deal scores; absent when there are none.
    pub avg_score_gap: Option<f64>,
    pub score_gap_sd: Option<f64>,
}

/// Round counts, walk-away ratio and deal-score gaps. Rounds count exchanges
/// (`ceil(turns / 2)`); standard deviations use the n - 1 denominator.
pub fn descriptive_stats(corpus: &Corpus) -> Result<DescriptiveStats> {
    let mut rounds = Vec::with_capacity(corpus.len());
    let mut gaps = Vec::new();
    let mut walked = 0usize;
    for d in corpus.dialogues() {
        let o = d
            .outcome
            .as_ref()
            .ok_or_else(|| Error::MissingOutcome(d.id.clone()))?;
        rounds.push(d.rounds() as f64);
        match o.kind {
            OutcomeKind::WalkedAway => walked += 1,
            OutcomeKind::Accepted => gaps.extend(o.score_gap),
            OutcomeKind::Exhausted => {}
        }
    }
    Ok(DescriptiveStats {
        dialogues: corpus.len(),
        avg_rounds: mean(&rounds).expect("corpus is non-empty"),
        rounds_sd: sample_sd(&rounds).expect("corpus is non-empty"),
        walkaway_ratio: walked as f64 / corpus.len() as f64,
        avg_score_gap: mean(&gaps),
        score_gap_sd: sample_sd(&gaps),
    })
}

// ---- wire format ----

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCorpus {
    label: String,
    dialogues: Vec<RawDialogue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTurn {
    speaker: Role,
    text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawOutcome {
    kind: OutcomeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    submission: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deal_score: Option<BTreeMap<Role, f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDialogue {
    id: String,
    turns: Vec<RawTurn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    personality: Option<BTreeMap<Role, PersonalityProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    importance: Option<BTreeMap<Role, IssueImportance>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcome: Option<RawOutcome>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotations: Option<AnnotationSet>,
}

impl TryFrom<RawDialogue> for Dialogue {
    type Error = Error;

    fn try_from(raw: RawDialogue) -> Result<Self> {
        let texts: Vec<String> = raw.turns.iter().map(|t| t.text.clone()).collect();
        let first = raw.turns.first().map(|t| t.speaker).unwrap_or(Role::Buyer);
        let mut d = Dialogue::from_texts(&raw.id, first, &texts);
        for (u, t) in d.turns.iter_mut().zip(&raw.turns) {
            u.speaker = t.speaker;
        }
        d.personality = raw.personality;
        d.importance = raw.importance;
        d.outcome = raw
            .outcome
            .map(|o| Outcome::new(o.kind, o.submission, o.deal_score));
        d.metadata = raw.metadata;
        d.annotations = raw.annotations;
        d.validate()?;
        Ok(d)
    }
}

impl From<Dialogue> for RawDialogue {
    fn from(d: Dialogue) -> Self {
        RawDialogue {
            id: d.id,
            turns: d
                .turns
                .into_iter()
                .map(|u| RawTurn {
                    speaker: u.speaker,
                    text: u.text,
                })
                .collect(),
            personality: d.personality,
            importance: d.importance,
            outcome: d.outcome.map(|o| RawOutcome {
                kind: o.kind,
                submission: o.submission,
                deal_score: o.deal_score,
            }),
            metadata: d.metadata,
            annotations: d.annotations,
        }
    }
}

impl TryFrom<RawCorpus> for Corpus {
    type Error = Error;

    fn try_from(raw: RawCorpus) -> Result<Self> {
        let dialogues = raw
            .dialogues
            .into_iter()
            .map(Dialogue::try_from)
            .collect::<Result<Vec<_>>>()?;
        Corpus::new(raw.label, dialogues)
    }
}

impl From<Corpus> for RawCorpus {
    fn from(c: Corpus) -> Self {
        RawCorpus {
            label: c.label,
            dialogues: c.dialogues.into_iter().map(RawDialogue::from).collect(),
        }
    }
}
