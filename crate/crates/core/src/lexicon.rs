//! Word-category lexicons and per-dialogue feature distributions.
//!
//! A [`CategoryLexicon`] maps category names to word patterns (`refund` or
//! the stem form `refund*`). A [`GroupBinding`] says how each of the ten
//! features of the two feature groups is computed: either straight from a
//! lexicon category, or as a clamped linear score over category percentages
//! (the summary variables, which are not plain word counts).
//!
//! Raw feature values follow the usual LIWC convention: a category yields the
//! percentage of dialogue tokens it matches; a linear scorer yields a 0..100
//! index. The values are then normalized into a smoothed distribution.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Dialogue, Role};
use crate::error::{Error, Result};
use crate::prob::{smooth_normalize, SMOOTHING_EPSILON};

const DEMO_LEXICON: &str = include_str!("../data/demo_lexicon.json");
const DEFAULT_BINDING: &str = include_str!("../data/feature_binding.json");

/// Lowercased word tokens. Apostrophes survive only between two
/// alphanumeric characters (`i'm`); all other punctuation separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if (c == '\'' || c == '\u{2019}')
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push('\'');
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Literal(String),
    Prefix(String),
}

impl Pattern {
    pub fn parse(raw: &str) -> Result<Self> {
        if raw.is_empty() || raw == "*" {
            return Err(Error::Lexicon("empty pattern".into()));
        }
        if raw.chars().any(char::is_uppercase) {
            return Err(Error::Lexicon(format!("pattern `{raw}` is not lowercase")));
        }
        Ok(match raw.strip_suffix('*') {
            Some(stem) => Pattern::Prefix(stem.to_string()),
            None => Pattern::Literal(raw.to_string()),
        })
    }

    pub fn matches(&self, token: &str) -> bool {
        match self {
            Pattern::Literal(w) => token == w,
            Pattern::Prefix(p) => token.starts_with(p.as_str()),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Literal(w) => f.write_str(w),
            Pattern::Prefix(p) => write!(f, "{p}*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLexicon {
    pub name: String,
    categories: BTreeMap<String, Vec<Pattern>>,
}

#[derive(Deserialize)]
struct RawLexicon {
    name: String,
    categories: BTreeMap<String, Vec<String>>,
}

impl CategoryLexicon {
    pub fn new(name: impl Into<String>, categories: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let categories = categories
            .into_iter()
            .map(|(cat, pats)| {
                let parsed = pats.iter().map(|p| Pattern::parse(p)).collect::<Result<Vec<_>>>()?;
                Ok((cat, parsed))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(CategoryLexicon {
            name: name.into(),
            categories,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: RawLexicon = serde_json::from_str(json)?;
        CategoryLexicon::new(raw.name, raw.categories)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The small open lexicon bundled with the crate.
    pub fn demo() -> Self {
        CategoryLexicon::from_json(DEMO_LEXICON).expect("bundled lexicon parses")
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    /// SHA-256 over the name and every category's patterns.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        for (cat, pats) in &self.categories {
            h.update(b"\0");
            h.update(cat.as_bytes());
            for p in pats {
                h.update(b"\x1f");
                h.update(p.to_string().as_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn contains(&self, category: &str) -> bool {
        self.categories.contains_key(category)
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// Matches per category over `tokens`. A token counts once per category
    /// it matches, and may match several categories.
    pub fn count_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> BTreeMap<String, usize> {
        self.categories
            .iter()
            .map(|(cat, pats)| {
                let n = tokens
                    .iter()
                    .filter(|t| pats.iter().any(|p| p.matches(t.as_ref())))
                    .count();
                (cat.clone(), n)
            })
            .collect()
    }
}

/// Which turns contribute to a dialogue's features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    Conversation,
    Speaker(Role),
}

fn dialogue_tokens(dialogue: &Dialogue, scope: Scope) -> Vec<String> {
    dialogue
        .turns
        .iter()
        .filter(|u| match scope {
            Scope::Conversation => true,
            Scope::Speaker(r) => u.speaker == r,
        })
        .flat_map(|u| tokenize(&u.text))
        .collect()
}

/// Token matches per category over every turn of the dialogue.
pub fn category_counts(dialogue: &Dialogue, lexicon: &CategoryLexicon) -> Result<BTreeMap<String, usize>> {
    if lexicon.is_empty() {
        return Err(Error::Lexicon(format!("lexicon `{}` has no categories", lexicon.name)));
    }
    Ok(lexicon.count_tokens(&dialogue_tokens(dialogue, Scope::Conversation)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Irp,
    Dispute,
}

impl FeatureGroup {
    /// Declared feature order of the group.
    pub fn features(self) -> &'static [&'static str] {
        match self {
            FeatureGroup::Irp => &["insight", "prosocial", "affiliation", "power", "allnone", "polite"],
            FeatureGroup::Dispute => &["money", "analytic", "authentic", "clout"],
        }
    }
}

/// How one feature is computed from a tokenized dialogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Percentage of tokens matching the category.
    Category(String),
    /// `clamp(intercept + sum(weight * percentage(category)), min, max)`.
    /// Used as an open approximation of the summary variables.
    Linear {
        intercept: f64,
        terms: BTreeMap<String, f64>,
        min: f64,
        max: f64,
    },
}

impl FeatureSource {
    fn categories(&self) -> Vec<&str> {
        match self {
            FeatureSource::Category(c) => vec![c.as_str()],
            FeatureSource::Linear { terms, .. } => terms.keys().map(String::as_str).collect(),
        }
    }

    fn evaluate(&self, percent: &dyn Fn(&str) -> f64) -> f64 {
        match self {
            FeatureSource::Category(c) => percent(c),
            FeatureSource::Linear {
                intercept,
                terms,
                min,
                max,
            } => {
                let raw = intercept + terms.iter().map(|(c, w)| w * percent(c)).sum::<f64>();
                raw.clamp(*min, *max)
            }
        }
    }
}

/// Feature definitions for both groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBinding {
    pub irp: BTreeMap<String, FeatureSource>,
    pub dispute: BTreeMap<String, FeatureSource>,
}

impl GroupBinding {
    pub fn from_json(json: &str) -> Result<Self> {
        let b: GroupBinding = serde_json::from_str(json)?;
        b.check_shape()?;
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn group(&self, group: FeatureGroup) -> &BTreeMap<String, FeatureSource> {
        match group {
            FeatureGroup::Irp => &self.irp,
            FeatureGroup::Dispute => &self.dispute,
        }
    }

    fn check_shape(&self) -> Result<()> {
        for g in [FeatureGroup::Irp, FeatureGroup::Dispute] {
            let map = self.group(g);
            let expected = g.features();
            if map.len() != expected.len() || expected.iter().any(|f| !map.contains_key(*f)) {
                return Err(Error::Lexicon(format!(
                    "{g:?} binding must define exactly {expected:?}"
                )));
            }
        }
        Ok(())
    }

    /// Errors if the group references a category the lexicon lacks.
    pub fn check_against(&self, lexicon: &CategoryLexicon, group: FeatureGroup) -> Result<()> {
        for (feature, source) in self.group(group) {
            for c in source.categories() {
                if !lexicon.contains(c) {
                    return Err(Error::Lexicon(format!(
                        "feature `{feature}` needs category `{c}`, absent from lexicon `{}`",
                        lexicon.name
                    )));
                }
            }
        }
        Ok(())
    }
}

impl GroupBinding {
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("binding serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

impl Default for GroupBinding {
    fn default() -> Self {
        GroupBinding::from_json(DEFAULT_BINDING).expect("bundled binding parses")
    }
}

/// A smoothed distribution over a feature group, in declared feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub group: FeatureGroup,
    pub values: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn proportions(&self) -> Vec<f64> {
        self.values.iter().map(|(_, v)| *v).collect()
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.values.iter().find(|(f, _)| f == feature).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions {
    /// Added to every proportion before renormalizing; 0 disables smoothing.
    pub epsilon: f64,
    pub scope: Scope,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            epsilon: SMOOTHING_EPSILON,
            scope: Scope::Conversation,
        }
    }
}

/// Raw (unnormalized) feature values of one dialogue.
pub fn raw_features(
    dialogue: &Dialogue,
    lexicon: &CategoryLexicon,
    binding: &GroupBinding,
    group: FeatureGroup,
    scope: Scope,
) -> Result<Vec<(String, f64)>> {
    binding.check_against(lexicon, group)?;
    let tokens = dialogue_tokens(dialogue, scope);
    let counts = lexicon.count_tokens(&tokens);
    let total = tokens.len() as f64;
    let percent = |c: &str| -> f64 {
        if total == 0.0 {
            0.0
        } else {
            100.0 * counts.get(c).copied().unwrap_or(0) as f64 / total
        }
    };
    let sources = binding.group(group);
    Ok(group
        .features()
        .iter()
        .map(|f| (f.to_string(), sources[*f].evaluate(&percent)))
        .collect())
}

pub fn feature_distribution(
    dialogue: &Dialogue,
    lexicon: &CategoryLexicon,
    binding: &GroupBinding,
    group: FeatureGroup,
    opts: FeatureOptions,
) -> Result<FeatureVector> {
    let raw = raw_features(dialogue, lexicon, binding, group, opts.scope)?;
    let values: Vec<f64> = raw.iter().map(|(_, v)| *v).collect();
    let p = smooth_normalize(&values, opts.epsilon).ok_or_else(|| {
        Error::Distribution(format!(
            "dialogue {} has no {group:?} feature mass and smoothing is off",
            dialogue.id
        ))
    })?;
    Ok(FeatureVector {
        group,
        values: raw.into_iter().map(|(f, _)| f).zip(p).collect(),
    })
}
