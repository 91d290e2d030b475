//! Big Five personality profiles.
//!
//! Each trait is held on a six-state scale: a polarity (positive or negative
//! pole of the trait) crossed with an intensity (low, medium, high). Profiles
//! are sampled per trait from a target distribution, then verbalized as fifteen
//! adjective phrases (three per trait) drawn from a bipolar adjective bank.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adjectives to draw per trait when rendering a prompt.
pub const ADJECTIVES_PER_TRAIT: usize = 3;

/// Tolerance on the total mass of a target distribution.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

const DEFAULT_BANK: &str = include_str!("../data/adjectives.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trait {
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl Trait {
    pub const ALL: [Trait; 5] = [
        Trait::Openness,
        Trait::Conscientiousness,
        Trait::Extraversion,
        Trait::Agreeableness,
        Trait::Neuroticism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Trait::Openness => "openness",
            Trait::Conscientiousness => "conscientiousness",
            Trait::Extraversion => "extraversion",
            Trait::Agreeableness => "agreeableness",
            Trait::Neuroticism => "neuroticism",
        }
    }

    /// Three-letter code, e.g. `AGR`.
    pub fn code(self) -> &'static str {
        match self {
            Trait::Openness => "OPE",
            Trait::Conscientiousness => "CON",
            Trait::Extraversion => "EXT",
            Trait::Agreeableness => "AGR",
            Trait::Neuroticism => "NEU",
        }
    }
}

impl FromStr for Trait {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Trait::ALL
            .into_iter()
            .find(|t| t.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Schema(format!("unknown trait `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    /// Intensity modifier prepended to each adjective.
    pub fn modifier(self) -> Option<&'static str> {
        match self {
            Level::High => Some("very"),
            Level::Medium => None,
            Level::Low => Some("a bit"),
        }
    }
}

/// One of the six states of a trait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraitSpec {
    pub polarity: Polarity,
    pub level: Level,
}

impl TraitSpec {
    /// All six states in canonical order: neg-high, neg-med, neg-low,
    /// pos-low, pos-med, pos-high. Target distributions use this order.
    pub const STATES: [TraitSpec; 6] = [
        TraitSpec::new(Polarity::Negative, Level::High),
        TraitSpec::new(Polarity::Negative, Level::Medium),
        TraitSpec::new(Polarity::Negative, Level::Low),
        TraitSpec::new(Polarity::Positive, Level::Low),
        TraitSpec::new(Polarity::Positive, Level::Medium),
        TraitSpec::new(Polarity::Positive, Level::High),
    ];

    pub const fn new(polarity: Polarity, level: Level) -> Self {
        TraitSpec { polarity, level }
    }

    pub fn index(self) -> usize {
        TraitSpec::STATES
            .iter()
            .position(|s| *s == self)
            .expect("every state is listed")
    }

    /// `+`, `++`, `+++` for positive low..high and `-`, `--`, `---` for negative.
    pub fn symbol(self) -> String {
        let sign = match self.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        let n = match self.level {
            Level::Low => 1,
            Level::Medium => 2,
            Level::High => 3,
        };
        std::iter::repeat_n(sign, n).collect()
    }
}

/// A full Big Five profile: exactly one state per trait.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<Trait, TraitSpec>", into = "BTreeMap<Trait, TraitSpec>")]
pub struct PersonalityProfile {
    specs: BTreeMap<Trait, TraitSpec>,
}

impl PersonalityProfile {
    pub fn new(specs: BTreeMap<Trait, TraitSpec>) -> Result<Self> {
        if let Some(missing) = Trait::ALL.iter().find(|t| !specs.contains_key(t)) {
            return Err(Error::Schema(format!(
                "personality profile is missing trait `{}`",
                missing.name()
            )));
        }
        Ok(PersonalityProfile { specs })
    }

    /// Profile with the same state on every trait.
    pub fn uniform(spec: TraitSpec) -> Self {
        PersonalityProfile {
            specs: Trait::ALL.iter().map(|t| (*t, spec)).collect(),
        }
    }

    pub fn get(&self, t: Trait) -> TraitSpec {
        self.specs[&t]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Trait, TraitSpec)> + '_ {
        self.specs.iter().map(|(t, s)| (*t, *s))
    }
}

impl TryFrom<BTreeMap<Trait, TraitSpec>> for PersonalityProfile {
    type Error = Error;

    fn try_from(specs: BTreeMap<Trait, TraitSpec>) -> Result<Self> {
        PersonalityProfile::new(specs)
    }
}

impl From<PersonalityProfile> for BTreeMap<Trait, TraitSpec> {
    fn from(p: PersonalityProfile) -> Self {
        p.specs
    }
}

impl fmt::Display for PersonalityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Trait::ALL
            .iter()
            .map(|t| format!("{}{}", t.code(), self.get(*t).symbol()))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Per-trait probabilities over the six states, in [`TraitSpec::STATES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<Trait, Vec<f64>>", into = "BTreeMap<Trait, Vec<f64>>")]
pub struct TargetDistribution {
    probs: BTreeMap<Trait, [f64; 6]>,
}

impl TargetDistribution {
    pub fn new(probs: BTreeMap<Trait, [f64; 6]>) -> Result<Self> {
        for t in Trait::ALL {
            let p = probs.get(&t).ok_or_else(|| {
                Error::Distribution(format!("no distribution for trait `{}`", t.name()))
            })?;
            if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::Distribution(format!(
                    "trait `{}` has invalid mass {bad}",
                    t.name()
                )));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
                return Err(Error::Distribution(format!(
                    "trait `{}` sums to {total}, expected 1",
                    t.name()
                )));
            }
        }
        Ok(TargetDistribution { probs })
    }

    pub fn uniform() -> Self {
        TargetDistribution {
            probs: Trait::ALL.iter().map(|t| (*t, [1.0 / 6.0; 6])).collect(),
        }
    }

    /// All mass on one state for every trait.
    pub fn point(spec: TraitSpec) -> Self {
        let mut p = [0.0; 6];
        p[spec.index()] = 1.0;
        TargetDistribution {
            probs: Trait::ALL.iter().map(|t| (*t, p)).collect(),
        }
    }

    pub fn probs(&self, t: Trait) -> &[f64; 6] {
        &self.probs[&t]
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl TryFrom<BTreeMap<Trait, Vec<f64>>> for TargetDistribution {
    type Error = Error;

    fn try_from(raw: BTreeMap<Trait, Vec<f64>>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        for (t, v) in raw {
            let arr: [f64; 6] = v.as_slice().try_into().map_err(|_| {
                Error::Distribution(format!(
                    "trait `{}` needs 6 probabilities, got {}",
                    t.name(),
                    v.len()
                ))
            })?;
            probs.insert(t, arr);
        }
        TargetDistribution::new(probs)
    }
}

impl From<TargetDistribution> for BTreeMap<Trait, Vec<f64>> {
    fn from(d: TargetDistribution) -> Self {
        d.probs.into_iter().map(|(t, p)| (t, p.to_vec())).collect()
    }
}

/// Draws one state per trait independently from `target`.
pub fn sample_profile<R: Rng + ?Sized>(target: &TargetDistribution, rng: &mut R) -> PersonalityProfile {
    let specs = Trait::ALL
        .iter()
        .map(|t| (*t, TraitSpec::STATES[sample_categorical(target.probs(*t), rng)]))
        .collect();
    PersonalityProfile { specs }
}

fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack above the cumulative sum
    last_nonzero
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjectivePair {
    pub trait_: Trait,
    pub positive: String,
    pub negative: String,
}

impl AdjectivePair {
    pub fn side(&self, polarity: Polarity) -> &str {
        match polarity {
            Polarity::Positive => &self.positive,
            Polarity::Negative => &self.negative,
        }
    }
}

/// Bipolar adjective pairs keyed by trait.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjectiveBank {
    entries: Vec<AdjectivePair>,
}

impl AdjectiveBank {
    pub fn new(entries: Vec<AdjectivePair>) -> Self {
        AdjectiveBank { entries }
    }

    /// Parses `trait,positive_adjective,negative_adjective` records. Blank
    /// lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [t, pos, neg] = fields.as_slice() else {
                return Err(Error::AdjectiveBank(format!(
                    "line {}: expected 3 fields, got {}",
                    n + 1,
                    fields.len()
                )));
            };
            if pos.is_empty() || neg.is_empty() {
                return Err(Error::AdjectiveBank(format!("line {}: empty adjective", n + 1)));
            }
            entries.push(AdjectivePair {
                trait_: t.parse()?,
                positive: pos.to_string(),
                negative: neg.to_string(),
            });
        }
        Ok(AdjectiveBank { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &[AdjectivePair] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct adjectives on one side of a trait, in file order.
    pub fn adjectives(&self, t: Trait, polarity: Polarity) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in self.entries.iter().filter(|e| e.trait_ == t) {
            let adj = e.side(polarity);
            if !out.contains(&adj) {
                out.push(adj);
            }
        }
        out
    }
}

impl Default for AdjectiveBank {
    /// The bundled 70-pair open list.
    fn default() -> Self {
        AdjectiveBank::parse(DEFAULT_BANK).expect("bundled adjective bank parses")
    }
}

/// Renders a profile as 15 adjective phrases, three per trait in
/// [`Trait::ALL`] order. Adjectives come from the polarity side of the trait,
/// drawn without replacement within the trait.
pub fn render_prompt<R: Rng + ?Sized>(
    profile: &PersonalityProfile,
    bank: &AdjectiveBank,
    rng: &mut R,
) -> Result<Vec<String>> {
    let mut phrases = Vec::with_capacity(Trait::ALL.len() * ADJECTIVES_PER_TRAIT);
    for t in Trait::ALL {
        let spec = profile.get(t);
        let pool = bank.adjectives(t, spec.polarity);
        if pool.len() < ADJECTIVES_PER_TRAIT {
            return Err(Error::AdjectiveBank(format!(
                "trait `{}` has {} distinct adjectives, need {ADJECTIVES_PER_TRAIT}",
                t.name(),
                pool.len()
            )));
        }
        let picks = rand::seq::index::sample(rng, pool.len(), ADJECTIVES_PER_TRAIT);
        for i in picks.iter() {
            phrases.push(match spec.level.modifier() {
                Some(m) => format!("{m} {}", pool[i]),
                None => pool[i].to_string(),
            });
        }
    }
    Ok(phrases)
}

/// Points allocated to each negotiable issue; sums to a fixed budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IssueImportance {
    pub weights: BTreeMap<String, u32>,
}

impl IssueImportance {
    pub fn total(&self) -> u32 {
        self.weights.values().sum()
    }

    pub fn weight(&self, issue: &str) -> u32 {
        self.weights.get(issue).copied().unwrap_or(0)
    }

    /// Equal split with the remainder assigned to the first issues.
    pub fn even(budget: u32, issues: &[String]) -> Result<Self> {
        if issues.is_empty() {
            return Err(Error::Config("no issues to weight".into()));
        }
        let n = issues.len() as u32;
        let weights = issues
            .iter()
            .enumerate()
            .map(|(i, code)| (code.clone(), budget / n + u32::from((i as u32) < budget % n)))
            .collect();
        Ok(IssueImportance { weights })
    }
}

/// Random composition of `budget` over `issues`: exponential draws give a
/// flat Dirichlet split, which is rounded down and topped up by largest
/// remainder so the weights sum to the budget exactly.
pub fn sample_importance<R: Rng + ?Sized>(
    rng: &mut R,
    budget: u32,
    issues: &[String],
) -> Result<IssueImportance> {
    if issues.is_empty() {
        return Err(Error::Config("no issues to weight".into()));
    }
    if budget == 0 {
        return Err(Error::Config("importance budget must be positive".into()));
    }
    let draws: Vec<f64> = issues.iter().map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    let shares: Vec<f64> = draws.iter().map(|d| d / total * f64::from(budget)).collect();
    let mut points: Vec<u32> = shares.iter().map(|s| s.floor() as u32).collect();
    let assigned: u32 = points.iter().sum();
    let mut order: Vec<usize> = (0..issues.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(budget.saturating_sub(assigned) as usize) {
        points[i] += 1;
    }
    Ok(IssueImportance {
        weights: issues.iter().cloned().zip(points).collect(),
    })
}
