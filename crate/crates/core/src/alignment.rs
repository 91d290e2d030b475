//! Distribution distances, pairing schemes, the six gap metrics and the
//! independent two-sample t-test used to compare them with the human side.
//!
//! Pairwise metrics (LG, ATG, SBG) contrast the mean distance over all
//! unordered human-human pairs with the mean over all human-LLM pairs.
//! Per-dyad metrics (LEG, AMG) contrast the mean per-dialogue score of each
//! corpus. Every gap is the absolute difference of the two means.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand::seq::IteratorRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{Corpus, Dialogue};
use crate::dynamics::{self, DtwOptions, TrajectoryMode};
use crate::error::{Error, Result};
use crate::irp;
use crate::lexicon::{self, CategoryLexicon, FeatureGroup, FeatureOptions, GroupBinding};
use crate::prob::{mean, sample_variance};
use crate::textdist::{self, EmbeddingStore, EntrainmentOptions, WmdCache};

const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JsdMode {
    /// Square root of the base-2 divergence.
    #[default]
    Distance,
    Divergence,
}

impl FromStr for JsdMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(JsdMode::Distance),
            "divergence" => Ok(JsdMode::Divergence),
            _ => Err(Error::Config(format!("unknown JSD mode `{s}` (distance|divergence)"))),
        }
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Distribution("negative or non-finite mass".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::Distribution(format!("mass sums to {total}, not 1")));
    }
    Ok(())
}

/// Base-2 Jensen-Shannon divergence, in `[0, 1]`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch(p.len(), q.len()));
    }
    if p.is_empty() {
        return Err(Error::EmptyInput("JSD over an empty support".into()));
    }
    check_distribution(p)?;
    check_distribution(q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            sum += a * (a / m).log2();
        }
        if b > 0.0 {
            sum += b * (b / m).log2();
        }
    }
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Jensen-Shannon distance (square root of the base-2 divergence).
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64> {
    js_divergence(p, q).map(f64::sqrt)
}

pub fn jsd_with(p: &[f64], q: &[f64], mode: JsdMode) -> Result<f64> {
    match mode {
        JsdMode::Distance => jsd(p, q),
        JsdMode::Divergence => js_divergence(p, q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingScheme {
    WithinGroupPairwise,
    CrossGroupPairwise,
    PerDyad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    LgIrp,
    LgDispute,
    Leg,
    Atg,
    Amg,
    Sbg,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::LgIrp,
        Metric::LgDispute,
        Metric::Leg,
        Metric::Atg,
        Metric::Amg,
        Metric::Sbg,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::LgIrp => "lg_irp",
            Metric::LgDispute => "lg_dispute",
            Metric::Leg => "leg",
            Metric::Atg => "atg",
            Metric::Amg => "amg",
            Metric::Sbg => "sbg",
        }
    }

    /// Column heading used in tables.
    pub fn heading(self) -> &'static str {
        match self {
            Metric::LgIrp => "LG-IRP",
            Metric::LgDispute => "LG-Dispute",
            Metric::Leg => "LEG",
            Metric::Atg => "ATG",
            Metric::Amg => "AMG",
            Metric::Sbg => "SBG",
        }
    }

    pub fn pairing(self) -> PairingScheme {
        match self {
            Metric::Leg | Metric::Amg => PairingScheme::PerDyad,
            _ => PairingScheme::CrossGroupPairwise,
        }
    }

    /// Whether the metric reads per-turn annotations.
    pub fn needs_annotations(self) -> bool {
        matches!(self, Metric::Atg | Metric::Amg | Metric::Sbg)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.heading())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestKind {
    #[default]
    Welch,
    EqualVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

/// Two-sided independent two-sample t-test of `mean(a) - mean(b)`.
pub fn ttest_independent(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::TooFewSamples(format!(
            "t-test needs at least 2 samples per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a).expect("non-empty"), mean(b).expect("non-empty"));
    let (va, vb) = (
        sample_variance(a).expect("n >= 2"),
        sample_variance(b).expect("n >= 2"),
    );
    if va == 0.0 && vb == 0.0 {
        return Err(Error::DegenerateSamples("both samples have zero variance".into()));
    }
    let (se, df) = match kind {
        TTestKind::Welch => {
            let (ua, ub) = (va / na, vb / nb);
            let df = (ua + ub).powi(2) / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0));
            ((ua + ub).sqrt(), df)
        }
        TTestKind::EqualVariance => {
            let df = na + nb - 2.0;
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
        }
    };
    let t = (ma - mb) / se;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateSamples(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, p, df })
}

/// `*` p<.05, `**` p<.01, `***` p<.001.
pub fn stars(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.001 => "***",
        Some(p) if p < 0.01 => "**",
        Some(p) if p < 0.05 => "*",
        _ => "",
    }
}

/// Which LLM-side samples the t-test compares the within-human pairs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseContrast {
    /// Human-LLM cross pairs (the samples the gap itself is built from).
    #[default]
    Cross,
    /// LLM-LLM pairs.
    WithinLlm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOptions {
    /// Worker threads for pairwise maps; 0 uses the rayon default.
    pub workers: usize,
    /// Seeded reservoir sample of at most this many pairs per pair set.
    pub max_pairs: Option<usize>,
    pub seed: u64,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            workers: 0,
            max_pairs: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    pub jsd_mode: JsdMode,
    pub entrainment: EntrainmentOptions,
    pub dtw: DtwOptions,
    pub trajectory_mode: TrajectoryMode,
    pub feature_epsilon: f64,
    pub ttest: TTestKind,
    pub contrast: PairwiseContrast,
    pub pairs: PairOptions,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            jsd_mode: JsdMode::Distance,
            entrainment: EntrainmentOptions::default(),
            dtw: DtwOptions::default(),
            trajectory_mode: TrajectoryMode::Round,
            feature_epsilon: crate::prob::SMOOTHING_EPSILON,
            ttest: TTestKind::Welch,
            contrast: PairwiseContrast::Cross,
            pairs: PairOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub metric: Metric,
    pub value: f64,
    /// Within-human pair mean, or the human per-dyad mean.
    pub human_baseline: f64,
    /// Cross-pair mean, or the LLM per-dyad mean.
    pub llm_mean: f64,
    pub pairing: PairingScheme,
    pub samples_human: Vec<f64>,
    pub samples_llm: Vec<f64>,
    /// Within-LLM pair values when the t-test uses that contrast.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_contrast: Option<Vec<f64>>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub df: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_note: Option<String>,
    pub excluded_human: usize,
    pub excluded_llm: usize,
}

impl GapResult {
    pub fn stars(&self) -> &'static str {
        stars(self.p_value)
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Errors that mean "this dialogue cannot contribute" rather than "abort".
fn is_exclusion(e: &Error) -> bool {
    matches!(
        e,
        Error::Annotation { .. } | Error::TooFewSamples(_) | Error::UndefinedDistance(_)
    )
}

/// Per-dialogue extraction; dialogues failing with an exclusion error are
/// dropped and counted.
fn extract<T, F>(corpus: &Corpus, pool: &rayon::ThreadPool, f: F) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(&Dialogue) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = pool.install(|| corpus.dialogues().par_iter().map(&f).collect());
    let mut kept = Vec::new();
    let mut excluded = 0;
    for (d, r) in corpus.dialogues().iter().zip(results) {
        match r {
            Ok(v) => kept.push(v),
            Err(e) if is_exclusion(&e) => {
                log::info!("{}: excluding dialogue {}: {e}", corpus.label(), d.id);
                excluded += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((kept, excluded))
}

pub fn within_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn cross_pairs(na: usize, nb: usize) -> Vec<(usize, usize)> {
    (0..na).flat_map(|i| (0..nb).map(move |j| (i, j))).collect()
}

/// Seeded reservoir sample, returned in pair-index order.
fn limit_pairs(pairs: Vec<(usize, usize)>, opts: &PairOptions, salt: u64) -> Vec<(usize, usize)> {
    match opts.max_pairs {
        Some(max) if pairs.len() > max => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ salt);
            let mut picked = pairs.into_iter().choose_multiple(&mut rng, max);
            picked.sort_unstable();
            picked
        }
        _ => pairs,
    }
}

fn map_pairs<A, B, F>(
    pool: &rayon::ThreadPool,
    pairs: &[(usize, usize)],
    left: &[A],
    right: &[B],
    dist: &F,
) -> Result<Vec<f64>>
where
    A: Sync,
    B: Sync,
    F: Fn(&A, &B) -> Result<f64> + Sync,
{
    pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| dist(&left[i], &right[j]))
            .collect()
    })
}

fn finish(
    metric: Metric,
    samples_human: Vec<f64>,
    samples_llm: Vec<f64>,
    samples_contrast: Option<Vec<f64>>,
    excluded: (usize, usize),
    kind: TTestKind,
) -> GapResult {
    let human_baseline = mean(&samples_human).expect("checked non-empty");
    let llm_mean = mean(&samples_llm).expect("checked non-empty");
    let against = samples_contrast.as_deref().unwrap_or(&samples_llm);
    let (t_stat, p_value, df, test_note) = match ttest_independent(&samples_human, against, kind) {
        Ok(t) => (Some(t.t), Some(t.p), Some(t.df), None),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    GapResult {
        metric,
        value: (llm_mean - human_baseline).abs(),
        human_baseline,
        llm_mean,
        pairing: metric.pairing(),
        samples_human,
        samples_llm,
        samples_contrast,
        t_stat,
        p_value,
        df,
        test_note,
        excluded_human: excluded.0,
        excluded_llm: excluded.1,
    }
}

fn pairwise_gap<T, F>(
    metric: Metric,
    human: &[T],
    llm: &[T],
    excluded: (usize, usize),
    dist: F,
    opts: &GapOptions,
    pool: &rayon::ThreadPool,
) -> Result<GapResult>
where
    T: Sync,
    F: Fn(&T, &T) -> Result<f64> + Sync,
{
    if human.len() < 2 || llm.is_empty() {
        return Err(Error::TooFewSamples(format!(
            "{metric} needs at least 2 human and 1 LLM dialogue, got {} and {}",
            human.len(),
            llm.len()
        )));
    }
    let within = limit_pairs(within_pairs(human.len()), &opts.pairs, 1);
    let cross = limit_pairs(cross_pairs(human.len(), llm.len()), &opts.pairs, 2);
    let samples_human = map_pairs(pool, &within, human, human, &dist)?;
    let samples_llm = map_pairs(pool, &cross, human, llm, &dist)?;
    let contrast = match opts.contrast {
        PairwiseContrast::Cross => None,
        PairwiseContrast::WithinLlm => {
            let w = limit_pairs(within_pairs(llm.len()), &opts.pairs, 3);
            Some(map_pairs(pool, &w, llm, llm, &dist)?)
        }
    };
    Ok(finish(metric, samples_human, samples_llm, contrast, excluded, opts.ttest))
}

fn per_dyad_gap(
    metric: Metric,
    human: Vec<f64>,
    llm: Vec<f64>,
    excluded: (usize, usize),
    opts: &GapOptions,
) -> Result<GapResult> {
    if human.is_empty() || llm.is_empty() {
        return Err(Error::TooFewSamples(format!(
            "{metric} needs at least 1 dialogue per corpus, got {} and {}",
            human.len(),
            llm.len()
        )));
    }
    Ok(finish(metric, human, llm, None, excluded, opts.ttest))
}

/// Linguistic feature gap over one feature group.
pub fn lg(
    human: &Corpus,
    llm: &Corpus,
    group: FeatureGroup,
    lexicon: &CategoryLexicon,
    binding: &GroupBinding,
    opts: &GapOptions,
) -> Result<GapResult> {
    binding.check_against(lexicon, group)?;
    let pool = pool(opts.pairs.workers)?;
    let fopts = FeatureOptions {
        epsilon: opts.feature_epsilon,
        ..Default::default()
    };
    let features = |d: &Dialogue| {
        lexicon::feature_distribution(d, lexicon, binding, group, fopts).map(|v| v.proportions())
    };
    let (h, eh) = extract(human, &pool, features)?;
    let (l, el) = extract(llm, &pool, features)?;
    let metric = match group {
        FeatureGroup::Irp => Metric::LgIrp,
        FeatureGroup::Dispute => Metric::LgDispute,
    };
    let mode = opts.jsd_mode;
    pairwise_gap(metric, &h, &l, (eh, el), |p, q| jsd_with(p, q, mode), opts, &pool)
}

/// Linguistic entrainment gap.
pub fn leg(
    human: &Corpus,
    llm: &Corpus,
    store: &EmbeddingStore,
    opts: &GapOptions,
    cache: Option<&WmdCache>,
) -> Result<GapResult> {
    let pool = pool(opts.pairs.workers)?;
    let score = |d: &Dialogue| textdist::dyadic_le(d, store, opts.entrainment, cache).map(|s| s.value);
    let (h, eh) = extract(human, &pool, score)?;
    let (l, el) = extract(llm, &pool, score)?;
    per_dyad_gap(Metric::Leg, h, l, (eh, el), opts)
}

/// Anger trajectory gap.
pub fn atg(human: &Corpus, llm: &Corpus, opts: &GapOptions) -> Result<GapResult> {
    let pool = pool(opts.pairs.workers)?;
    let mode = opts.trajectory_mode;
    let traj = |d: &Dialogue| {
        dynamics::trajectory(d, mode).map(|ts| ts.into_iter().map(|t| t.values().to_vec()).collect::<Vec<_>>())
    };
    let (h, eh) = extract(human, &pool, traj)?;
    let (l, el) = extract(llm, &pool, traj)?;
    let dtw_opts = opts.dtw;
    // speaker mode: mean of the buyer-buyer and seller-seller distances
    let dist = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in a.iter().zip(b) {
            total += dynamics::dtw_with(x, y, dtw_opts)?;
        }
        Ok(total / a.len() as f64)
    };
    pairwise_gap(Metric::Atg, &h, &l, (eh, el), dist, opts, &pool)
}

/// Anger magnitude gap.
pub fn amg(human: &Corpus, llm: &Corpus, opts: &GapOptions) -> Result<GapResult> {
    let pool = pool(opts.pairs.workers)?;
    let mode = opts.trajectory_mode;
    let magnitude = |d: &Dialogue| -> Result<f64> {
        let ts = dynamics::trajectory(d, mode)?;
        let mut total = 0.0;
        for t in &ts {
            total += dynamics::auc(t)?;
        }
        Ok(total / ts.len() as f64)
    };
    let (h, eh) = extract(human, &pool, magnitude)?;
    let (l, el) = extract(llm, &pool, magnitude)?;
    per_dyad_gap(Metric::Amg, h, l, (eh, el), opts)
}

/// Strategic behavior gap over IRP usage distributions.
pub fn sbg(human: &Corpus, llm: &Corpus, opts: &GapOptions) -> Result<GapResult> {
    let pool = pool(opts.pairs.workers)?;
    let usage = |d: &Dialogue| irp::usage_distribution(d).map(|u| u.as_slice().to_vec());
    let (h, eh) = extract(human, &pool, usage)?;
    let (l, el) = extract(llm, &pool, usage)?;
    let mode = opts.jsd_mode;
    pairwise_gap(Metric::Sbg, &h, &l, (eh, el), |p, q| jsd_with(p, q, mode), opts, &pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsd_fixtures() {
        assert_eq!(jsd(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(jsd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let d = js_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((d - 0.3113).abs() < 1e-4);
        assert!((jsd(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - 0.5579).abs() < 1e-4);
    }

    #[test]
    fn jsd_rejects_bad_input() {
        assert!(matches!(jsd(&[1.0], &[0.5, 0.5]), Err(Error::SupportMismatch(1, 2))));
        assert!(jsd(&[0.6, 0.6], &[0.5, 0.5]).is_err());
        assert!(jsd(&[], &[]).is_err());
        assert!(jsd(&[1.5, -0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.key().parse::<Metric>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.key()));
        }
        assert!("lg".parse::<Metric>().is_err());
    }

    #[test]
    fn ttest_identity_and_sign() {
        let a = [0.1, 0.4, 0.35, 0.2];
        let t = ttest_independent(&a, &a, TTestKind::Welch).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let b = [0.5, 0.6, 0.9, 0.7, 0.65];
        let ab = ttest_independent(&a, &b, TTestKind::Welch).unwrap();
        let ba = ttest_independent(&b, &a, TTestKind::Welch).unwrap();
        assert!(ab.t < 0.0);
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.p, ba.p);
    }

    #[test]
    fn ttest_closed_form_df2() {
        // means 0 and 1, both variances 1, n = 2: t = -1, df = 2
        let t = ttest_independent(&[-0.5f64.sqrt() * 1.0, 0.5f64.sqrt()], &[1.0 - 0.5f64.sqrt(), 1.0 + 0.5f64.sqrt()], TTestKind::Welch).unwrap();
        assert!((t.t + 1.0).abs() < 1e-12);
        assert!((t.df - 2.0).abs() < 1e-12);
        let p = 1.0 - 1.0 / 3.0f64.sqrt();
        assert!((t.p - p).abs() < 1e-9);
    }

    #[test]
    fn ttest_equal_variance_matches_welch_for_balanced_equal_variance() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let w = ttest_independent(&a, &b, TTestKind::Welch).unwrap();
        let s = ttest_independent(&a, &b, TTestKind::EqualVariance).unwrap();
        assert!((w.t - s.t).abs() < 1e-12);
        assert_eq!(s.df, 4.0);
    }

    #[test]
    fn ttest_degenerate() {
        assert!(matches!(
            ttest_independent(&[1.0, 1.0], &[2.0, 2.0], TTestKind::Welch),
            Err(Error::DegenerateSamples(_))
        ));
        assert!(matches!(
            ttest_independent(&[1.0], &[2.0, 3.0], TTestKind::Welch),
            Err(Error::TooFewSamples(_))
        ));
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(Some(0.0009)), "***");
        assert_eq!(stars(Some(0.001)), "**");
        assert_eq!(stars(Some(0.04)), "*");
        assert_eq!(stars(Some(0.05)), "");
        assert_eq!(stars(None), "");
    }

    #[test]
    fn pair_enumeration() {
        assert_eq!(within_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(cross_pairs(2, 2).len(), 4);
        assert!(within_pairs(1).is_empty());
    }

    #[test]
    fn reservoir_is_seeded_and_ordered() {
        let opts = PairOptions {
            max_pairs: Some(5),
            seed: 9,
            ..Default::default()
        };
        let a = limit_pairs(within_pairs(10), &opts, 1);
        let b = limit_pairs(within_pairs(10), &opts, 1);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(limit_pairs(within_pairs(3), &opts, 1).len(), 3);
    }

    #[test]
    fn two_vs_one_pairwise_fixture() {
        let pool = pool(1).unwrap();
        let human = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let llm = vec![vec![1.0, 0.0]];
        let r = pairwise_gap(
            Metric::LgIrp,
            &human,
            &llm,
            (0, 0),
            |p: &Vec<f64>, q: &Vec<f64>| jsd(p, q),
            &GapOptions::default(),
            &pool,
        )
        .unwrap();
        assert_eq!(r.human_baseline, 1.0);
        assert_eq!(r.llm_mean, 0.5);
        assert_eq!(r.value, 0.5);
        assert!(r.t_stat.is_none());
    }
}
