//! Word Mover's Distance and conversation-level linguistic entrainment.
//!
//! An utterance becomes a bag of its in-vocabulary tokens weighted by
//! normalized frequency. WMD is the exact optimal transport cost between two
//! bags under Euclidean embedding distances.
//!
//! Entrainment is measured with the normalized conversational linguistic
//! distance (nCLiD). For a dialogue of `N` exchanges, take one role as anchor
//! `a_1..a_N` and the other as coordinator `c_1..c_N`:
//!
//! ```text
//! d_i   = min_{i <= j <= min(i+k-1, N)} WMD(a_i, c_j)
//! uCLiD = (1/N) * sum_i d_i
//! alpha = 2/(N(N-1)) * sum_{i<j} WMD(a_i, a_j)
//!       + 2/(N(N-1)) * sum_{i<j} WMD(c_i, c_j)
//!       + 2/(N(N-1)) * sum_{i<=j} WMD(a_i, c_j)
//! nCLiD = uCLiD / alpha
//! ```
//!
//! The cross term sums `N(N+1)/2` pairs under a `2/(N(N-1))` factor; that is
//! the default, and [`AlphaNormalization::PairCount`] swaps in `2/(N(N+1))`.

pub mod cache;
pub mod embeddings;
pub mod transport;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use cache::{DistanceMatrix, WmdCache};
pub use embeddings::EmbeddingStore;

use crate::corpus::{Dialogue, Role};
use crate::error::{Error, Result};
use crate::lexicon::tokenize;

pub const DEFAULT_CONTEXT: usize = 3;

/// In-vocabulary tokens of one utterance with normalized frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceBag {
    tokens: Vec<String>,
    weights: Vec<f64>,
    oov_count: usize,
}

impl UtteranceBag {
    /// Tokenizes `text`, drops out-of-vocabulary tokens (counted in
    /// `oov_count`) and weights the rest by relative frequency. Tokens keep
    /// first-occurrence order.
    pub fn from_text(text: &str, store: &EmbeddingStore) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut order = Vec::new();
        let mut oov_count = 0;
        for t in tokenize(text) {
            if !store.contains(&t) {
                oov_count += 1;
                continue;
            }
            let c = counts.entry(t.clone()).or_insert(0);
            if *c == 0 {
                order.push(t);
            }
            *c += 1;
        }
        let total: usize = counts.values().sum();
        let weights = order
            .iter()
            .map(|t| counts[t] as f64 / total as f64)
            .collect();
        UtteranceBag {
            tokens: order,
            weights,
            oov_count,
        }
    }

    /// Bag from explicit `(token, mass)` pairs; masses are normalized.
    pub fn from_weights(pairs: &[(&str, f64)], store: &EmbeddingStore) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut masses = Vec::new();
        for (t, w) in pairs {
            if !store.contains(t) {
                return Err(Error::Embeddings(format!("`{t}` is not in the store")));
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Distribution(format!("`{t}` has mass {w}")));
            }
            let key = t.to_lowercase();
            if tokens.contains(&key) {
                return Err(Error::Distribution(format!("`{t}` listed twice")));
            }
            tokens.push(key);
            masses.push(*w);
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::Distribution("bag has no mass".into()));
        }
        Ok(UtteranceBag {
            tokens,
            weights: masses.iter().map(|w| w / total).collect(),
            oov_count: 0,
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn oov_count(&self) -> usize {
        self.oov_count
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Exact Word Mover's Distance between two non-empty bags.
pub fn wmd(a: &UtteranceBag, b: &UtteranceBag, store: &EmbeddingStore) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::UndefinedDistance(
            "WMD of an empty bag (every token out of vocabulary)".into(),
        ));
    }
    if a.tokens == b.tokens && a.weights == b.weights {
        return Ok(0.0);
    }
    let vector = |t: &str| {
        store
            .get(t)
            .ok_or_else(|| Error::Embeddings(format!("`{t}` is not in the store")))
    };
    let left = a.tokens.iter().map(|t| vector(t)).collect::<Result<Vec<_>>>()?;
    let right = b.tokens.iter().map(|t| vector(t)).collect::<Result<Vec<_>>>()?;
    let cost: Vec<f64> = left
        .iter()
        .flat_map(|x| right.iter().map(move |y| embeddings::euclidean(x, y)))
        .collect();
    Ok(transport::solve(&a.weights, &b.weights, &cost)?.cost)
}

/// `min` of `WMD(anchor, coordinator[j])` over the window
/// `j in [i, min(i + k - 1, N - 1)]` (0-based).
pub fn min_context_distance(
    i: usize,
    anchor: &UtteranceBag,
    coordinator: &[UtteranceBag],
    k: usize,
    store: &EmbeddingStore,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::EmptyInput("context window k must be at least 1".into()));
    }
    if i >= coordinator.len() {
        return Err(Error::EmptyInput(format!(
            "no coordinator turn in window starting at {i} (N = {})",
            coordinator.len()
        )));
    }
    let end = (i + k).min(coordinator.len());
    let mut best = f64::INFINITY;
    for c in &coordinator[i..end] {
        best = best.min(wmd(anchor, c, store)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaNormalization {
    /// `2/(N(N-1))` on all three terms.
    #[default]
    AsPrinted,
    /// `2/(N(N+1))` on the cross term, matching its pair count.
    PairCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntrainmentOptions {
    pub k: usize,
    pub alpha: AlphaNormalization,
}

impl Default for EntrainmentOptions {
    fn default() -> Self {
        EntrainmentOptions {
            k: DEFAULT_CONTEXT,
            alpha: AlphaNormalization::AsPrinted,
        }
    }
}

/// All pairwise WMDs among the first `N` buyer and first `N` seller turns,
/// where `N` is the number of complete exchanges. Rows `0..N` are buyer
/// turns, rows `N..2N` seller turns.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeDistances {
    n: usize,
    matrix: DistanceMatrix,
}

impl ExchangeDistances {
    pub fn exchanges(&self) -> usize {
        self.n
    }

    fn offset(&self, role: Role) -> usize {
        match role {
            Role::Buyer => 0,
            Role::Seller => self.n,
        }
    }

    /// WMD between turn `i` of `r1` and turn `j` of `r2` (0-based).
    pub fn get(&self, r1: Role, i: usize, r2: Role, j: usize) -> f64 {
        self.matrix.get(self.offset(r1) + i, self.offset(r2) + j)
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }
}

fn exchange_bags(dialogue: &Dialogue, store: &EmbeddingStore) -> Result<(usize, Vec<UtteranceBag>)> {
    let buyer: Vec<_> = dialogue.turns_by(Role::Buyer).collect();
    let seller: Vec<_> = dialogue.turns_by(Role::Seller).collect();
    let n = buyer.len().min(seller.len());
    if n < 2 {
        return Err(Error::TooFewSamples(format!(
            "dialogue {} has {n} complete exchange(s), nCLiD needs 2",
            dialogue.id
        )));
    }
    let mut bags = Vec::with_capacity(2 * n);
    for u in buyer[..n].iter().chain(&seller[..n]) {
        let bag = UtteranceBag::from_text(&u.text, store);
        if bag.is_empty() {
            return Err(Error::UndefinedDistance(format!(
                "dialogue {} turn {} has no in-vocabulary tokens",
                dialogue.id, u.index
            )));
        }
        bags.push(bag);
    }
    Ok((n, bags))
}

/// Computes (or fetches from `cache`) the exchange distance matrix.
pub fn exchange_distances(
    dialogue: &Dialogue,
    store: &EmbeddingStore,
    cache: Option<&WmdCache>,
) -> Result<ExchangeDistances> {
    let (n, bags) = exchange_bags(dialogue, store)?;
    let key = cache.map(|_| {
        let texts: Vec<&str> = dialogue
            .turns_by(Role::Buyer)
            .take(n)
            .chain(dialogue.turns_by(Role::Seller).take(n))
            .map(|u| u.text.as_str())
            .collect();
        WmdCache::key(store.fingerprint(), &texts)
    });
    if let (Some(c), Some(k)) = (cache, &key) {
        if let Some(matrix) = c.get(k).filter(|m| m.size() == 2 * n) {
            return Ok(ExchangeDistances { n, matrix });
        }
    }
    let mut matrix = DistanceMatrix::zeros(2 * n);
    for i in 0..2 * n {
        for j in i + 1..2 * n {
            matrix.set_symmetric(i, j, wmd(&bags[i], &bags[j], store)?);
        }
    }
    if let (Some(c), Some(k)) = (cache, &key) {
        if let Err(e) = c.put(k, &matrix) {
            log::warn!("could not write WMD cache entry: {e}");
        }
    }
    Ok(ExchangeDistances { n, matrix })
}

/// Every intermediate quantity of one directional nCLiD evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NclidTerms {
    pub anchor: Role,
    pub exchanges: usize,
    /// Windowed minimum distance per anchor turn.
    pub d: Vec<f64>,
    pub uclid: f64,
    pub alpha_anchor: f64,
    pub alpha_coordinator: f64,
    pub alpha_cross: f64,
    pub alpha: f64,
    pub value: f64,
    /// `alpha == 0`: the value is reported as 0.
    pub degenerate: bool,
}

pub fn nclid_terms(dist: &ExchangeDistances, anchor: Role, opts: EntrainmentOptions) -> Result<NclidTerms> {
    if opts.k == 0 {
        return Err(Error::EmptyInput("context window k must be at least 1".into()));
    }
    let n = dist.n;
    let coord = anchor.other();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            (i..(i + opts.k).min(n))
                .map(|j| dist.get(anchor, i, coord, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let uclid = d.iter().sum::<f64>() / n as f64;

    let nf = n as f64;
    let within_factor = 2.0 / (nf * (nf - 1.0));
    let cross_factor = match opts.alpha {
        AlphaNormalization::AsPrinted => within_factor,
        AlphaNormalization::PairCount => 2.0 / (nf * (nf + 1.0)),
    };
    let (mut sa, mut sc, mut sx) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            sa += dist.get(anchor, i, anchor, j);
            sc += dist.get(coord, i, coord, j);
        }
        for j in i..n {
            sx += dist.get(anchor, i, coord, j);
        }
    }
    let (alpha_anchor, alpha_coordinator, alpha_cross) =
        (within_factor * sa, within_factor * sc, cross_factor * sx);
    let alpha = alpha_anchor + alpha_coordinator + alpha_cross;
    let degenerate = alpha == 0.0;
    let value = if degenerate { 0.0 } else { uclid / alpha };
    Ok(NclidTerms {
        anchor,
        exchanges: n,
        d,
        uclid,
        alpha_anchor,
        alpha_coordinator,
        alpha_cross,
        alpha,
        value,
        degenerate,
    })
}

/// Directional nCLiD with `anchor` as the anchor role.
pub fn nclid(dialogue: &Dialogue, anchor: Role, store: &EmbeddingStore, opts: EntrainmentOptions) -> Result<NclidTerms> {
    let dist = exchange_distances(dialogue, store, None)?;
    let terms = nclid_terms(&dist, anchor, opts)?;
    if terms.degenerate {
        log::warn!(
            "dialogue {}: alpha is 0 with {} as anchor, nCLiD reported as 0",
            dialogue.id,
            anchor
        );
    }
    Ok(terms)
}

/// Dyadic entrainment: mean of the two directional nCLiD values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrainmentScore {
    pub dialogue_id: String,
    pub value: f64,
    pub buyer_as_anchor: f64,
    pub seller_as_anchor: f64,
    pub degenerate: bool,
}

pub fn dyadic_le(
    dialogue: &Dialogue,
    store: &EmbeddingStore,
    opts: EntrainmentOptions,
    cache: Option<&WmdCache>,
) -> Result<EntrainmentScore> {
    let dist = exchange_distances(dialogue, store, cache)?;
    let b = nclid_terms(&dist, Role::Buyer, opts)?;
    let s = nclid_terms(&dist, Role::Seller, opts)?;
    let degenerate = b.degenerate || s.degenerate;
    if degenerate {
        log::warn!("dialogue {}: alpha is 0, nCLiD reported as 0", dialogue.id);
    }
    Ok(EntrainmentScore {
        dialogue_id: dialogue.id.clone(),
        value: (b.value + s.value) / 2.0,
        buyer_as_anchor: b.value,
        seller_as_anchor: s.value,
        degenerate,
    })
}
