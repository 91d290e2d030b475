//! Straight-line reference implementations used as test oracles. None of
//! these call into the library's numeric code.

#![allow(dead_code)]

use rand::Rng;

/// Base-2 JS distance written out as the two KL sums against the midpoint.
pub fn jsd_kl(p: &[f64], q: &[f64]) -> f64 {
    let mut kl_p = 0.0;
    let mut kl_q = 0.0;
    for i in 0..p.len() {
        let m = (p[i] + q[i]) / 2.0;
        if p[i] > 0.0 {
            kl_p += p[i] * (p[i] / m).log2();
        }
        if q[i] > 0.0 {
            kl_q += q[i] * (q[i] / m).log2();
        }
    }
    let js = (kl_p + kl_q) / 2.0;
    js.clamp(0.0, 1.0).sqrt()
}

/// Random probability vector; roughly one entry in five is exactly zero.
pub fn random_distribution<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..dim)
            .map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            return raw.iter().map(|x| x / total).collect();
        }
    }
}

/// Minimum over every monotone alignment path from (0,0) to (n-1,m-1),
/// costs summed from the start of the path.
pub fn dtw_exhaustive(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if i == a.len() - 1 && j == b.len() - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Minimum transport cost by enumerating every vertex of the
/// transportation polytope: each vertex is the unique solution supported on
/// some acyclic set of `m + n - 1` cells.
pub fn transport_brute_force(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let size = m + n - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(size);
    combinations(cells.len(), size, 0, &mut chosen, &mut |subset| {
        let basis: Vec<(usize, usize)> = subset.iter().map(|&k| cells[k]).collect();
        if let Some(flow) = solve_on_tree(supply, demand, &basis) {
            let c: f64 = basis.iter().zip(&flow).map(|(&(i, j), x)| cost[i][j] * x).sum();
            if c < best {
                best = c;
            }
        }
    });
    best
}

fn combinations(total: usize, k: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for x in start..total {
        if total - x < k - chosen.len() {
            break;
        }
        chosen.push(x);
        combinations(total, k, x + 1, chosen, f);
        chosen.pop();
    }
}

/// Peels leaves off the support graph. `None` when the support has a cycle
/// or the unique solution is infeasible.
fn solve_on_tree(supply: &[f64], demand: &[f64], basis: &[(usize, usize)]) -> Option<Vec<f64>> {
    let mut rows = supply.to_vec();
    let mut cols = demand.to_vec();
    let mut flow = vec![f64::NAN; basis.len()];
    let mut open: Vec<bool> = vec![true; basis.len()];
    let mut remaining = basis.len();
    while remaining > 0 {
        let mut progressed = false;
        for r in 0..rows.len() {
            let idx: Vec<usize> = (0..basis.len()).filter(|&k| open[k] && basis[k].0 == r).collect();
            if idx.len() == 1 {
                let k = idx[0];
                let x = rows[r];
                flow[k] = x;
                open[k] = false;
                rows[r] -= x;
                cols[basis[k].1] -= x;
                remaining -= 1;
                progressed = true;
            }
        }
        for c in 0..cols.len() {
            let idx: Vec<usize> = (0..basis.len()).filter(|&k| open[k] && basis[k].1 == c).collect();
            if idx.len() == 1 {
                let k = idx[0];
                let x = cols[c];
                flow[k] = x;
                open[k] = false;
                cols[c] -= x;
                rows[basis[k].0] -= x;
                remaining -= 1;
                progressed = true;
            }
        }
        if !progressed {
            return None;
        }
    }
    let tol = 1e-12;
    if flow.iter().any(|x| *x < -tol) {
        return None;
    }
    if rows.iter().chain(&cols).any(|r| r.abs() > 1e-9) {
        return None;
    }
    Some(flow)
}

pub fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Every intermediate term of directional entrainment for one-token
/// utterances, where WMD reduces to the distance between the two vectors.
#[derive(Debug)]
pub struct NclidOracle {
    pub d: Vec<f64>,
    pub uclid: f64,
    pub alpha_anchor: f64,
    pub alpha_coordinator: f64,
    pub alpha_cross: f64,
    pub value: f64,
}

pub fn nclid_straight(anchor: &[Vec<f64>], coord: &[Vec<f64>], k: usize) -> NclidOracle {
    let n = anchor.len();
    let mut d = Vec::new();
    for i in 0..n {
        let mut best = f64::INFINITY;
        let mut j = i;
        while j < n && j < i + k {
            best = best.min(euclid(&anchor[i], &coord[j]));
            j += 1;
        }
        d.push(best);
    }
    let uclid = d.iter().sum::<f64>() / n as f64;
    let factor = 2.0 / (n as f64 * (n as f64 - 1.0));
    let mut aa = 0.0;
    let mut cc = 0.0;
    let mut ac = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i < j {
                aa += euclid(&anchor[i], &anchor[j]);
                cc += euclid(&coord[i], &coord[j]);
            }
            if i <= j {
                ac += euclid(&anchor[i], &coord[j]);
            }
        }
    }
    let (alpha_anchor, alpha_coordinator, alpha_cross) = (factor * aa, factor * cc, factor * ac);
    NclidOracle {
        value: uclid / (alpha_anchor + alpha_coordinator + alpha_cross),
        d,
        uclid,
        alpha_anchor,
        alpha_coordinator,
        alpha_cross,
    }
}

/// Welch t statistic and degrees of freedom written from the textbook form.
pub fn welch_by_hand(a: &[f64], b: &[f64]) -> (f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    (t, df)
}

/// Two-sided Student-t tail probability for small integer df, closed form.
pub fn two_sided_p(t: f64, df: u32) -> f64 {
    use std::f64::consts::PI;
    let t = t.abs();
    match df {
        1 => 1.0 - 2.0 / PI * t.atan(),
        2 => 1.0 - t / (2.0 + t * t).sqrt(),
        3 => {
            let x = t / 3f64.sqrt();
            1.0 - 2.0 / PI * (x / (1.0 + x * x) + x.atan())
        }
        _ => panic!("no closed form wired up for df = {df}"),
    }
}

/// Pearson chi-square statistic and its upper-tail p-value.
pub fn chi_square_p(observed: &[u64], expected: &[f64]) -> (f64, f64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (*o as f64 - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("positive dof");
    (stat, dist.sf(stat))
}
