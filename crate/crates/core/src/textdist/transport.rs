//! Exact solver for the balanced transportation problem.
//!
//! Transportation simplex on a spanning-tree basis: a northwest-corner start
//! gives `m + n - 1` basic cells, node potentials come from a walk over the
//! basis tree, and the entering cell closes a unique cycle along which flow
//! is shifted. Entering cells follow Dantzig's rule, falling back to Bland's
//! rule after a run of degenerate pivots so the method cannot cycle.

use crate::error::{Error, Result};

/// Relative tolerance for reduced costs and mass balance.
const TOLERANCE: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// Optimal objective value.
    pub cost: f64,
    /// Non-zero flows as `(source, sink, amount)`.
    pub flows: Vec<(usize, usize, f64)>,
}

/// Minimizes `sum(cost[i][j] * x[i][j])` subject to row sums `supply` and
/// column sums `demand`. `cost` is row-major `supply.len() x demand.len()`.
/// Both marginals must be non-negative with equal totals (within a relative
/// 1e-9); the demand side is rescaled to the exact supply total.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("transport problem with an empty side".into()));
    }
    if cost.len() != m * n {
        return Err(Error::SupportMismatch(cost.len(), m * n));
    }
    if supply.iter().chain(demand).any(|x| !x.is_finite() || *x < 0.0)
        || cost.iter().any(|c| !c.is_finite())
    {
        return Err(Error::Distribution("transport inputs must be finite and non-negative".into()));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if total_s <= 0.0 || (total_s - total_d).abs() > 1e-9 * total_s.max(total_d) {
        return Err(Error::Distribution(format!(
            "unbalanced transport problem: supply {total_s}, demand {total_d}"
        )));
    }
    let demand: Vec<f64> = demand.iter().map(|d| d * total_s / total_d).collect();
    Simplex::new(supply, &demand, cost).run()
}

struct Simplex<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    flow: Vec<f64>,
    basic: Vec<bool>,
    eps: f64,
}

impl<'a> Simplex<'a> {
    fn new(supply: &[f64], demand: &[f64], cost: &'a [f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut flow = vec![0.0; m * n];
        let mut basic = vec![false; m * n];
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(d[j]);
            flow[i * n + j] = x;
            basic[i * n + j] = true;
            s[i] -= x;
            d[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && s[i] <= d[j]) {
                s[i] = 0.0;
                i += 1;
            } else {
                d[j] = 0.0;
                j += 1;
            }
        }
        let scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
        Simplex {
            m,
            n,
            cost,
            flow,
            basic,
            eps: TOLERANCE * scale,
        }
    }

    /// Basis-tree adjacency over nodes `0..m` (rows) and `m..m+n` (columns).
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for i in 0..self.m {
            for j in 0..self.n {
                if self.basic[i * self.n + j] {
                    adj[i].push(self.m + j);
                    adj[self.m + j].push(i);
                }
            }
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<usize>]) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.m, self.n);
        let mut pot = vec![f64::NAN; m + n];
        pot[0] = 0.0;
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            for &next in &adj[node] {
                if pot[next].is_nan() {
                    let (i, j) = if node < m { (node, next - m) } else { (next, node - m) };
                    let c = self.cost[i * n + j];
                    pot[next] = c - pot[node];
                    stack.push(next);
                }
            }
        }
        (pot[..m].to_vec(), pot[m..].to_vec())
    }

    /// Tree path from row `i` to column `j` as a list of cells, starting at
    /// the cell touching column `j`.
    fn path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Vec<(usize, usize)> {
        let (m, target) = (self.m, self.m + j);
        let mut parent = vec![usize::MAX; m + self.n];
        parent[i] = i;
        let mut stack = vec![i];
        while let Some(node) = stack.pop() {
            if node == target {
                break;
            }
            for &next in &adj[node] {
                if parent[next] == usize::MAX {
                    parent[next] = node;
                    stack.push(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = target;
        while node != i {
            let p = parent[node];
            cells.push(if p < m { (p, node - m) } else { (node, p - m) });
            node = p;
        }
        cells
    }

    fn run(mut self) -> Result<TransportPlan> {
        let (m, n) = (self.m, self.n);
        let limit = 50 * (m + n) * (m + n) + 1000;
        let mut degenerate = 0usize;
        for _ in 0..limit {
            let adj = self.adjacency();
            let (u, v) = self.potentials(&adj);
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<(usize, usize, f64)> = None;
            'scan: for i in 0..m {
                for j in 0..n {
                    if self.basic[i * n + j] {
                        continue;
                    }
                    let r = self.cost[i * n + j] - u[i] - v[j];
                    if r < -self.eps && entering.is_none_or(|(_, _, best)| r < best) {
                        entering = Some((i, j, r));
                        if bland {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((ei, ej, _)) = entering else {
                return Ok(self.plan());
            };
            let cycle = self.path(&adj, ei, ej);
            // cells at even positions of the path lose flow, odd ones gain
            let mut leave = 0;
            for k in (0..cycle.len()).step_by(2) {
                let (a, b) = cycle[k];
                let (la, lb) = cycle[leave];
                let f = self.flow[a * n + b];
                let lf = self.flow[la * n + lb];
                if f < lf || (f == lf && (a, b) < (la, lb)) {
                    leave = k;
                }
            }
            let (li, lj) = cycle[leave];
            let theta = self.flow[li * n + lj];
            degenerate = if theta <= 0.0 { degenerate + 1 } else { 0 };
            for (k, &(a, b)) in cycle.iter().enumerate() {
                let f = &mut self.flow[a * n + b];
                *f = if k % 2 == 0 { (*f - theta).max(0.0) } else { *f + theta };
            }
            self.flow[li * n + lj] = 0.0;
            self.basic[li * n + lj] = false;
            self.flow[ei * n + ej] = theta;
            self.basic[ei * n + ej] = true;
        }
        Err(Error::UndefinedDistance(format!(
            "transport simplex did not converge in {limit} pivots"
        )))
    }

    fn plan(&self) -> TransportPlan {
        let mut flows = Vec::new();
        let mut cost = 0.0;
        for i in 0..self.m {
            for j in 0..self.n {
                let f = self.flow[i * self.n + j];
                if f > 0.0 {
                    cost += f * self.cost[i * self.n + j];
                    flows.push((i, j, f));
                }
            }
        }
        TransportPlan { cost, flows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marginals(plan: &TransportPlan, m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut r = vec![0.0; m];
        let mut c = vec![0.0; n];
        for &(i, j, f) in &plan.flows {
            r[i] += f;
            c[j] += f;
        }
        (r, c)
    }

    #[test]
    fn single_cell() {
        let p = solve(&[1.0], &[1.0], &[2.5]).unwrap();
        assert_eq!(p.cost, 2.5);
    }

    #[test]
    fn one_to_two_split() {
        let p = solve(&[1.0], &[0.5, 0.5], &[1.0, 3.0]).unwrap();
        assert!((p.cost - 2.0).abs() < 1e-15);
    }

    #[test]
    fn prefers_cheap_diagonal() {
        // northwest corner starts on the expensive diagonal
        let cost = [10.0, 1.0, 1.0, 10.0];
        let p = solve(&[0.5, 0.5], &[0.5, 0.5], &cost).unwrap();
        assert!((p.cost - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classic_textbook_instance() {
        // 3x4 instance with known optimum 743
        let supply = [7.0, 9.0, 18.0];
        let demand = [5.0, 8.0, 7.0, 14.0];
        let cost = [19.0, 30.0, 50.0, 10.0, 70.0, 30.0, 40.0, 60.0, 40.0, 8.0, 70.0, 20.0];
        let p = solve(&supply, &demand, &cost).unwrap();
        assert!((p.cost - 743.0).abs() < 1e-9, "{}", p.cost);
        let (r, c) = marginals(&p, 3, 4);
        for (a, b) in r.iter().zip(&supply) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in c.iter().zip(&demand) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn heavily_degenerate_instance_terminates() {
        let n = 12;
        let w = vec![1.0 / n as f64; n];
        let cost: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 13) as f64).collect();
        let p = solve(&w, &w, &cost).unwrap();
        assert!(p.cost >= 0.0);
        let (r, c) = marginals(&p, n, n);
        assert!(r.iter().chain(&c).all(|x| (x - 1.0 / n as f64).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve(&[], &[1.0], &[]).is_err());
        assert!(solve(&[1.0], &[2.0], &[1.0]).is_err());
        assert!(solve(&[1.0], &[1.0], &[1.0, 2.0]).is_err());
        assert!(solve(&[-1.0, 2.0], &[1.0], &[1.0, 1.0]).is_err());
    }
}
