//! Exact Markov-chain quantities: hitting times, cover times on small graphs,
//! the Matthews bound and the hitting/cover sandwich.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{self, CgOptions};
use crate::resistance::ResistanceMetric;

pub const DEFAULT_DENSE_HITTING_BUDGET: usize = 2000;
/// Default vertex cap for the exact cover-time recursion.
pub const DEFAULT_EXACT_COVER_CAP: usize = 16;
const HARD_EXACT_COVER_CAP: usize = 20;

/// Expected hitting times `h(x, y) = E^x τ_y` for every ordered pair.
#[derive(Debug, Clone)]
pub struct HittingProfile {
    n: usize,
    table: Vec<f64>,
    t_hit: f64,
    witness: (usize, usize),
}

impl HittingProfile {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.n + y]
    }

    pub fn t_hit(&self) -> f64 {
        self.t_hit
    }

    /// `(x, y)` attaining `t_hit` (first in row-major order).
    pub fn witness(&self) -> (usize, usize) {
        self.witness
    }

    /// Largest expected hitting time from `x`.
    pub fn max_from(&self, x: usize) -> f64 {
        (0..self.n).map(|y| self.get(x, y)).fold(0.0, f64::max)
    }

    /// Largest relative deviation from `h(x,y) + h(y,x) = μ(G) R(x,y)`.
    pub fn commute_residual(&self, g: &WeightedGraph, m: &ResistanceMetric) -> f64 {
        let vol = g.volume();
        let mut worst = 0.0f64;
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                let commute = self.get(x, y) + self.get(y, x);
                let target = vol * m.get(x, y);
                worst = worst.max((commute - target).abs() / target);
            }
        }
        worst
    }
}

/// Transition matrix `p(x, y) = μ_xy / μ_x`.
pub fn transition_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        let mx = g.vertex_weight(x);
        for (&y, &w) in g.neighbors(x).iter().zip(g.neighbor_weights(x)) {
            p[(x, y)] = w / mx;
        }
    }
    p
}

/// All hitting times from the fundamental matrix
/// `Z = (I − P + 𝟙πᵀ)⁻¹`, `h(x, y) = (Z_yy − Z_xy) / π_y`. Each target column
/// is then checked against `(I − P_{−y}) h = 1`.
pub fn hitting_times(g: &WeightedGraph) -> Result<HittingProfile> {
    hitting_times_with_budget(g, DEFAULT_DENSE_HITTING_BUDGET)
}

pub fn hitting_times_with_budget(g: &WeightedGraph, budget: usize) -> Result<HittingProfile> {
    let n = g.vertex_count();
    if n > budget {
        return Err(Error::BudgetExceeded(format!(
            "dense hitting times need n ≤ {budget}, got {n}; use hitting columns"
        )));
    }
    if n == 1 {
        return Ok(HittingProfile { n, table: vec![0.0], t_hit: 0.0, witness: (0, 0) });
    }
    let vol = g.volume();
    let pi: Vec<f64> = g.vertex_weights().iter().map(|w| w / vol).collect();
    let mut a = -transition_matrix(g);
    for x in 0..n {
        a[(x, x)] += 1.0;
        for y in 0..n {
            a[(x, y)] += pi[y];
        }
    }
    let z = a
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("fundamental matrix is singular".into()))?;
    let mut table = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            if x != y {
                table[x * n + y] = (z[(y, y)] - z[(x, y)]) / pi[y];
            }
        }
    }
    let residual = (0..n)
        .into_par_iter()
        .map(|y| column_residual(g, y, |x| table[x * n + y]))
        .reduce(|| 0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::NumericalFailure(format!("hitting-time residual {residual:.3e}")));
    }
    let mut t_hit = 0.0;
    let mut witness = (0, 0);
    for x in 0..n {
        for y in 0..n {
            if table[x * n + y] > t_hit {
                t_hit = table[x * n + y];
                witness = (x, y);
            }
        }
    }
    Ok(HittingProfile { n, table, t_hit, witness })
}

/// Relative residual of `h(x) − 1 − Σ_z p(x,z) h(z) = 0` for `x ≠ y`.
fn column_residual(g: &WeightedGraph, y: usize, h: impl Fn(usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for x in 0..g.vertex_count() {
        if x == y {
            continue;
        }
        let mx = g.vertex_weight(x);
        let mean: f64 = g
            .neighbors(x)
            .iter()
            .zip(g.neighbor_weights(x))
            .map(|(&z, &w)| w / mx * if z == y { 0.0 } else { h(z) })
            .sum();
        worst = worst.max((h(x) - 1.0 - mean).abs());
        scale = scale.max(h(x).abs());
    }
    worst / scale
}

/// Hitting times to one target, `h(·, y)`, from the grounded system
/// `L_{−y} h = μ`, solved by sparse factorization. Suitable for graphs
/// beyond the dense budget.
pub fn hitting_column(g: &WeightedGraph, target: usize, cg: CgOptions) -> Result<Vec<f64>> {
    let factor = linalg::GroundedFactor::new(g, target)?;
    factor.solve_checked(g, g.vertex_weights(), cg.tolerance)
}

/// Lower bound on `t_hit` from hitting columns at a few targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSweep {
    /// `max h(x, y)` over the evaluated targets `y`.
    pub t_hit_lower: f64,
    pub witness: (usize, usize),
    pub targets: Vec<usize>,
    /// Largest exact resistance `(h(a,b) + h(b,a)) / μ(G)` among evaluated
    /// target pairs; a lower bound on the resistance diameter.
    pub diam_lower: f64,
    pub diam_witness: (usize, usize),
}

/// Double sweep: evaluate columns at `seeds`, then repeatedly at the source
/// that is slowest to reach the last target, for `rounds` extra targets.
pub fn hitting_sweep(g: &WeightedGraph, seeds: &[usize], rounds: usize, cg: CgOptions) -> Result<HittingSweep> {
    let n = g.vertex_count();
    let mut columns: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut queue: Vec<usize> = seeds.to_vec();
    queue.dedup();
    let mut extra = 0;
    while let Some(y) = queue.pop() {
        if columns.iter().any(|(t, _)| *t == y) {
            continue;
        }
        g.check_vertex(y)?;
        let col = hitting_column(g, y, cg)?;
        let far = argmax(&col);
        columns.push((y, col));
        if queue.is_empty() && extra < rounds {
            extra += 1;
            queue.push(far);
        }
    }
    if n == 1 || columns.is_empty() {
        return Ok(HittingSweep {
            t_hit_lower: 0.0,
            witness: (0, 0),
            targets: columns.iter().map(|c| c.0).collect(),
            diam_lower: 0.0,
            diam_witness: (0, 0),
        });
    }
    let mut best = (0.0, (0, 0));
    for (y, col) in &columns {
        let x = argmax(col);
        if col[x] > best.0 {
            best = (col[x], (x, *y));
        }
    }
    let vol = g.volume();
    let mut diam = (0.0, (0, 0));
    for (i, (a, col_a)) in columns.iter().enumerate() {
        for (b, col_b) in &columns[i + 1..] {
            let r = (col_a[*b] + col_b[*a]) / vol;
            if r > diam.0 {
                diam = (r, (*a.min(b), *a.max(b)));
            }
        }
    }
    Ok(HittingSweep {
        t_hit_lower: best.0,
        witness: best.1,
        targets: columns.iter().map(|c| c.0).collect(),
        diam_lower: diam.0,
        diam_witness: diam.1,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Exact expected cover times from every start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCover {
    pub per_start: Vec<f64>,
    pub t_cov: f64,
    pub worst_start: usize,
    /// Number of (vertex, visited set) states solved.
    pub state_count: usize,
}

pub fn exact_cover_time(g: &WeightedGraph) -> Result<ExactCover> {
    exact_cover_time_with_cap(g, DEFAULT_EXACT_COVER_CAP)
}

/// Expected remaining time `E[v, S]` over connected visited sets `S ∋ v`,
/// processed from the full set downwards. Inside one `S`, moves that stay in
/// `S` couple the unknowns, so each set costs one `|S| × |S|` solve; moves
/// leaving `S` refer to strictly larger sets already done.
pub fn exact_cover_time_with_cap(g: &WeightedGraph, cap: usize) -> Result<ExactCover> {
    let n = g.vertex_count();
    if n > cap.min(HARD_EXACT_COVER_CAP) {
        return Err(Error::BudgetExceeded(format!(
            "exact cover time supports at most {} vertices, got {n}",
            cap.min(HARD_EXACT_COVER_CAP)
        )));
    }
    if n == 1 {
        return Ok(ExactCover { per_start: vec![0.0], t_cov: 0.0, worst_start: 0, state_count: 1 });
    }
    let full: u32 = (1u32 << n) - 1;
    let adjacency: Vec<u32> =
        (0..n).map(|x| g.neighbors(x).iter().fold(0u32, |acc, &y| acc | (1 << y))).collect();
    let connected = |s: u32| {
        let start = s.trailing_zeros() as usize;
        let mut seen = 1u32 << start;
        let mut frontier = seen;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = adjacency[v] & s & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == s
    };
    let probs: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|x| {
            let mx = g.vertex_weight(x);
            g.neighbors(x).iter().zip(g.neighbor_weights(x)).map(|(&y, &w)| (y, w / mx)).collect()
        })
        .collect();
    let mut value = vec![0.0f64; (full as usize + 1) * n];
    let mut states = n;
    let mut members = Vec::with_capacity(n);
    for s in (1..full).rev() {
        if !connected(s) {
            continue;
        }
        members.clear();
        members.extend((0..n).filter(|&v| s & (1 << v) != 0));
        let k = members.len();
        states += k;
        let mut local = vec![usize::MAX; n];
        for (i, &v) in members.iter().enumerate() {
            local[v] = i;
        }
        let mut a = DMatrix::<f64>::identity(k, k);
        let mut b = DVector::<f64>::from_element(k, 1.0);
        for (i, &v) in members.iter().enumerate() {
            for &(w, p) in &probs[v] {
                if s & (1 << w) != 0 {
                    a[(i, local[w])] -= p;
                } else {
                    let next = (s | (1 << w)) as usize;
                    b[i] += p * value[next * n + w];
                }
            }
        }
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::NumericalFailure(format!("singular cover system for set {s:#b}")))?;
        for (i, &v) in members.iter().enumerate() {
            value[s as usize * n + v] = x[i];
        }
    }
    let per_start: Vec<f64> = (0..n).map(|v| value[(1usize << v) * n + v]).collect();
    let worst_start = argmax(&per_start);
    Ok(ExactCover { t_cov: per_start[worst_start], worst_start, per_start, state_count: states })
}

/// `t_hit · (ln n + 1)`.
pub fn matthews_upper(t_hit: f64, n: usize) -> f64 {
    t_hit * ((n as f64).ln() + 1.0)
}

/// Outcome of checking `t_hit ≤ t_cov ≤ 2 t_hit ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    /// `t_cov − t_hit`.
    pub lower_slack: f64,
    /// `2 t_hit ln n − t_cov`.
    pub upper_slack: f64,
    /// The upper side is only asserted for `n ≥ 3`.
    pub upper_asserted: bool,
    pub passed: bool,
}

pub fn sandwich_check(t_cov: f64, t_hit: f64, n: usize) -> SandwichCheck {
    sandwich_check_with_slack(t_cov, t_hit, n, 0.0)
}

/// Same check with an absolute allowance on both sides, for estimates that
/// carry Monte Carlo error.
pub fn sandwich_check_with_slack(t_cov: f64, t_hit: f64, n: usize, allowance: f64) -> SandwichCheck {
    let lower_slack = t_cov - t_hit;
    let upper_slack = 2.0 * t_hit * (n as f64).ln() - t_cov;
    let upper_asserted = n >= 3;
    let tol = allowance + 1e-9 * t_cov.abs().max(1.0);
    let passed = lower_slack >= -tol && (!upper_asserted || upper_slack >= -tol);
    SandwichCheck { lower_slack, upper_slack, upper_asserted, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{complete, cycle, gen_sierpinski, path, star};
    use crate::resistance::resistance_matrix;

    const TOL: f64 = 1e-8;

    #[test]
    fn path_hitting_times() {
        let h = hitting_times(&path(3).unwrap()).unwrap();
        assert!((h.get(0, 2) - 4.0).abs() < TOL);
        assert!((h.get(1, 0) - 3.0).abs() < TOL);
        assert!((h.get(0, 1) - 1.0).abs() < TOL);
        assert!((h.t_hit() - 4.0).abs() < TOL);
        assert!((h.get(0, 1) + h.get(1, 0) - 4.0).abs() < TOL);
    }

    #[test]
    fn triangle_hitting_times() {
        let h = hitting_times(&complete(3).unwrap()).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let expect = if x == y { 0.0 } else { 2.0 };
                assert!((h.get(x, y) - expect).abs() < TOL);
            }
        }
    }

    #[test]
    fn commute_identity_on_weighted_gasket() {
        let g = gen_sierpinski(2, [0.3, 4.0], 8).unwrap();
        let h = hitting_times(&g).unwrap();
        assert!(h.commute_residual(&g, &resistance_matrix(&g).unwrap()) < 1e-10);
    }

    #[test]
    fn columns_match_dense_profile() {
        let g = gen_sierpinski(2, [0.5, 2.0], 1).unwrap();
        let h = hitting_times(&g).unwrap();
        for y in [0, 4, 9] {
            let col = hitting_column(&g, y, CgOptions::default()).unwrap();
            for x in 0..g.vertex_count() {
                assert!((col[x] - h.get(x, y)).abs() < 1e-7 * h.t_hit());
            }
        }
        let sweep = hitting_sweep(&g, &[0], 3, CgOptions::default()).unwrap();
        assert!(sweep.t_hit_lower <= h.t_hit() + 1e-7);
        let m = resistance_matrix(&g).unwrap();
        let (a, b) = sweep.diam_witness;
        assert!((sweep.diam_lower - m.get(a, b)).abs() < 1e-8);
    }

    #[test]
    fn exact_cover_examples() {
        let k3 = exact_cover_time(&complete(3).unwrap()).unwrap();
        assert!(k3.per_start.iter().all(|v| (v - 3.0).abs() < TOL));
        let p3 = exact_cover_time(&path(3).unwrap()).unwrap();
        for (v, e) in p3.per_start.iter().zip([4.0, 5.0, 4.0]) {
            assert!((v - e).abs() < TOL);
        }
        assert_eq!(p3.worst_start, 1);
        assert!((exact_cover_time(&path(2).unwrap()).unwrap().t_cov - 1.0).abs() < TOL);
    }

    #[test]
    fn cycle_cover_closed_form() {
        for n in 3..=12 {
            let c = exact_cover_time(&cycle(n).unwrap()).unwrap();
            let expect = (n * (n - 1)) as f64 / 2.0;
            assert!(c.per_start.iter().all(|v| (v - expect).abs() < TOL * expect), "C_{n}");
        }
        let h = hitting_times(&cycle(8).unwrap()).unwrap();
        assert!((h.t_hit() - 16.0).abs() < TOL);
    }

    #[test]
    fn complete_graph_coupon_collector() {
        for n in 3..=10usize {
            let expect: f64 = (n - 1) as f64 * (1..n).map(|k| 1.0 / k as f64).sum::<f64>();
            let c = exact_cover_time(&complete(n).unwrap()).unwrap();
            assert!((c.t_cov - expect).abs() < TOL * expect);
        }
    }

    #[test]
    fn cover_exceeds_farthest_hitting_time() {
        let g = star(4).unwrap();
        let c = exact_cover_time(&g).unwrap();
        let h = hitting_times(&g).unwrap();
        for x in 0..g.vertex_count() {
            assert!(c.per_start[x] + TOL >= h.max_from(x));
            assert!(c.per_start[x] <= matthews_upper(h.t_hit(), g.vertex_count()) + TOL);
        }
    }

    #[test]
    fn cover_budget_is_enforced() {
        assert!(matches!(exact_cover_time(&path(17).unwrap()), Err(Error::BudgetExceeded(_))));
        assert!(matches!(exact_cover_time_with_cap(&path(6).unwrap(), 5), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn matthews_and_sandwich_examples() {
        assert!((matthews_upper(2.0, 3) - 4.197).abs() < 1e-3);
        assert!((matthews_upper(4.0, 3) - 8.394).abs() < 1e-3);
        assert!((matthews_upper(1.0, 2) - 1.693).abs() < 1e-3);
        assert!(sandwich_check(3.0, 2.0, 3).passed);
        assert!(sandwich_check(5.0, 4.0, 3).passed);
        assert!(sandwich_check(28.0, 16.0, 8).passed);
        assert!(!sandwich_check(1.0, 2.0, 3).passed);
        assert!(!sandwich_check(10.0, 2.0, 3).passed);
        let s = sandwich_check(1.0, 1.0, 2);
        assert!(s.passed && !s.upper_asserted);
    }
}
