//! Effective-resistance metric.
//!
//! Resistances come from the Laplacian pseudoinverse,
//! `R(x, y) = L⁺_xx + L⁺_yy − 2 L⁺_xy`, computed densely for graphs within
//! the memory budget. Larger graphs use one grounded conjugate-gradient solve
//! per vertex, which yields the grounded Green matrix and hence every pair.
//!
//! A computed [`ResistanceMetric`] is immutable and shared read-only by the
//! geometry, GFF and classifier code.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gff::pivoted_cholesky;
use crate::graph::WeightedGraph;
use crate::linalg::{self, CgOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResistanceMode {
    DensePseudoinverse,
    PerPairSolve,
}

#[derive(Debug, Clone, Copy)]
pub struct ResistanceOptions {
    /// Force a mode; `None` picks dense within the budget.
    pub mode: Option<ResistanceMode>,
    /// Largest vertex count handled by the dense route.
    pub dense_budget: usize,
    /// Largest vertex count for which a full table is built at all.
    pub table_budget: usize,
    pub cg: CgOptions,
}

impl Default for ResistanceOptions {
    fn default() -> Self {
        Self { mode: None, dense_budget: 4000, table_budget: 12_000, cg: CgOptions::default() }
    }
}

/// Pairwise effective resistances of one graph.
#[derive(Debug, Clone)]
pub struct ResistanceMetric {
    n: usize,
    table: Vec<f64>,
    mode: ResistanceMode,
}

/// Compute the full table with default options.
pub fn resistance_matrix(g: &WeightedGraph) -> Result<ResistanceMetric> {
    ResistanceMetric::compute(g, ResistanceOptions::default())
}

impl ResistanceMetric {
    pub fn compute(g: &WeightedGraph, options: ResistanceOptions) -> Result<Self> {
        let n = g.vertex_count();
        if n == 1 {
            return Ok(Self { n, table: vec![0.0], mode: ResistanceMode::DensePseudoinverse });
        }
        let mode = match options.mode {
            Some(ResistanceMode::DensePseudoinverse) if n > options.dense_budget => {
                return Err(Error::BudgetExceeded(format!(
                    "dense resistance needs n ≤ {}, got {n}; use per-pair solves",
                    options.dense_budget
                )))
            }
            Some(m) => m,
            None if n <= options.dense_budget => ResistanceMode::DensePseudoinverse,
            None => ResistanceMode::PerPairSolve,
        };
        if n > options.table_budget {
            return Err(Error::BudgetExceeded(format!(
                "resistance table for {n} vertices exceeds budget {}",
                options.table_budget
            )));
        }
        let mut table = match mode {
            ResistanceMode::DensePseudoinverse => {
                let pinv = linalg::laplacian_pseudoinverse(g)?;
                let mut t = vec![0.0; n * n];
                for x in 0..n {
                    for y in 0..n {
                        t[x * n + y] = pinv[(x, x)] + pinv[(y, y)] - 2.0 * pinv[(x, y)];
                    }
                }
                t
            }
            ResistanceMode::PerPairSolve => {
                // grounded Green matrix G(·, y) = L_{−0}^{-1} e_y, one solve per column
                let columns: Vec<Vec<f64>> = (1..n)
                    .into_par_iter()
                    .map(|y| {
                        let mut rhs = vec![0.0; n];
                        rhs[y] = 1.0;
                        linalg::solve_grounded_robust(g, 0, &rhs, options.cg)
                    })
                    .collect::<Result<_>>()?;
                let green = |x: usize, y: usize| if y == 0 { 0.0 } else { columns[y - 1][x] };
                let mut t = vec![0.0; n * n];
                for x in 0..n {
                    for y in 0..n {
                        let gxy = 0.5 * (green(x, y) + green(y, x));
                        t[x * n + y] = green(x, x) + green(y, y) - 2.0 * gxy;
                    }
                }
                t
            }
        };
        for x in 0..n {
            table[x * n + x] = 0.0;
            for y in (x + 1)..n {
                let r = 0.5 * (table[x * n + y] + table[y * n + x]);
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::NumericalFailure(format!("resistance R({x}, {y}) = {r}")));
                }
                table[x * n + y] = r;
                table[y * n + x] = r;
            }
        }
        snap_ties(&mut table, n);
        Ok(Self { n, table, mode })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> ResistanceMode {
        self.mode
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.table[x * self.n..(x + 1) * self.n]
    }

    /// Maximum resistance and a witness pair `(x, y)` with `x < y`
    /// (lexicographically first among maximizers).
    pub fn diameter(&self) -> (f64, (usize, usize)) {
        let mut best = (0.0, (0, 0));
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                if self.get(x, y) > best.0 {
                    best = (self.get(x, y), (x, y));
                }
            }
        }
        best
    }

    /// Smallest resistance between distinct vertices.
    pub fn min_positive(&self) -> f64 {
        let mut best = f64::INFINITY;
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                best = best.min(self.get(x, y));
            }
        }
        best
    }

    /// Closed ball `{y : R(x, y) ≤ r}` in ascending vertex order.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.n).filter(|&y| self.get(x, y) <= r).collect()
    }

    /// CSV rows `x,y,R` for `x < y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,resistance_ohms\n");
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                let _ = writeln!(out, "{x},{y},{}", self.get(x, y));
            }
        }
        out
    }
}

/// Unify values that differ only by rounding noise.
///
/// Pairs with equal true resistance (by symmetry, say) come out of the
/// solver a few ulps apart, which makes closed-ball membership at those radii
/// depend on the pair. Values within `1e-12` relative of a cluster's smallest
/// member are replaced by the shortest decimal covering the cluster, so
/// every value moves by at most `1e-12` relative and exact ties stay ties.
fn snap_ties(table: &mut [f64], n: usize) {
    let mut values: Vec<f64> = (0..n)
        .flat_map(|x| ((x + 1)..n).map(move |y| (x, y)))
        .map(|(x, y)| table[x * n + y])
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut canonical: Vec<(f64, f64)> = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let low = values[start];
        let mut end = start + 1;
        while end < values.len() && values[end] - low <= 1e-12 * low {
            end += 1;
        }
        let high = values[end - 1];
        let slack = f64::EPSILON * high;
        let center = 0.5 * (low + high);
        let rep = (1..=17)
            .map(|digits| format!("{:.*e}", digits - 1, center).parse::<f64>().unwrap())
            .find(|c| *c >= low - slack && *c <= high + slack)
            .unwrap_or(center);
        for &v in &values[start..end] {
            canonical.push((v, rep));
        }
        start = end;
    }
    for v in table.iter_mut() {
        if *v > 0.0 {
            let i = canonical.partition_point(|(k, _)| *k < *v);
            *v = canonical[i].1;
        }
    }
}

/// Resistance diameter and its witness pair.
pub fn resistance_diameter(m: &ResistanceMetric) -> (f64, (usize, usize)) {
    m.diameter()
}

pub fn resistance_ball(m: &ResistanceMetric, x: usize, r: f64) -> Vec<usize> {
    m.ball(x, r)
}

/// Single-pair resistance via one grounded solve; for graphs too large for a
/// table.
pub fn effective_resistance(g: &WeightedGraph, x: usize, y: usize, cg: CgOptions) -> Result<f64> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Ok(0.0);
    }
    let mut rhs = vec![0.0; g.vertex_count()];
    rhs[x] = 1.0;
    Ok(linalg::solve_grounded_robust(g, y, &rhs, cg)?[x])
}

/// Covariance of the free field pinned at `root`:
/// `C(x, y) = (R(root, x) + R(root, y) − R(x, y)) / 2`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    root: usize,
    n: usize,
    matrix: Vec<f64>,
    /// Square-root factor, `n × rank`, row-major.
    factor: Vec<f64>,
    rank: usize,
}

pub fn green_kernel(m: &ResistanceMetric, root: usize) -> Result<GreenKernel> {
    GreenKernel::new(m, root)
}

impl GreenKernel {
    pub fn new(m: &ResistanceMetric, root: usize) -> Result<Self> {
        let n = m.vertex_count();
        if root >= n {
            return Err(Error::InvalidVertex { vertex: root, vertex_count: n });
        }
        let mut matrix = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                matrix[x * n + y] = 0.5 * (m.get(root, x) + m.get(root, y) - m.get(x, y));
            }
            matrix[root * n + x] = 0.0;
            matrix[x * n + root] = 0.0;
        }
        let (factor, rank) = pivoted_cholesky(&matrix, n, 1e-9)?;
        Ok(Self { root, n, matrix, factor, rank })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.n + y]
    }

    /// Increment variance `C(x,x) + C(y,y) − 2 C(x,y)`.
    pub fn increment_variance(&self, x: usize, y: usize) -> f64 {
        self.get(x, x) + self.get(y, y) - 2.0 * self.get(x, y)
    }

    pub(crate) fn factor(&self) -> (&[f64], usize) {
        (&self.factor, self.rank)
    }
}

/// Nash–Williams lower bound `Σ_k (Σ_{e ∈ Π_k} μ_e)⁻¹` for disjoint edge
/// cutsets separating `x` from `y`. Each cutset is checked.
pub fn nash_williams_bound(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    cutsets: &[Vec<(usize, usize)>],
) -> Result<f64> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    let key = |(a, b): (usize, usize)| (a.min(b), a.max(b));
    let mut owner = std::collections::HashMap::new();
    let mut bound = 0.0;
    for (index, cut) in cutsets.iter().enumerate() {
        let mut conductance = 0.0;
        for &e in cut {
            let e = key(e);
            let w = g.weight(e.0, e.1).ok_or(Error::NotACutset { index, x, y })?;
            if let Some(&first) = owner.get(&e) {
                if first != index {
                    return Err(Error::OverlappingCutsets { first, second: index });
                }
                continue;
            }
            owner.insert(e, index);
            conductance += w;
        }
        if !separates(g, x, y, cut) {
            return Err(Error::NotACutset { index, x, y });
        }
        bound += 1.0 / conductance;
    }
    Ok(bound)
}

fn separates(g: &WeightedGraph, x: usize, y: usize, cut: &[(usize, usize)]) -> bool {
    if x == y {
        return false;
    }
    let removed: std::collections::HashSet<(usize, usize)> =
        cut.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut seen = vec![false; g.vertex_count()];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if !seen[w] && !removed.contains(&(v.min(w), v.max(w))) {
                if w == y {
                    return false;
                }
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    true
}
