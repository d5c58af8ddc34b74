//! Dense and iterative linear algebra on graph Laplacians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Weighted Laplacian `L = D − A` with `D = diag(μ_x)`.
pub fn laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.v)] -= e.weight;
        l[(e.v, e.u)] -= e.weight;
        l[(e.u, e.u)] += e.weight;
        l[(e.v, e.v)] += e.weight;
    }
    l
}

/// `y = L x` without materializing `L`.
pub fn laplacian_apply(g: &WeightedGraph, x: &[f64], y: &mut [f64]) {
    for v in 0..g.vertex_count() {
        let mut acc = g.vertex_weight(v) * x[v];
        for (&u, &w) in g.neighbors(v).iter().zip(g.neighbor_weights(v)) {
            acc -= w * x[u];
        }
        y[v] = acc;
    }
}

/// Moore–Penrose pseudoinverse of the Laplacian of a connected graph.
///
/// `L + J/n` is positive definite on a connected graph and its inverse is
/// `L⁺ + J/n`, so one Cholesky factorization suffices.
pub fn laplacian_pseudoinverse(g: &WeightedGraph) -> Result<DMatrix<f64>> {
    let n = g.vertex_count();
    let shift = 1.0 / n as f64;
    let mut m = laplacian(g);
    m.add_scalar_mut(shift);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("shifted Laplacian is not positive definite".into()))?;
    let mut pinv = chol.inverse();
    pinv.add_scalar_mut(-shift);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (pinv[(i, j)] + pinv[(j, i)]);
            pinv[(i, j)] = s;
            pinv[(j, i)] = s;
        }
    }
    check_pseudoinverse(g, &pinv)?;
    Ok(pinv)
}

/// Spot-check `L L⁺ = I − J/n` on a handful of columns.
fn check_pseudoinverse(g: &WeightedGraph, pinv: &DMatrix<f64>) -> Result<()> {
    let n = g.vertex_count();
    let stride = (n / 8).max(1);
    let scale = pinv.iter().fold(0.0f64, |a, &b| a.max(b.abs())) * g.vertex_weights().iter().fold(0.0f64, |a, &b| a.max(b));
    let mut y = vec![0.0; n];
    for col in (0..n).step_by(stride) {
        let x: Vec<f64> = pinv.column(col).iter().copied().collect();
        laplacian_apply(g, &x, &mut y);
        for (row, &value) in y.iter().enumerate() {
            let target = if row == col { 1.0 } else { 0.0 } - 1.0 / n as f64;
            if (value - target).abs() > 1e-9 * scale.max(1.0) {
                return Err(Error::NumericalFailure(format!(
                    "pseudoinverse residual {:.3e} at ({row}, {col})",
                    (value - target).abs()
                )));
            }
        }
    }
    Ok(())
}

/// Solve a dense general system with partial-pivoting LU.
pub fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    a.lu().solve(&b).ok_or_else(|| Error::NumericalFailure("singular linear system".into()))
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Relative residual target `‖r‖ ≤ tol · ‖b‖`.
    pub tolerance: f64,
    /// Iteration cap; `None` picks `max(20 n, 1000)`.
    pub max_iterations: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: None }
    }
}

/// Solve the grounded system `L_{−g} x = b_{−g}` with `x[ground] = 0` by
/// Jacobi-preconditioned conjugate gradients. `rhs[ground]` is ignored.
pub fn solve_grounded(
    g: &WeightedGraph,
    ground: usize,
    rhs: &[f64],
    options: CgOptions,
) -> Result<Vec<f64>> {
    g.check_vertex(ground)?;
    let n = g.vertex_count();
    let mut b = rhs.to_vec();
    b[ground] = 0.0;
    let b_norm = norm(&b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = (0..n)
        .map(|v| if v == ground { 0.0 } else { 1.0 / g.vertex_weight(v) })
        .collect();
    let apply = |p: &[f64], out: &mut [f64]| {
        laplacian_apply(g, p, out);
        out[ground] = 0.0;
    };
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = options.max_iterations.unwrap_or((20 * n).max(1000));
    for _ in 0..cap {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= options.tolerance * b_norm {
            // recompute the true residual; the recursive one drifts
            apply(&x, &mut ap);
            let true_res: f64 =
                ap.iter().zip(&b).map(|(a, bb)| (a - bb) * (a - bb)).sum::<f64>().sqrt();
            if true_res <= 10.0 * options.tolerance * b_norm {
                return Ok(x);
            }
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NumericalFailure(format!("conjugate gradients did not converge in {cap} iterations")))
}

/// Sparse `L D Lᵀ` factorization of the Laplacian with one vertex grounded,
/// eliminated in minimum-degree order. Trees and tree-like graphs factor with
/// little or no fill, so this is the robust route where conjugate gradients
/// stall on badly conditioned (long, thin) graphs.
#[derive(Debug, Clone)]
pub struct GroundedFactor {
    ground: usize,
    order: Vec<usize>,
    pivots: Vec<f64>,
    /// `columns[k]` holds `(u, l_uv)` for the k-th eliminated vertex `v`
    columns: Vec<Vec<(usize, f64)>>,
}

impl GroundedFactor {
    pub fn new(g: &WeightedGraph, ground: usize) -> Result<Self> {
        use std::cmp::Reverse;
        use std::collections::{BTreeMap, BinaryHeap};

        g.check_vertex(ground)?;
        let n = g.vertex_count();
        let mut rows: Vec<BTreeMap<usize, f64>> = (0..n)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .zip(g.neighbor_weights(v))
                    .filter(|(&u, _)| u != ground && v != ground)
                    .map(|(&u, &w)| (u, -w))
                    .collect()
            })
            .collect();
        let mut diag: Vec<f64> = g.vertex_weights().to_vec();
        let mut done = vec![false; n];
        done[ground] = true;
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).filter(|&v| v != ground).map(|v| Reverse((rows[v].len(), v))).collect();
        let mut order = Vec::with_capacity(n.saturating_sub(1));
        let mut pivots = Vec::with_capacity(n.saturating_sub(1));
        let mut columns = Vec::with_capacity(n.saturating_sub(1));
        while let Some(Reverse((deg, v))) = heap.pop() {
            if done[v] || deg != rows[v].len() {
                continue;
            }
            done[v] = true;
            let d = diag[v];
            if !(d > 0.0) {
                return Err(Error::NumericalFailure(format!("non-positive pivot {d} at vertex {v}")));
            }
            let row = std::mem::take(&mut rows[v]);
            let entries: Vec<(usize, f64)> = row.into_iter().collect();
            for (i, &(u, a_uv)) in entries.iter().enumerate() {
                rows[u].remove(&v);
                diag[u] -= a_uv * a_uv / d;
                for &(w, a_wv) in &entries[i + 1..] {
                    let delta = a_uv * a_wv / d;
                    *rows[u].entry(w).or_insert(0.0) -= delta;
                    *rows[w].entry(u).or_insert(0.0) -= delta;
                }
            }
            for &(u, _) in &entries {
                heap.push(Reverse((rows[u].len(), u)));
            }
            order.push(v);
            pivots.push(d);
            columns.push(entries.into_iter().map(|(u, a)| (u, a / d)).collect());
        }
        Ok(Self { ground, order, pivots, columns })
    }

    /// Solve `L_{−g} x = b_{−g}` with `x[ground] = 0`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        x[self.ground] = 0.0;
        for (&v, col) in self.order.iter().zip(&self.columns) {
            let xv = x[v];
            for &(u, l) in col {
                x[u] -= l * xv;
            }
        }
        for (&v, &d) in self.order.iter().zip(&self.pivots) {
            x[v] /= d;
        }
        for (&v, col) in self.order.iter().zip(&self.columns).rev() {
            let mut acc = x[v];
            for &(u, l) in col {
                acc -= l * x[u];
            }
            x[v] = acc;
        }
        x
    }

    /// Solve with one round of iterative refinement and a residual check.
    pub fn solve_checked(&self, g: &WeightedGraph, rhs: &[f64], tolerance: f64) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut b = rhs.to_vec();
        b[self.ground] = 0.0;
        let mut x = self.solve(&b);
        let mut ax = vec![0.0; n];
        let residual = |x: &[f64], ax: &mut [f64]| -> Vec<f64> {
            laplacian_apply(g, x, ax);
            let mut r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bb, a)| bb - a).collect();
            r[self.ground] = 0.0;
            r
        };
        let r = residual(&x, &mut ax);
        let dx = self.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        let r = residual(&x, &mut ax);
        // normwise backward error: ‖r‖ relative to ‖L‖‖x‖ + ‖b‖
        let l_norm = 2.0 * g.vertex_weights().iter().cloned().fold(0.0f64, f64::max);
        let scale = (l_norm * norm(&x) + norm(&b)).max(1e-300);
        if norm(&r) > tolerance * scale {
            return Err(Error::NumericalFailure(format!(
                "direct grounded solve backward error {:.3e}",
                norm(&r) / scale
            )));
        }
        Ok(x)
    }

    /// Total number of off-diagonal factor entries.
    pub fn fill(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
}

/// Conjugate gradients first; on non-convergence, a sparse direct solve.
pub fn solve_grounded_robust(
    g: &WeightedGraph,
    ground: usize,
    rhs: &[f64],
    options: CgOptions,
) -> Result<Vec<f64>> {
    match solve_grounded(g, ground, rhs, options) {
        Err(Error::NumericalFailure(_)) => {
            GroundedFactor::new(g, ground)?.solve_checked(g, rhs, options.tolerance)
        }
        other => other,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn pseudoinverse_of_path() {
        let g = build_graph([(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let p = laplacian_pseudoinverse(&g).unwrap();
        let r02 = p[(0, 0)] + p[(2, 2)] - 2.0 * p[(0, 2)];
        assert!((r02 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grounded_cg_matches_series_resistance() {
        // unit current into vertex 3 of a path grounded at 0: potential = R(0,3) = 3
        let g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let x = solve_grounded(&g, 0, &[0.0, 0.0, 0.0, 1.0], CgOptions::default()).unwrap();
        assert!((x[3] - 3.0).abs() < 1e-9);
        assert_eq!(x[0], 0.0);
    }

    #[test]
    fn direct_factor_matches_cg() {
        let g = build_graph([
            (0, 1, 1.0),
            (1, 2, 2.0),
            (2, 3, 0.5),
            (3, 0, 1.5),
            (1, 3, 3.0),
            (3, 4, 1.0),
        ])
        .unwrap();
        let rhs = [0.3, -1.0, 2.0, 0.5, 1.0];
        for ground in 0..5 {
            let f = GroundedFactor::new(&g, ground).unwrap();
            let a = f.solve_checked(&g, &rhs, 1e-12).unwrap();
            let b = solve_grounded(&g, ground, &rhs, CgOptions::default()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trees_factor_without_fill() {
        let edges: Vec<_> = (1..200).map(|v| ((v - 1) / 3, v, 1.0)).collect();
        let g = build_graph(edges).unwrap();
        let f = GroundedFactor::new(&g, 0).unwrap();
        assert_eq!(f.fill(), g.edge_count() - g.degree(0));
    }
}
