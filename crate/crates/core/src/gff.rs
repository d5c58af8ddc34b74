//! Gaussian free field pinned at a root, sampled from a square-root factor of
//! the Green kernel.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::resistance::GreenKernel;
use crate::rng::{self, StreamRng};
use crate::stats::MeanEstimate;

/// Pivoted Cholesky of a symmetric positive semidefinite `n × n` row-major
/// matrix. Returns the `n × rank` factor (row-major) and the rank. Pivots
/// below `rel_tol · max diagonal` are treated as null directions.
pub(crate) fn pivoted_cholesky(matrix: &[f64], n: usize, rel_tol: f64) -> Result<(Vec<f64>, usize)> {
    let mut diag: Vec<f64> = (0..n).map(|i| matrix[i * n + i]).collect();
    let scale = diag.iter().cloned().fold(0.0f64, f64::max);
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    if scale > 0.0 {
        loop {
            let (pivot, &d) = diag
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .unwrap_or((0, &0.0));
            if used[pivot] || d <= rel_tol * scale {
                break;
            }
            used[pivot] = true;
            let root = d.sqrt();
            let mut col: Vec<f64> = (0..n).map(|i| matrix[i * n + pivot]).collect();
            for prev in &columns {
                let p = prev[pivot];
                if p != 0.0 {
                    for (c, q) in col.iter_mut().zip(prev) {
                        *c -= q * p;
                    }
                }
            }
            for (i, c) in col.iter_mut().enumerate() {
                *c = if used[i] && i != pivot { 0.0 } else { *c / root };
            }
            col[pivot] = root;
            for (dv, c) in diag.iter_mut().zip(&col) {
                *dv -= c * c;
            }
            diag[pivot] = 0.0;
            columns.push(col);
        }
    }
    let rank = columns.len();
    let mut factor = vec![0.0; n * rank];
    for (j, col) in columns.iter().enumerate() {
        for i in 0..n {
            factor[i * rank + j] = col[i];
        }
    }
    // reconstruction check catches indefinite input that slipped past pivoting
    let mut err = 0.0;
    let mut norm = 0.0;
    for i in 0..n {
        let fi = &factor[i * rank..(i + 1) * rank];
        for k in 0..n {
            let fk = &factor[k * rank..(k + 1) * rank];
            let recon: f64 = fi.iter().zip(fk).map(|(a, b)| a * b).sum();
            let c = matrix[i * n + k];
            err += (c - recon) * (c - recon);
            norm += c * c;
        }
    }
    let min_residual = diag.iter().cloned().fold(0.0f64, f64::min);
    if min_residual < -1e-9 * scale.max(1.0) || err.sqrt() > 1e-8 * norm.sqrt().max(1e-300) {
        return Err(Error::NumericalFailure(format!(
            "kernel is not positive semidefinite (residual {:.3e}, reconstruction error {:.3e})",
            min_residual,
            err.sqrt()
        )));
    }
    Ok((factor, rank))
}

/// Free field model: kernel plus its factor.
#[derive(Debug, Clone)]
pub struct GffModel {
    kernel: GreenKernel,
}

impl GffModel {
    pub fn new(kernel: GreenKernel) -> Self {
        Self { kernel }
    }

    pub fn kernel(&self) -> &GreenKernel {
        &self.kernel
    }

    pub fn root(&self) -> usize {
        self.kernel.root()
    }

    pub fn vertex_count(&self) -> usize {
        self.kernel.vertex_count()
    }

    fn sample_into(&self, rng: &mut StreamRng, z: &mut Vec<f64>, out: &mut [f64]) {
        let (factor, rank) = self.kernel.factor();
        z.clear();
        z.extend((0..rank).map(|_| rng.sample::<f64, _>(StandardNormal)));
        for (i, v) in out.iter_mut().enumerate() {
            *v = factor[i * rank..(i + 1) * rank].iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        }
    }
}

/// One field sample `η = F z`; `η_root = 0`.
pub fn sample_gff(model: &GffModel, rng: &mut StreamRng) -> Vec<f64> {
    let mut out = vec![0.0; model.vertex_count()];
    model.sample_into(rng, &mut Vec::new(), &mut out);
    out[model.root()] = 0.0;
    out
}

/// Monte Carlo estimate of `E max_x η_x` (the root contributes 0).
pub fn estimate_expected_max(model: &GffModel, replicas: usize, seed: u64) -> Result<MeanEstimate> {
    if replicas < 2 {
        return Err(Error::InvalidParameters("expected-max estimate needs at least 2 replicas".into()));
    }
    let n = model.vertex_count();
    if n == 1 {
        return Ok(MeanEstimate { mean: 0.0, standard_error: 0.0, replicas });
    }
    const CHUNK: usize = 1024;
    let chunks: Vec<Vec<f64>> = (0..replicas.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut z = Vec::new();
            let mut field = vec![0.0; n];
            (c * CHUNK..((c + 1) * CHUNK).min(replicas))
                .map(|r| {
                    let mut rng = rng::stream(seed, &[r as u64]);
                    model.sample_into(&mut rng, &mut z, &mut field);
                    field.iter().cloned().fold(0.0f64, f64::max)
                })
                .collect()
        })
        .collect();
    Ok(MeanEstimate::from_values(&chunks.concat()))
}

/// `t_cov / (μ(G) · (E max η)²)`.
pub fn dlp_ratio(g: &WeightedGraph, t_cov: f64, emax: f64) -> Result<f64> {
    if !(emax > 0.0) || !emax.is_finite() {
        return Err(Error::DegenerateField(emax));
    }
    Ok(t_cov / (g.volume() * emax * emax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{complete, path};
    use crate::resistance::{green_kernel, resistance_matrix};

    fn model(g: &WeightedGraph, root: usize) -> GffModel {
        GffModel::new(green_kernel(&resistance_matrix(g).unwrap(), root).unwrap())
    }

    #[test]
    fn factor_reproduces_kernel() {
        let g = crate::ensembles::gen_sierpinski(2, [0.5, 3.0], 4).unwrap();
        let m = model(&g, 5);
        let k = m.kernel();
        let (f, rank) = k.factor();
        assert_eq!(rank, g.vertex_count() - 1);
        let n = g.vertex_count();
        for x in 0..n {
            for y in 0..n {
                let r: f64 = (0..rank).map(|j| f[x * rank + j] * f[y * rank + j]).sum();
                assert!((r - k.get(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn indefinite_input_is_rejected() {
        let m = [1.0, 2.0, 2.0, 1.0];
        assert!(matches!(pivoted_cholesky(&m, 2, 1e-12), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn single_edge_field_is_standard_normal() {
        let m = model(&path(2).unwrap(), 0);
        let mut rng = rng::stream(1, &[]);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_gff(&m, &mut rng)).map(|s| {
            assert_eq!(s[0], 0.0);
            s[1]
        }).collect();
        let var = draws.iter().map(|v| v * v).sum::<f64>() / draws.len() as f64;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn path_increment_variance() {
        let m = model(&path(3).unwrap(), 0);
        let mut rng = rng::stream(2, &[]);
        let k = 100_000;
        let s: f64 = (0..k).map(|_| {
            let f = sample_gff(&m, &mut rng);
            (f[1] - f[2]).powi(2)
        }).sum();
        assert!((s / k as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn expected_max_on_single_edge_is_half_normal_mean() {
        let m = model(&path(2).unwrap(), 0);
        let est = estimate_expected_max(&m, 100_000, 9).unwrap();
        let exact = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(est.agrees_with(exact, 4.0), "{est:?}");
        assert_eq!(est, estimate_expected_max(&m, 100_000, 9).unwrap());
    }

    #[test]
    fn expected_max_on_triangle_is_banded() {
        let est = estimate_expected_max(&model(&complete(3).unwrap(), 0), 20_000, 3).unwrap();
        let half = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(est.mean > half && est.mean < 2.0 * half, "{est:?}");
    }

    #[test]
    fn dlp_ratio_on_single_edge_is_pi() {
        let g = path(2).unwrap();
        let emax = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((dlp_ratio(&g, 1.0, emax).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert!(matches!(dlp_ratio(&g, 1.0, 0.0), Err(Error::DegenerateField(_))));
    }

    #[test]
    fn replicas_are_validated() {
        let m = model(&path(2).unwrap(), 0);
        assert!(estimate_expected_max(&m, 1, 0).is_err());
    }
}
