//! Offspring laws for Galton–Watson processes.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offspring distribution of a branching process.
///
/// `Geometric { p }` counts failures before the first success:
/// `P(k) = p (1 − p)^k`, so `p = 1/2` is the critical law `2^{−(k+1)}`.
///
/// `PowerTail { alpha, cutoff }` is a critical law with tail
/// `P(k) ∝ k^{−(1+α)}` on `1..=cutoff` plus an atom at zero that pins the
/// mean to exactly one; α ∈ (1, 2) puts it in the domain of attraction of an
/// α-stable law, up to the truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffspringSpec {
    Poisson { mean: f64 },
    Geometric { p: f64 },
    Binomial { n: u32, p: f64 },
    Explicit { probabilities: Vec<f64> },
    PowerTail { alpha: f64, cutoff: u32 },
}

/// A law with its validated probability table (for table-driven kinds).
#[derive(Debug, Clone)]
pub struct OffspringLaw {
    spec: OffspringSpec,
    table: Option<Vec<f64>>,
    cdf: Vec<f64>,
    biased_cdf: Vec<f64>,
    mean: f64,
}

const TABLE_TOLERANCE: f64 = 1e-12;

fn cumulative(table: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    table
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn sample_table<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> u64 {
    let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) as u64
}

impl OffspringSpec {
    pub fn law(&self) -> Result<OffspringLaw> {
        OffspringLaw::new(self.clone())
    }
}

impl OffspringLaw {
    pub fn new(spec: OffspringSpec) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        let (table, mean) = match &spec {
            OffspringSpec::Poisson { mean } => {
                if !(*mean > 0.0 && mean.is_finite()) {
                    return bad(format!("poisson mean must be positive, got {mean}"));
                }
                (None, *mean)
            }
            OffspringSpec::Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return bad(format!("geometric p must lie in (0, 1], got {p}"));
                }
                (None, (1.0 - p) / p)
            }
            OffspringSpec::Binomial { n, p } => {
                if !(*p >= 0.0 && *p <= 1.0) {
                    return bad(format!("binomial p must lie in [0, 1], got {p}"));
                }
                (None, *n as f64 * p)
            }
            OffspringSpec::Explicit { probabilities } => {
                if probabilities.is_empty() || probabilities.iter().any(|&q| !(q >= 0.0)) {
                    return bad("explicit probabilities must be non-negative and nonempty".into());
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > TABLE_TOLERANCE {
                    return bad(format!("explicit probabilities sum to {total}, not 1"));
                }
                let mean = probabilities.iter().enumerate().map(|(k, q)| k as f64 * q).sum();
                (Some(probabilities.clone()), mean)
            }
            OffspringSpec::PowerTail { alpha, cutoff } => {
                if !(*alpha > 1.0 && *alpha <= 2.0) || *cutoff < 1 {
                    return bad(format!("power tail needs alpha in (1, 2] and cutoff ≥ 1, got {alpha}, {cutoff}"));
                }
                let weights: Vec<f64> =
                    (1..=*cutoff).map(|k| (k as f64).powf(-(1.0 + alpha))).collect();
                let mass: f64 = weights.iter().sum();
                let tail_mean: f64 =
                    weights.iter().enumerate().map(|(i, w)| (i + 1) as f64 * w / mass).sum();
                let mut table = vec![1.0 - 1.0 / tail_mean];
                table.extend(weights.iter().map(|w| w / mass / tail_mean));
                (Some(table), 1.0)
            }
        };
        let (cdf, biased_cdf) = match &table {
            Some(t) => {
                let biased: Vec<f64> = t.iter().enumerate().map(|(k, &q)| k as f64 * q).collect();
                (cumulative(t), cumulative(&biased))
            }
            None => (Vec::new(), Vec::new()),
        };
        Ok(Self { spec, table, cdf, biased_cdf, mean })
    }

    pub fn spec(&self) -> &OffspringSpec {
        &self.spec
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_critical(&self) -> bool {
        (self.mean - 1.0).abs() <= 1e-9
    }

    pub fn require_critical(&self) -> Result<()> {
        if self.is_critical() {
            Ok(())
        } else {
            Err(Error::NotCritical { mean: self.mean })
        }
    }

    /// Probability table for table-driven laws.
    pub fn table(&self) -> Option<&[f64]> {
        self.table.as_deref()
    }

    /// Probability generating function `f(s) = E s^Z`.
    pub fn pgf(&self, s: f64) -> f64 {
        match &self.spec {
            OffspringSpec::Poisson { mean } => (mean * (s - 1.0)).exp(),
            OffspringSpec::Geometric { p } => p / (1.0 - (1.0 - p) * s),
            OffspringSpec::Binomial { n, p } => (1.0 - p + p * s).powi(*n as i32),
            _ => self
                .table
                .as_ref()
                .unwrap()
                .iter()
                .rev()
                .fold(0.0, |acc, &q| acc * s + q),
        }
    }

    /// `1 − f(1 − x)`, evaluated without cancellation for small `x`.
    pub fn survival_map(&self, x: f64) -> f64 {
        match &self.spec {
            OffspringSpec::Poisson { mean } => -(-mean * x).exp_m1(),
            OffspringSpec::Geometric { p } => {
                let q = 1.0 - p;
                q * x / (p + q * x)
            }
            OffspringSpec::Binomial { n, p } => -((*n as f64) * (-p * x).ln_1p()).exp_m1(),
            _ => {
                let log_keep = (-x).ln_1p();
                self.table
                    .as_ref()
                    .unwrap()
                    .iter()
                    .enumerate()
                    .map(|(k, &q)| q * -((k as f64) * log_keep).exp_m1())
                    .sum()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.spec {
            OffspringSpec::Poisson { mean } => Poisson::new(*mean).unwrap().sample(rng) as u64,
            OffspringSpec::Geometric { p } => Geometric::new(*p).unwrap().sample(rng),
            OffspringSpec::Binomial { n, p } => Binomial::new(*n as u64, *p).unwrap().sample(rng),
            _ => sample_table(&self.cdf, rng),
        }
    }

    /// Draw from the size-biased law `k P(Z = k) / m`.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.spec {
            OffspringSpec::Poisson { mean } => 1 + Poisson::new(*mean).unwrap().sample(rng) as u64,
            OffspringSpec::Geometric { p } => {
                // k p² (1 − p)^{k−1}: one plus two independent geometrics
                let geo = Geometric::new(*p).unwrap();
                1 + geo.sample(rng) + geo.sample(rng)
            }
            OffspringSpec::Binomial { n, p } => {
                1 + Binomial::new((*n as u64).saturating_sub(1), *p).unwrap().sample(rng)
            }
            _ => sample_table(&self.biased_cdf, rng),
        }
    }
}

/// `P(Z_N > 0)` for a critical process via `p_k = 1 − f(1 − p_{k−1})`, `p_0 = 1`.
pub fn survival_probability(spec: &OffspringSpec, generations: u32) -> Result<f64> {
    let law = spec.law()?;
    law.require_critical()?;
    let mut p = 1.0;
    for _ in 0..generations {
        p = law.survival_map(p);
    }
    Ok(p)
}
