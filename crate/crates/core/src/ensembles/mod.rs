//! Seeded generators for every graph family studied by the toolkit.
//!
//! [`FamilySpec`] bundles a family, its size parameter `N` and a seed; it is
//! the unit the ensemble runner and the CLI config work with. All generators
//! are pure functions of their parameters and seed.

mod deterministic;
mod dsu;
mod lattice;
mod offspring;
mod trees;

use serde::{Deserialize, Serialize};

pub use deterministic::{complete, cycle, gen_barbell, gen_sierpinski, path, star};
pub use lattice::{gen_er, gen_percolation_box, gen_rw_range};
pub use offspring::{survival_probability, OffspringLaw, OffspringSpec};
pub use trees::{
    gen_kesten_iic, gen_kesten_iic_with_spine, gen_supercritical_gw, gen_supercritical_gw_with_cap,
    SpinedTree, DEFAULT_REJECTION_CAP,
};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Rule for the growth function `f(N)` of the `f(N)/N` Erdős–Rényi regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GrowthRule {
    /// `f(N) = (ln N)²`.
    #[default]
    LogSquared,
    /// `f(N) = N^exponent`, exponent in (0, 1/2).
    Power { exponent: f64 },
}

impl GrowthRule {
    pub fn evaluate(&self, n: f64) -> f64 {
        match self {
            GrowthRule::LogSquared => n.ln().powi(2),
            GrowthRule::Power { exponent } => n.powf(*exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum ErRegime {
    /// `p = c / N` with `c > 1`.
    SupercriticalCOverN { c: f64 },
    /// `p = f(N) / N`.
    SupercriticalFOverN {
        #[serde(default)]
        growth: GrowthRule,
    },
    /// `p = 1 / N`.
    Critical,
}

impl ErRegime {
    pub fn edge_probability(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            ErRegime::SupercriticalCOverN { c } => c / nf,
            ErRegime::SupercriticalFOverN { growth } => (growth.evaluate(nf) / nf).min(1.0),
            ErRegime::Critical => 1.0 / nf,
        }
    }
}

fn default_weight_bounds() -> [f64; 2] {
    [1.0, 1.0]
}

/// Family parameters; the size parameter `N` lives in [`FamilySpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Supercritical Galton–Watson tree, `N` generations.
    GwSupercritical { offspring: OffspringSpec },
    /// Kesten's incipient infinite cluster, `N` generations.
    IicKesten { offspring: OffspringSpec },
    /// Largest component of `G(N, p)`.
    Er { regime: ErRegime },
    /// Largest cluster of bond percolation on `[−N, N]^d`.
    PercolationBox { d: usize, p: f64 },
    /// Trace of an `N`-step simple random walk in `Z^d`.
    RwRange { d: usize },
    /// Level-`N` gasket.
    Sierpinski {
        #[serde(default = "default_weight_bounds")]
        weight_bounds: [f64; 2],
    },
    /// `K_N` with `a_N` pendant leaves; `pendants = None` means `a_N = N`.
    Barbell {
        #[serde(default)]
        pendants: Option<usize>,
    },
    Cycle,
    Complete,
    Path,
    Star,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GwSupercritical { .. } => "gw_supercritical",
            Family::IicKesten { .. } => "iic_kesten",
            Family::Er { .. } => "er",
            Family::PercolationBox { .. } => "percolation_box",
            Family::RwRange { .. } => "rw_range",
            Family::Sierpinski { .. } => "sierpinski",
            Family::Barbell { .. } => "barbell",
            Family::Cycle => "cycle",
            Family::Complete => "complete",
            Family::Path => "path",
            Family::Star => "star",
        }
    }

    /// Whether the generated graph depends on the seed.
    pub fn is_random(&self) -> bool {
        match self {
            Family::Sierpinski { weight_bounds } => weight_bounds[0] != weight_bounds[1],
            Family::Barbell { .. } | Family::Cycle | Family::Complete | Family::Path | Family::Star => false,
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        match self {
            Family::GwSupercritical { offspring } => {
                let law = offspring.law()?;
                if !(law.mean() > 1.0) {
                    return bad(format!("gw_supercritical needs mean > 1, got {}", law.mean()));
                }
            }
            Family::IicKesten { offspring } => offspring.law()?.require_critical()?,
            Family::Er { regime: ErRegime::SupercriticalCOverN { c } } if !(*c > 1.0) => {
                return bad(format!("supercritical regime needs c > 1, got {c}"));
            }
            Family::PercolationBox { d, p } if *d < 2 || !(*p > 0.0 && *p <= 1.0) => {
                return bad(format!("percolation_box needs d ≥ 2 and p in (0, 1], got d={d}, p={p}"));
            }
            Family::RwRange { d } if *d < 5 => return bad(format!("rw_range needs d ≥ 5, got {d}")),
            Family::Sierpinski { weight_bounds: [a, b] } if !(*a > 0.0 && a <= b) => {
                return bad(format!("weight bounds must satisfy 0 < c1 ≤ c2, got [{a}, {b}]"));
            }
            _ => {}
        }
        Ok(())
    }
}

/// A family at one size with one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    /// Size parameter `N` (levels, vertices, box half-width or walk length).
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(family: Family, size: usize, seed: u64) -> Self {
        Self { family, size, seed }
    }

    pub fn generate(&self) -> Result<WeightedGraph> {
        self.family.validate()?;
        let n = self.size;
        let levels = u32::try_from(n).map_err(|_| Error::InvalidParameters(format!("size {n} too large")))?;
        match &self.family {
            Family::GwSupercritical { offspring } => gen_supercritical_gw(offspring, levels, self.seed),
            Family::IicKesten { offspring } => gen_kesten_iic(offspring, levels, self.seed),
            Family::Er { regime } => gen_er(n, regime.edge_probability(n), self.seed),
            Family::PercolationBox { d, p } => gen_percolation_box(*d, n, *p, self.seed),
            Family::RwRange { d } => gen_rw_range(*d, n, self.seed),
            Family::Sierpinski { weight_bounds } => gen_sierpinski(levels, *weight_bounds, self.seed),
            Family::Barbell { pendants } => gen_barbell(n, pendants.unwrap_or(n)),
            Family::Cycle => cycle(n),
            Family::Complete => complete(n),
            Family::Path => path(n),
            Family::Star => star(n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trips_through_json() {
        let spec = FamilySpec::new(
            Family::GwSupercritical { offspring: OffspringSpec::Poisson { mean: 2.0 } },
            6,
            42,
        );
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FamilySpec>(&text).unwrap(), spec);
        let barbell: FamilySpec =
            serde_json::from_str(r#"{"family":"barbell","pendants":2,"size":4}"#).unwrap();
        let g = barbell.generate().unwrap();
        assert_eq!(g.vertex_count(), 6);
    }

    #[test]
    fn er_regimes() {
        assert_eq!(ErRegime::Critical.edge_probability(1000), 1e-3);
        let f = ErRegime::SupercriticalFOverN { growth: GrowthRule::LogSquared };
        let p = f.edge_probability(1000);
        assert!((p - 1000f64.ln().powi(2) / 1000.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_family_parameters() {
        let spec = FamilySpec::new(Family::RwRange { d: 3 }, 10, 0);
        assert!(matches!(spec.generate(), Err(Error::InvalidParameters(_))));
        let spec = FamilySpec::new(Family::IicKesten { offspring: OffspringSpec::Poisson { mean: 2.0 } }, 3, 0);
        assert!(matches!(spec.generate(), Err(Error::NotCritical { .. })));
    }

    #[test]
    fn same_seed_same_graph() {
        let spec = FamilySpec::new(Family::Er { regime: ErRegime::Critical }, 500, 9);
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
    }
}
