//! One-graph analysis: every quantity the toolkit computes, gathered under
//! size budgets. Quantities that exceed a budget are either skipped or
//! replaced by a certified bound, and the report says which.

use serde::{Deserialize, Serialize};

use crate::chain::{self, ExactCover, SandwichCheck};
use crate::error::{Error, Result};
use crate::geometry::{self, NetMode};
use crate::gff::{self, GffModel};
use crate::graph::WeightedGraph;
use crate::linalg::CgOptions;
use crate::resistance::{GreenKernel, ResistanceMetric, ResistanceMode, ResistanceOptions};
use crate::rng;
use crate::stats::MeanEstimate;
use crate::walk::{self, CoverEstimate, StartPolicy, WalkOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Monte Carlo cover runs per start.
    pub replicas: usize,
    /// Free-field samples for the expected maximum.
    pub gff_replicas: usize,
    /// Size of the worst-of-set start list.
    pub max_starts: usize,
    pub step_cap: u64,
    pub exact_cover_vertices: usize,
    pub dense_hitting_vertices: usize,
    pub resistance_table_vertices: usize,
    pub geometry_vertices: usize,
    /// Largest graph on which packing and covering run exactly (when the
    /// mode is not forced).
    pub exact_net_vertices: usize,
    pub net_mode: Option<NetMode>,
    /// Extra targets visited by the hitting-time sweep.
    pub sweep_rounds: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            replicas: 200,
            gff_replicas: 20_000,
            max_starts: 4,
            step_cap: walk::DEFAULT_STEP_CAP,
            exact_cover_vertices: chain::DEFAULT_EXACT_COVER_CAP,
            dense_hitting_vertices: 1000,
            resistance_table_vertices: 1500,
            geometry_vertices: 1500,
            exact_net_vertices: 24,
            net_mode: None,
            sweep_rounds: 4,
        }
    }
}

impl Budgets {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("replicas", self.replicas as u64),
            ("gff_replicas", self.gff_replicas as u64),
            ("max_starts", self.max_starts as u64),
            ("step_cap", self.step_cap),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParameters(format!("budget {name} must be positive")));
            }
        }
        if self.replicas < 2 || self.gff_replicas < 2 {
            return Err(Error::InvalidParameters("replica budgets must be at least 2".into()));
        }
        Ok(())
    }
}

/// Which analyses run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Toggles {
    pub resistance: bool,
    pub packing: bool,
    pub covering: bool,
    pub chaining: bool,
    #[serde(alias = "cover-mc")]
    pub cover_mc: bool,
    #[serde(alias = "cover-exact")]
    pub cover_exact: bool,
    pub gff: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self { resistance: true, packing: false, covering: false, chaining: false, cover_mc: true, cover_exact: true, gff: false }
    }
}

impl Toggles {
    pub fn all() -> Self {
        Self { resistance: true, packing: true, covering: true, chaining: true, cover_mc: true, cover_exact: true, gff: true }
    }

    /// Whether any enabled analysis draws random numbers.
    pub fn is_stochastic(&self) -> bool {
        self.cover_mc || self.gff
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Exact,
    /// A certified lower bound on the true value.
    LowerBound,
    /// A Monte Carlo estimate.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceSummary {
    pub mode: Option<ResistanceMode>,
    pub diameter: f64,
    pub diameter_certainty: Certainty,
    pub witness: (usize, usize),
    pub min_positive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSummary {
    pub t_hit: f64,
    pub certainty: Certainty,
    pub witness: (usize, usize),
    /// Largest relative commute-identity residual, when both routes ran.
    pub commute_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSummary {
    pub t_cov: f64,
    pub standard_error: f64,
    /// `Exact`, or `Estimate` for a worst-of-set Monte Carlo value, which
    /// targets a lower bound on the maximum over all starts.
    pub certainty: Certainty,
    pub worst_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub radius: f64,
    pub covering: Option<usize>,
    pub packing: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub mode: NetMode,
    pub k0: usize,
    pub scales: Vec<ScaleEntry>,
    pub chaining: Option<f64>,
    /// Largest Sudakov value over the packings at the positive scales.
    pub sudakov: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GffSummary {
    pub root: usize,
    pub expected_max: MeanEstimate,
    pub dlp_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphAnalysis {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub volume: f64,
    pub resistance: ResistanceSummary,
    pub hitting: HittingSummary,
    pub cover_exact: Option<ExactCover>,
    pub cover_mc: Option<CoverEstimate>,
    pub cover: Option<CoverSummary>,
    pub matthews_upper: f64,
    pub sandwich: Option<SandwichCheck>,
    pub geometry: Option<GeometrySummary>,
    pub gff: Option<GffSummary>,
    /// Starts used for the worst-of-set estimate.
    pub starts: Vec<usize>,
}

/// Units for the numeric fields of [`GraphAnalysis`] (JSON pointer → unit).
pub fn analysis_units() -> Vec<(&'static str, &'static str)> {
    vec![
        ("/volume", "dimensionless"),
        ("/resistance/diameter", "ohms"),
        ("/resistance/min_positive", "ohms"),
        ("/hitting/t_hit", "steps"),
        ("/hitting/commute_residual", "dimensionless"),
        ("/cover/t_cov", "steps"),
        ("/cover/standard_error", "steps"),
        ("/cover_exact/per_start", "steps"),
        ("/cover_mc/mean", "steps"),
        ("/matthews_upper", "steps"),
        ("/sandwich/lower_slack", "steps"),
        ("/sandwich/upper_slack", "steps"),
        ("/geometry/scales/radius", "ohms"),
        ("/geometry/chaining", "sqrt_ohms"),
        ("/geometry/sudakov", "sqrt_ohms"),
        ("/gff/expected_max/mean", "sqrt_ohms"),
        ("/gff/dlp_ratio", "dimensionless"),
    ]
}

/// Deterministic worst-of-set start list: hitting witness source (its cover
/// time is at least `t_hit`), resistance-diameter witness endpoints, a
/// maximum-degree vertex and vertex 0.
pub fn candidate_starts(g: &WeightedGraph, diam_witness: (usize, usize), hit_witness: (usize, usize), max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for v in [hit_witness.0, diam_witness.0, diam_witness.1, g.max_degree_vertex(), 0] {
        if !out.contains(&v) && out.len() < max {
            out.push(v);
        }
    }
    out
}

pub fn analyze_graph(g: &WeightedGraph, toggles: &Toggles, budgets: &Budgets, seed: Option<u64>) -> Result<GraphAnalysis> {
    analyze_graph_with_metric(g, toggles, budgets, seed).map(|(a, _)| a)
}

/// Same as [`analyze_graph`], also returning the resistance table when one
/// was computed.
pub fn analyze_graph_with_metric(
    g: &WeightedGraph,
    toggles: &Toggles,
    budgets: &Budgets,
    seed: Option<u64>,
) -> Result<(GraphAnalysis, Option<ResistanceMetric>)> {
    budgets.validate()?;
    let seed = match (seed, toggles.is_stochastic()) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => {
            return Err(Error::InvalidParameters("a seed is required for Monte Carlo or field sampling".into()))
        }
    };
    let n = g.vertex_count();
    let wants_metric = toggles.resistance || toggles.packing || toggles.covering || toggles.chaining || toggles.gff;
    let metric = if wants_metric && n <= budgets.resistance_table_vertices {
        let opts = ResistanceOptions {
            dense_budget: budgets.resistance_table_vertices,
            table_budget: budgets.resistance_table_vertices,
            ..Default::default()
        };
        Some(ResistanceMetric::compute(g, opts)?)
    } else {
        None
    };

    let cg = CgOptions::default();
    let (hitting, sweep_diam) = if n <= budgets.dense_hitting_vertices {
        let profile = chain::hitting_times_with_budget(g, budgets.dense_hitting_vertices)?;
        let commute_residual = metric.as_ref().map(|m| profile.commute_residual(g, m));
        if let Some(r) = commute_residual {
            if r > 1e-8 {
                return Err(Error::NumericalFailure(format!("commute identity residual {r:.3e}")));
            }
        }
        let summary = HittingSummary {
            t_hit: profile.t_hit(),
            certainty: Certainty::Exact,
            witness: profile.witness(),
            commute_residual,
        };
        (summary, None)
    } else {
        let mut seeds = Vec::new();
        if let Some(m) = &metric {
            let (_, (a, b)) = m.diameter();
            seeds.extend([a, b]);
        }
        seeds.extend([g.max_degree_vertex(), 0]);
        let sweep = chain::hitting_sweep(g, &seeds, budgets.sweep_rounds, cg)?;
        let summary = HittingSummary {
            t_hit: sweep.t_hit_lower,
            certainty: Certainty::LowerBound,
            witness: sweep.witness,
            commute_residual: None,
        };
        (summary, Some((sweep.diam_lower, sweep.diam_witness)))
    };

    let resistance = match (&metric, sweep_diam) {
        (Some(m), _) => {
            let (d, w) = m.diameter();
            ResistanceSummary {
                mode: Some(m.mode()),
                diameter: d,
                diameter_certainty: Certainty::Exact,
                witness: w,
                min_positive: (n > 1).then(|| m.min_positive()),
            }
        }
        (None, Some((d, w))) => ResistanceSummary {
            mode: None,
            diameter: d,
            diameter_certainty: Certainty::LowerBound,
            witness: w,
            min_positive: None,
        },
        (None, None) => {
            // dense hitting ran but no table: recover R on the hitting witness
            // pair from the commute identity
            let profile = chain::hitting_times_with_budget(g, budgets.dense_hitting_vertices)?;
            let (x, y) = profile.witness();
            ResistanceSummary {
                mode: None,
                diameter: (profile.get(x, y) + profile.get(y, x)) / g.volume(),
                diameter_certainty: Certainty::LowerBound,
                witness: (x.min(y), x.max(y)),
                min_positive: None,
            }
        }
    };

    let starts = candidate_starts(g, resistance.witness, hitting.witness, budgets.max_starts);
    let cover_exact = if toggles.cover_exact && n <= budgets.exact_cover_vertices {
        Some(chain::exact_cover_time_with_cap(g, budgets.exact_cover_vertices)?)
    } else {
        None
    };
    let cover_mc = if toggles.cover_mc && n > 1 {
        let policy = StartPolicy::WorstOfSet(starts.clone());
        let opts = WalkOptions { step_cap: budgets.step_cap };
        Some(walk::estimate_cover_time_with(g, &policy, budgets.replicas, rng::derive_seed(seed, &[1]), opts)?)
    } else {
        None
    };
    let cover = match (&cover_exact, &cover_mc) {
        (Some(e), _) => Some(CoverSummary {
            t_cov: e.t_cov,
            standard_error: 0.0,
            certainty: Certainty::Exact,
            worst_start: e.worst_start,
        }),
        (None, Some(mc)) => Some(CoverSummary {
            t_cov: mc.mean,
            standard_error: mc.standard_error,
            certainty: Certainty::Estimate,
            worst_start: mc.worst_start,
        }),
        _ => None,
    };
    let sandwich = cover.as_ref().map(|c| {
        chain::sandwich_check_with_slack(c.t_cov, hitting.t_hit, n, 4.0 * c.standard_error)
    });

    let geometry = match &metric {
        Some(m) if n <= budgets.geometry_vertices && (toggles.packing || toggles.covering || toggles.chaining) => {
            Some(geometry_summary(m, toggles, budgets)?)
        }
        _ => None,
    };

    let gff = match &metric {
        Some(m) if toggles.gff => {
            let root = resistance.witness.0;
            let model = GffModel::new(GreenKernel::new(m, root)?);
            let expected_max = gff::estimate_expected_max(&model, budgets.gff_replicas, rng::derive_seed(seed, &[2]))?;
            let dlp_ratio = match &cover {
                Some(c) if expected_max.mean > 0.0 => Some(gff::dlp_ratio(g, c.t_cov, expected_max.mean)?),
                _ => None,
            };
            Some(GffSummary { root, expected_max, dlp_ratio })
        }
        _ => None,
    };

    let analysis = GraphAnalysis {
        vertex_count: n,
        edge_count: g.edge_count(),
        volume: g.volume(),
        matthews_upper: if n >= 2 { chain::matthews_upper(hitting.t_hit, n) } else { 0.0 },
        resistance,
        hitting,
        cover_exact,
        cover_mc,
        cover,
        sandwich,
        geometry,
        gff,
        starts,
    };
    Ok((analysis, metric))
}

fn geometry_summary(m: &ResistanceMetric, toggles: &Toggles, budgets: &Budgets) -> Result<GeometrySummary> {
    let n = m.vertex_count();
    let preferred = budgets
        .net_mode
        .unwrap_or(if n <= budgets.exact_net_vertices { NetMode::Exact } else { NetMode::Greedy });
    match geometry_with_mode(m, toggles, preferred) {
        Err(Error::BudgetExceeded(_)) if budgets.net_mode.is_none() && preferred == NetMode::Exact => {
            geometry_with_mode(m, toggles, NetMode::Greedy)
        }
        other => other,
    }
}

fn geometry_with_mode(m: &ResistanceMetric, toggles: &Toggles, mode: NetMode) -> Result<GeometrySummary> {
    let scales = geometry::dyadic_scales(m);
    let radii = scales.radii();
    let want_cover = toggles.covering || toggles.chaining;
    let mut entries = Vec::with_capacity(radii.len());
    let mut best_sudakov: Option<f64> = None;
    for &r in radii {
        let covering = if want_cover {
            Some(if r == 0.0 { m.vertex_count() } else { geometry::covering_number(m, r, mode)?.count })
        } else {
            None
        };
        let packing = if toggles.packing {
            let net = geometry::packing_number(m, r, mode)?;
            if net.count >= 2 {
                let s = geometry::sudakov_functional(m, &net.centers)?;
                best_sudakov = Some(best_sudakov.map_or(s, |b: f64| b.max(s)));
            }
            Some(net.count)
        } else {
            None
        };
        entries.push(ScaleEntry { radius: r, covering, packing });
    }
    let chaining = if toggles.chaining {
        let counts: Vec<usize> = entries[1..].iter().map(|e| e.covering.unwrap()).collect();
        Some(geometry::chaining_sum(&scales, &counts))
    } else {
        None
    };
    Ok(GeometrySummary { mode, k0: scales.k0(), scales: entries, chaining, sudakov: best_sudakov })
}
