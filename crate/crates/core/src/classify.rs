//! Ensemble runs across sizes, Type 1 / Type 2 event frequencies and
//! scaling fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Budgets, Certainty, Toggles};
use crate::ensembles::{Family, FamilySpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{least_squares, median, quantile};

pub const STATS_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];
pub const DEFAULT_THRESHOLD: f64 = 0.9;
/// Packing radii are `diam_R / 2^k` for `k = 1..=PACKING_GRID_LEN`.
pub const PACKING_GRID_LEN: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleOptions {
    pub sizes: Vec<usize>,
    pub samples: usize,
    pub budgets: Budgets,
    /// Compute the chaining functional and greedy packing counts when the
    /// resistance table fits the budget.
    pub geometry: bool,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self { sizes: Vec::new(), samples: 10, budgets: Budgets::default(), geometry: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub size: usize,
    pub sample: usize,
    pub seed: u64,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub volume: f64,
    pub diam_r: f64,
    pub diam_certainty: Certainty,
    pub t_hit: f64,
    pub t_hit_certainty: Certainty,
    pub t_cov: f64,
    pub t_cov_se: f64,
    pub t_cov_certainty: Certainty,
    pub chaining: Option<f64>,
    pub packing_counts: Vec<usize>,
    pub sandwich_passed: bool,
}

impl SampleRecord {
    pub const CSV_HEADER: &'static str = "size,sample,seed,vertex_count,edge_count,volume,diam_r_ohms,diam_certainty,\
t_hit_steps,t_hit_certainty,t_cov_steps,t_cov_se_steps,t_cov_certainty,chaining_sqrt_ohms,packing_counts,sandwich_passed";

    pub fn csv_row(&self) -> String {
        let cert = |c: Certainty| match c {
            Certainty::Exact => "exact",
            Certainty::LowerBound => "lower_bound",
            Certainty::Estimate => "estimate",
        };
        let packing: Vec<String> = self.packing_counts.iter().map(|c| c.to_string()).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.size,
            self.sample,
            self.seed,
            self.vertex_count,
            self.edge_count,
            self.volume,
            self.diam_r,
            cert(self.diam_certainty),
            self.t_hit,
            cert(self.t_hit_certainty),
            self.t_cov,
            self.t_cov_se,
            cert(self.t_cov_certainty),
            self.chaining.map(|c| c.to_string()).unwrap_or_default(),
            packing.join(";"),
            self.sandwich_passed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationFailure {
    pub size: usize,
    pub sample: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub schema_version: u32,
    pub family: Family,
    pub master_seed: u64,
    pub sizes: Vec<usize>,
    pub samples: usize,
    pub records: Vec<SampleRecord>,
    pub failures: Vec<GenerationFailure>,
    /// True when some requested samples are missing from `records`.
    pub partial: bool,
}

impl EnsembleStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SampleRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn records_at(&self, size: usize) -> impl Iterator<Item = &SampleRecord> {
        self.records.iter().filter(move |r| r.size == size)
    }

    /// Sizes that have at least one record, ascending.
    pub fn observed_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.records.iter().map(|r| r.size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn sandwich_violations(&self) -> usize {
        self.records.iter().filter(|r| !r.sandwich_passed).count()
    }
}

/// Seed of sample `sample` at size `size`.
pub fn record_seed(master: u64, size: usize, sample: usize) -> u64 {
    rng::derive_seed(master, &[size as u64, sample as u64])
}

pub fn run_ensemble(family: &Family, options: &EnsembleOptions, master_seed: u64) -> Result<EnsembleStats> {
    family.validate()?;
    options.budgets.validate()?;
    if options.sizes.is_empty() || options.samples == 0 {
        return Err(Error::InvalidParameters("ensemble needs at least one size and one sample".into()));
    }
    let mut sizes = options.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let jobs: Vec<(usize, usize)> =
        sizes.iter().flat_map(|&n| (0..options.samples).map(move |s| (n, s))).collect();
    let outcomes: Vec<Result<std::result::Result<SampleRecord, GenerationFailure>>> = jobs
        .par_iter()
        .map(|&(size, sample)| run_sample(family, options, master_seed, size, sample))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o? {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    Ok(EnsembleStats {
        schema_version: STATS_SCHEMA_VERSION,
        family: family.clone(),
        master_seed,
        partial: !failures.is_empty(),
        sizes,
        samples: options.samples,
        records,
        failures,
    })
}

fn run_sample(
    family: &Family,
    options: &EnsembleOptions,
    master_seed: u64,
    size: usize,
    sample: usize,
) -> Result<std::result::Result<SampleRecord, GenerationFailure>> {
    let seed = record_seed(master_seed, size, sample);
    let spec = FamilySpec::new(family.clone(), size, rng::derive_seed(seed, &[0]));
    let g = match spec.generate() {
        Ok(g) => g,
        Err(e @ (Error::EmptyGraph | Error::RejectionBudgetExceeded { .. })) => {
            return Ok(Err(GenerationFailure { size, sample, seed, reason: e.to_string() }))
        }
        Err(e) => return Err(e),
    };
    let toggles = Toggles {
        resistance: true,
        packing: false,
        covering: options.geometry,
        chaining: options.geometry,
        cover_mc: true,
        cover_exact: true,
        gff: false,
    };
    let a = analysis::analyze_graph(&g, &toggles, &options.budgets, Some(rng::derive_seed(seed, &[1])))?;
    let cover = a
        .cover
        .as_ref()
        .ok_or_else(|| Error::InvalidParameters(format!("size {size} gives a single-vertex graph")))?;
    let mut packing_counts = Vec::new();
    if options.geometry && g.vertex_count() <= options.budgets.geometry_vertices {
        let m = crate::resistance::ResistanceMetric::compute(
            &g,
            crate::resistance::ResistanceOptions {
                dense_budget: options.budgets.resistance_table_vertices,
                table_budget: options.budgets.resistance_table_vertices,
                ..Default::default()
            },
        );
        if let Ok(m) = m {
            for k in 1..=PACKING_GRID_LEN {
                let r = a.resistance.diameter / (1u64 << k) as f64;
                packing_counts.push(crate::geometry::packing_number(&m, r, crate::geometry::NetMode::Greedy)?.count);
            }
        }
    }
    Ok(Ok(SampleRecord {
        size,
        sample,
        seed,
        vertex_count: a.vertex_count,
        edge_count: a.edge_count,
        volume: a.volume,
        diam_r: a.resistance.diameter,
        diam_certainty: a.resistance.diameter_certainty,
        t_hit: a.hitting.t_hit,
        t_hit_certainty: a.hitting.certainty,
        t_cov: cover.t_cov,
        t_cov_se: cover.standard_error,
        t_cov_certainty: cover.certainty,
        chaining: a.geometry.as_ref().and_then(|geo| geo.chaining),
        packing_counts,
        sandwich_passed: a.sandwich.is_none_or(|s| s.passed),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Type1Consistent,
    Type2Consistent,
    Neither,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFrequencies {
    pub size: usize,
    pub records: usize,
    pub median_vertex_count: f64,
    pub median_ratio: f64,
    /// Frequency of `λ⁻¹ ≤ t_cov / (t_hit ln|V|) ≤ 2`, one per grid value.
    pub type1: Vec<f64>,
    /// Frequency of `1 ≤ t_cov / t_hit ≤ λ`, one per grid value.
    pub type2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub lambda_grid: Vec<f64>,
    pub threshold: f64,
    pub per_size: Vec<EventFrequencies>,
    pub type1_met: bool,
    pub type2_met: bool,
    /// Slope of `ln median(t_cov/t_hit)` against `ln ln median|V|`; decides
    /// the verdict when both event families meet the threshold.
    pub log_ratio_slope: Option<f64>,
    pub verdict: Verdict,
}

impl TypeReport {
    /// Type-2 frequency at grid value `lambda` for every size.
    pub fn type2_at(&self, lambda: f64) -> Option<Vec<f64>> {
        let i = self.lambda_grid.iter().position(|&l| l == lambda)?;
        Some(self.per_size.iter().map(|f| f.type2[i]).collect())
    }
}

const SLOPE_TYPE1: f64 = 0.6;
const SLOPE_TYPE2: f64 = 0.4;

pub fn classify_type(stats: &EnsembleStats, lambda_grid: &[f64], threshold: f64) -> Result<TypeReport> {
    if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l >= 1.0)) {
        return Err(Error::InvalidParameters("lambda grid values must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameters(format!("threshold {threshold} outside [0, 1]")));
    }
    let mut grid = lambda_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let sizes = stats.observed_sizes();
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct sizes, need 3", sizes.len())));
    }
    let mut per_size = Vec::with_capacity(sizes.len());
    for &size in &sizes {
        let recs: Vec<_> = stats.records_at(size).collect();
        if recs.len() < 10 {
            return Err(Error::InsufficientData(format!("{} samples at size {size}, need 10", recs.len())));
        }
        let mut type1 = vec![0.0; grid.len()];
        let mut type2 = vec![0.0; grid.len()];
        for r in &recs {
            if r.vertex_count < 2 || !(r.t_hit > 0.0) {
                continue;
            }
            let ln_v = (r.vertex_count as f64).ln();
            let ratio = r.t_cov / r.t_hit;
            let slack = 4.0 * r.t_cov_se / r.t_hit;
            for (i, &l) in grid.iter().enumerate() {
                // the sides that hold for every graph get the Monte Carlo allowance
                if ratio / ln_v >= 1.0 / l && (ratio - slack) / ln_v <= 2.0 {
                    type1[i] += 1.0;
                }
                if ratio + slack >= 1.0 && ratio <= l {
                    type2[i] += 1.0;
                }
            }
        }
        let count = recs.len() as f64;
        type1.iter_mut().chain(type2.iter_mut()).for_each(|f| *f /= count);
        let ratios: Vec<f64> = recs.iter().map(|r| r.t_cov / r.t_hit).collect();
        let verts: Vec<f64> = recs.iter().map(|r| r.vertex_count as f64).collect();
        per_size.push(EventFrequencies {
            size,
            records: recs.len(),
            median_vertex_count: median(&verts),
            median_ratio: median(&ratios),
            type1,
            type2,
        });
    }
    let top = &per_size[per_size.len() - 2..];
    let met = |pick: fn(&EventFrequencies) -> &Vec<f64>| {
        (0..grid.len()).any(|i| top.iter().all(|f| pick(f)[i] >= threshold))
    };
    let type1_met = met(|f| &f.type1);
    let type2_met = met(|f| &f.type2);
    let xs: Vec<f64> = per_size.iter().map(|f| f.median_vertex_count.ln().max(f64::MIN_POSITIVE).ln()).collect();
    let ys: Vec<f64> = per_size.iter().map(|f| f.median_ratio.ln()).collect();
    let log_ratio_slope = least_squares(&xs, &ys).map(|(s, _)| s);
    let verdict = match (type1_met, type2_met) {
        (true, false) => Verdict::Type1Consistent,
        (false, true) => Verdict::Type2Consistent,
        (false, false) => Verdict::Neither,
        (true, true) => match log_ratio_slope {
            Some(s) if s >= SLOPE_TYPE1 => Verdict::Type1Consistent,
            Some(s) if s <= SLOPE_TYPE2 => Verdict::Type2Consistent,
            _ => Verdict::Inconclusive,
        },
    };
    Ok(TypeReport { lambda_grid: grid, threshold, per_size, type1_met, type2_met, log_ratio_slope, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// `ln median ~ a ln N`; reports `a`.
    PowerInN,
    /// `ln median ~ N ln b`; reports `b`.
    PerLevelGeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    TCov,
    TCovPerEdge,
    TCovPerSize,
    TCovPerSizeSquared,
    THit,
    DiamR,
    VertexCount,
}

impl Observable {
    pub fn of(&self, r: &SampleRecord) -> f64 {
        let n = r.size as f64;
        match self {
            Observable::TCov => r.t_cov,
            Observable::TCovPerEdge => r.t_cov / r.edge_count as f64,
            Observable::TCovPerSize => r.t_cov / n,
            Observable::TCovPerSizeSquared => r.t_cov / (n * n),
            Observable::THit => r.t_hit,
            Observable::DiamR => r.diam_r,
            Observable::VertexCount => r.vertex_count as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub model: ScalingModel,
    pub observable: Observable,
    pub estimate: f64,
    /// 95% percentile bootstrap interval over samples within each size.
    pub ci: (f64, f64),
    pub sizes: Vec<usize>,
    pub medians: Vec<f64>,
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Medians of `observable` per observed size.
pub fn medians_by_size(stats: &EnsembleStats, observable: Observable) -> (Vec<usize>, Vec<f64>) {
    let sizes = stats.observed_sizes();
    let medians = sizes
        .iter()
        .map(|&s| median(&stats.records_at(s).map(|r| observable.of(r)).collect::<Vec<_>>()))
        .collect();
    (sizes, medians)
}

/// Ratios of medians at consecutive observed sizes.
pub fn consecutive_ratios(stats: &EnsembleStats, observable: Observable) -> Vec<f64> {
    let (_, medians) = medians_by_size(stats, observable);
    medians.windows(2).map(|w| w[1] / w[0]).collect()
}

fn fit(model: ScalingModel, sizes: &[usize], medians: &[f64]) -> Option<f64> {
    let xs: Vec<f64> = sizes
        .iter()
        .map(|&s| match model {
            ScalingModel::PowerInN => (s as f64).ln(),
            ScalingModel::PerLevelGeometric => s as f64,
        })
        .collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let (slope, _) = least_squares(&xs, &ys)?;
    Some(match model {
        ScalingModel::PowerInN => slope,
        ScalingModel::PerLevelGeometric => slope.exp(),
    })
}

pub fn fit_scaling_exponent(stats: &EnsembleStats, model: ScalingModel, observable: Observable) -> Result<ExponentFit> {
    let (sizes, medians) = medians_by_size(stats, observable);
    if sizes.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct sizes, need 3", sizes.len())));
    }
    if medians.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::NumericalFailure("non-positive median in scaling fit".into()));
    }
    let estimate = fit(model, &sizes, &medians).ok_or_else(|| Error::NumericalFailure("degenerate scaling fit".into()))?;
    let groups: Vec<Vec<f64>> =
        sizes.iter().map(|&s| stats.records_at(s).map(|r| observable.of(r)).collect()).collect();
    let seed = rng::derive_seed(stats.master_seed, &[u64::MAX]);
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = rng::stream(seed, &[b as u64]);
            let meds: Vec<f64> = groups
                .iter()
                .map(|g| {
                    use rand::Rng;
                    let draw: Vec<f64> = (0..g.len()).map(|_| g[rng.random_range(0..g.len())]).collect();
                    median(&draw)
                })
                .collect();
            fit(model, &sizes, &meds)
        })
        .collect();
    let ci = (quantile(&boot, 0.025), quantile(&boot, 0.975));
    Ok(ExponentFit { model, observable, estimate, ci, sizes, medians })
}

/// Interquartile ratio `Q3 / Q1` of `t_cov · p_N / N²` at one size, given
/// the survival probability `p_N`.
pub fn iic_dispersion(stats: &EnsembleStats, size: usize, survival: f64) -> Option<f64> {
    let n = size as f64;
    let vals: Vec<f64> = stats.records_at(size).map(|r| r.t_cov * survival / (n * n)).collect();
    if vals.len() < 4 {
        return None;
    }
    let q1 = quantile(&vals, 0.25);
    (q1 > 0.0).then(|| quantile(&vals, 0.75) / q1)
}
