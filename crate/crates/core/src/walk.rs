//! Monte Carlo cover and hitting times.
//!
//! Replica `r` from start `s` draws from the substream `(seed, [s, r])`, so
//! estimates do not depend on the thread count or scheduling. Step counts
//! are integers and are summed exactly.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{self, StreamRng};
use crate::stats::MeanEstimate;

pub const DEFAULT_STEP_CAP: u64 = 10_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "vertices")]
pub enum StartPolicy {
    Fixed(usize),
    WorstOfSet(Vec<usize>),
}

impl StartPolicy {
    pub fn starts(&self) -> Vec<usize> {
        match self {
            StartPolicy::Fixed(v) => vec![*v],
            StartPolicy::WorstOfSet(vs) => {
                let mut vs = vs.clone();
                vs.sort_unstable();
                vs.dedup();
                vs
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartEstimate {
    pub start: usize,
    pub mean: f64,
    pub standard_error: f64,
}

/// Monte Carlo cover (or hitting) time. Under `WorstOfSet` the headline
/// value is the largest per-start mean; it estimates a lower bound on the
/// true maximum over all starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub replicas: usize,
    pub policy: StartPolicy,
    pub seed: u64,
    pub worst_start: usize,
    pub per_start: Vec<StartEstimate>,
}

impl CoverEstimate {
    /// Whether `target` lies within `z` standard errors of the headline mean.
    pub fn agrees(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.standard_error
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WalkOptions {
    pub step_cap: u64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self { step_cap: DEFAULT_STEP_CAP }
    }
}

/// Per-vertex neighbor sampler.
struct Stepper<'a> {
    g: &'a WeightedGraph,
    unit: bool,
    /// cumulative neighbor weights per vertex, same layout as the adjacency
    cumulative: Vec<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    fn new(g: &'a WeightedGraph) -> Self {
        let unit = g.has_unit_weights();
        let cumulative = if unit {
            Vec::new()
        } else {
            (0..g.vertex_count())
                .map(|x| {
                    let mut acc = 0.0;
                    g.neighbor_weights(x)
                        .iter()
                        .map(|w| {
                            acc += w;
                            acc
                        })
                        .collect()
                })
                .collect()
        };
        Self { g, unit, cumulative }
    }

    #[inline]
    fn step(&self, x: usize, rng: &mut StreamRng) -> usize {
        let nbrs = self.g.neighbors(x);
        if self.unit {
            nbrs[rng.random_range(0..nbrs.len())]
        } else {
            let cum = &self.cumulative[x];
            let u = rng.random::<f64>() * cum[cum.len() - 1];
            nbrs[cum.partition_point(|&c| c <= u).min(nbrs.len() - 1)]
        }
    }
}

fn cover_run(s: &Stepper, start: usize, rng: &mut StreamRng, cap: u64) -> Result<u64> {
    let n = s.g.vertex_count();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut remaining = n - 1;
    let mut x = start;
    let mut steps = 0u64;
    while remaining > 0 {
        if steps >= cap {
            return Err(Error::StepBudgetExceeded { cap });
        }
        x = s.step(x, rng);
        steps += 1;
        if !visited[x] {
            visited[x] = true;
            remaining -= 1;
        }
    }
    Ok(steps)
}

fn hitting_run(s: &Stepper, start: usize, target: usize, rng: &mut StreamRng, cap: u64) -> Result<u64> {
    let mut x = start;
    let mut steps = 0u64;
    while x != target {
        if steps >= cap {
            return Err(Error::StepBudgetExceeded { cap });
        }
        x = s.step(x, rng);
        steps += 1;
    }
    Ok(steps)
}

/// Steps until the walk from `start` has visited every vertex.
pub fn simulate_cover_once(g: &WeightedGraph, start: usize, rng: &mut StreamRng) -> Result<u64> {
    simulate_cover_once_with(g, start, rng, WalkOptions::default())
}

pub fn simulate_cover_once_with(
    g: &WeightedGraph,
    start: usize,
    rng: &mut StreamRng,
    opts: WalkOptions,
) -> Result<u64> {
    g.check_vertex(start)?;
    let steps = cover_run(&Stepper::new(g), start, rng, opts.step_cap)?;
    check_tree_run(g, start, steps, tree_floor(g, start)?)?;
    Ok(steps)
}

/// On a tree every edge is crossed twice except those on the path to the
/// last new vertex: `steps ≥ 2|E| − ecc(start)`.
fn tree_floor(g: &WeightedGraph, start: usize) -> Result<Option<u64>> {
    if !g.is_tree() {
        return Ok(None);
    }
    let ecc = *g.bfs_distances(start)?.iter().max().unwrap_or(&0);
    Ok(Some((2 * g.edge_count() - ecc) as u64))
}

fn check_tree_run(g: &WeightedGraph, start: usize, steps: u64, floor: Option<u64>) -> Result<()> {
    match floor {
        Some(f) if steps < f || steps < g.edge_count() as u64 => Err(Error::NumericalFailure(format!(
            "tree cover run from {start} took {steps} steps, below the floor {f}"
        ))),
        _ => Ok(()),
    }
}

pub fn estimate_cover_time(
    g: &WeightedGraph,
    policy: &StartPolicy,
    replicas: usize,
    seed: u64,
) -> Result<CoverEstimate> {
    estimate_cover_time_with(g, policy, replicas, seed, WalkOptions::default())
}

pub fn estimate_cover_time_with(
    g: &WeightedGraph,
    policy: &StartPolicy,
    replicas: usize,
    seed: u64,
    opts: WalkOptions,
) -> Result<CoverEstimate> {
    let starts = check_request(g, policy, replicas)?;
    let stepper = Stepper::new(g);
    let floors: Vec<Option<u64>> = starts.iter().map(|&s| tree_floor(g, s)).collect::<Result<_>>()?;
    let runs = run_replicas(&starts, replicas, |i, r| {
        let start = starts[i];
        let mut rng = rng::stream(seed, &[start as u64, r as u64]);
        let steps = cover_run(&stepper, start, &mut rng, opts.step_cap)?;
        check_tree_run(g, start, steps, floors[i])?;
        Ok(steps)
    })?;
    Ok(summarize(&starts, &runs, replicas, policy.clone(), seed))
}

/// Mean first-passage time from `x` to `y`.
pub fn estimate_hitting(g: &WeightedGraph, x: usize, y: usize, replicas: usize, seed: u64) -> Result<CoverEstimate> {
    estimate_hitting_with(g, x, y, replicas, seed, WalkOptions::default())
}

pub fn estimate_hitting_with(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    replicas: usize,
    seed: u64,
    opts: WalkOptions,
) -> Result<CoverEstimate> {
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::InvalidParameters("hitting estimate needs distinct source and target".into()));
    }
    let policy = StartPolicy::Fixed(x);
    let starts = check_request(g, &policy, replicas)?;
    let stepper = Stepper::new(g);
    let runs = run_replicas(&starts, replicas, |_, r| {
        let mut rng = rng::stream(seed, &[x as u64, y as u64, r as u64]);
        hitting_run(&stepper, x, y, &mut rng, opts.step_cap)
    })?;
    Ok(summarize(&starts, &runs, replicas, policy, seed))
}

fn check_request(g: &WeightedGraph, policy: &StartPolicy, replicas: usize) -> Result<Vec<usize>> {
    if replicas < 2 {
        return Err(Error::InvalidParameters(format!(
            "at least 2 replicas are needed for a standard error, got {replicas}"
        )));
    }
    let starts = policy.starts();
    if starts.is_empty() {
        return Err(Error::InvalidParameters("start set is empty".into()));
    }
    for &s in &starts {
        g.check_vertex(s)?;
    }
    Ok(starts)
}

fn run_replicas<F>(starts: &[usize], replicas: usize, run: F) -> Result<Vec<Vec<u64>>>
where
    F: Fn(usize, usize) -> Result<u64> + Sync,
{
    let flat: Vec<u64> = (0..starts.len() * replicas)
        .into_par_iter()
        .map(|k| run(k / replicas, k % replicas))
        .collect::<Result<_>>()?;
    Ok(flat.chunks(replicas).map(|c| c.to_vec()).collect())
}

fn summarize(starts: &[usize], runs: &[Vec<u64>], replicas: usize, policy: StartPolicy, seed: u64) -> CoverEstimate {
    let per_start: Vec<StartEstimate> = starts
        .iter()
        .zip(runs)
        .map(|(&start, steps)| {
            let m = MeanEstimate::from_counts(steps);
            StartEstimate { start, mean: m.mean, standard_error: m.standard_error }
        })
        .collect();
    let mut worst = 0;
    for (i, s) in per_start.iter().enumerate() {
        if s.mean > per_start[worst].mean {
            worst = i;
        }
    }
    CoverEstimate {
        mean: per_start[worst].mean,
        standard_error: per_start[worst].standard_error,
        replicas,
        policy,
        seed,
        worst_start: per_start[worst].start,
        per_start,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{complete, cycle, gen_sierpinski, path, star};

    #[test]
    fn single_edge_is_covered_in_one_step() {
        let g = path(2).unwrap();
        let mut rng = rng::stream(0, &[]);
        for _ in 0..10 {
            assert_eq!(simulate_cover_once(&g, 0, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn path_cover_takes_at_least_two_steps() {
        let g = path(3).unwrap();
        let mut rng = rng::stream(1, &[]);
        for _ in 0..1000 {
            assert!(simulate_cover_once(&g, 0, &mut rng).unwrap() >= 2);
        }
    }

    #[test]
    fn triangle_cover_matches_oracle() {
        let est = estimate_cover_time(&complete(3).unwrap(), &StartPolicy::Fixed(0), 100_000, 5).unwrap();
        assert!(est.agrees(3.0, 4.0), "{est:?}");
    }

    #[test]
    fn worst_start_on_path_is_the_middle() {
        let est =
            estimate_cover_time(&path(3).unwrap(), &StartPolicy::WorstOfSet(vec![0, 1, 2]), 100_000, 6).unwrap();
        assert_eq!(est.worst_start, 1);
        assert!(est.agrees(5.0, 4.0), "{est:?}");
    }

    #[test]
    fn cycle_cover_matches_closed_form() {
        let est = estimate_cover_time(&cycle(8).unwrap(), &StartPolicy::Fixed(0), 100_000, 7).unwrap();
        assert!(est.agrees(28.0, 4.0), "{est:?}");
    }

    #[test]
    fn hitting_estimates() {
        let est = estimate_hitting(&path(3).unwrap(), 0, 2, 100_000, 8).unwrap();
        assert!(est.agrees(4.0, 4.0), "{est:?}");
        let est = estimate_hitting(&complete(3).unwrap(), 1, 2, 100_000, 8).unwrap();
        assert!(est.agrees(2.0, 4.0), "{est:?}");
        assert!(estimate_hitting(&path(3).unwrap(), 1, 1, 10, 0).is_err());
    }

    #[test]
    fn one_replica_is_rejected() {
        assert!(matches!(
            estimate_cover_time(&path(3).unwrap(), &StartPolicy::Fixed(0), 1, 0),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn estimates_are_deterministic_across_thread_counts() {
        let g = gen_sierpinski(2, [1.0, 3.0], 2).unwrap();
        let policy = StartPolicy::WorstOfSet(vec![0, 1, 2]);
        let a = estimate_cover_time(&g, &policy, 500, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_cover_time(&g, &policy, 500, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn step_cap_is_enforced() {
        let g = cycle(50).unwrap();
        let mut rng = rng::stream(0, &[]);
        assert!(matches!(
            simulate_cover_once_with(&g, 0, &mut rng, WalkOptions { step_cap: 10 }),
            Err(Error::StepBudgetExceeded { cap: 10 })
        ));
    }

    #[test]
    fn tree_runs_respect_the_edge_floor() {
        let g = star(5).unwrap();
        let mut rng = rng::stream(3, &[]);
        for _ in 0..200 {
            assert!(simulate_cover_once(&g, 0, &mut rng).unwrap() >= 9);
        }
    }
}
