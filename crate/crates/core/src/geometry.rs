//! Packing and covering numbers of the resistance metric, dyadic scales, and
//! the chaining and Sudakov functionals.
//!
//! Exact solvers use 64-bit vertex masks and are limited to graphs with at
//! most [`EXACT_VERTEX_LIMIT`] vertices and a search-node budget. Greedy
//! modes run at any size; greedy packing is a lower bound on the packing
//! number and greedy covering an upper bound on the covering number.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resistance::ResistanceMetric;

pub const EXACT_VERTEX_LIMIT: usize = 64;
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Packing,
    Covering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetResult {
    pub centers: Vec<usize>,
    pub count: usize,
    pub mode: NetMode,
    pub radius: f64,
    pub kind: NetKind,
}

impl NetResult {
    /// Check the defining property against the metric: disjoint balls for
    /// packings, full coverage for coverings.
    pub fn is_valid_for(&self, m: &ResistanceMetric) -> bool {
        let n = m.vertex_count();
        match self.kind {
            NetKind::Packing => {
                let mut owner = vec![false; n];
                for &c in &self.centers {
                    for z in m.ball(c, self.radius) {
                        if owner[z] {
                            return false;
                        }
                        owner[z] = true;
                    }
                }
                true
            }
            NetKind::Covering => (0..n).all(|z| self.centers.iter().any(|&c| m.get(c, z) <= self.radius)),
        }
    }
}

/// Non-increasing radii `ℓ_0 = diam ≥ … ≥ ℓ_{k_0} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSequence {
    radii: Vec<f64>,
}

impl ScaleSequence {
    /// Validate an externally supplied sequence.
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        let ok = radii.len() >= 2
            && radii.windows(2).all(|w| w[0] >= w[1])
            && *radii.last().unwrap() == 0.0
            && radii[radii.len() - 2] > 0.0;
        if !ok {
            return Err(Error::InvalidParameters(
                "scales must be non-increasing, end in 0, with a positive second-to-last entry".into(),
            ));
        }
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Index of the final (zero) scale.
    pub fn k0(&self) -> usize {
        self.radii.len() - 1
    }
}

/// `ℓ_k = diam / 2^k` until a radius drops below the smallest positive
/// resistance, which is replaced by 0. A single vertex gives `(0)`, `k_0 = 0`.
pub fn dyadic_scales(m: &ResistanceMetric) -> ScaleSequence {
    let (diam, _) = m.diameter();
    if m.vertex_count() == 1 {
        return ScaleSequence { radii: vec![0.0] };
    }
    let floor = m.min_positive();
    let mut radii = vec![diam];
    let mut k = 1;
    loop {
        let r = diam / f64::powi(2.0, k);
        if r < floor {
            break;
        }
        radii.push(r);
        k += 1;
    }
    radii.push(0.0);
    ScaleSequence { radii }
}

#[derive(Debug, Clone, Copy)]
pub struct NetOptions {
    pub node_budget: u64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self { node_budget: DEFAULT_NODE_BUDGET }
    }
}

fn ball_masks(m: &ResistanceMetric, r: f64) -> Result<Vec<u64>> {
    let n = m.vertex_count();
    if n > EXACT_VERTEX_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "exact nets support at most {EXACT_VERTEX_LIMIT} vertices, got {n}"
        )));
    }
    Ok((0..n)
        .map(|x| m.row(x).iter().enumerate().filter(|(_, &d)| d <= r).fold(0u64, |acc, (z, _)| acc | (1 << z)))
        .collect())
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("radius must be non-negative, got {r}")))
    }
}

pub fn packing_number(m: &ResistanceMetric, r: f64, mode: NetMode) -> Result<NetResult> {
    packing_number_with(m, r, mode, NetOptions::default())
}

pub fn covering_number(m: &ResistanceMetric, r: f64, mode: NetMode) -> Result<NetResult> {
    covering_number_with(m, r, mode, NetOptions::default())
}

pub fn packing_number_with(m: &ResistanceMetric, r: f64, mode: NetMode, opts: NetOptions) -> Result<NetResult> {
    check_radius(r)?;
    let centers = match mode {
        NetMode::Greedy => greedy_packing(m, r),
        NetMode::Exact => exact_packing(m, r, opts.node_budget)?,
    };
    Ok(NetResult { count: centers.len(), centers, mode, radius: r, kind: NetKind::Packing })
}

pub fn covering_number_with(m: &ResistanceMetric, r: f64, mode: NetMode, opts: NetOptions) -> Result<NetResult> {
    check_radius(r)?;
    let centers = match mode {
        NetMode::Greedy => greedy_covering(m, r),
        NetMode::Exact => exact_covering(m, r, opts.node_budget)?,
    };
    Ok(NetResult { count: centers.len(), centers, mode, radius: r, kind: NetKind::Covering })
}

/// Maximal packing in ascending vertex order.
fn greedy_packing(m: &ResistanceMetric, r: f64) -> Vec<usize> {
    let n = m.vertex_count();
    let mut claimed = vec![false; n];
    let mut centers = Vec::new();
    let mut ball = Vec::new();
    for x in 0..n {
        if claimed[x] {
            continue;
        }
        ball.clear();
        ball.extend(m.row(x).iter().enumerate().filter(|(_, &d)| d <= r).map(|(z, _)| z));
        if ball.iter().all(|&z| !claimed[z]) {
            for &z in &ball {
                claimed[z] = true;
            }
            centers.push(x);
        }
    }
    centers
}

/// Standard greedy cover (largest new coverage first, lowest id on ties),
/// evaluated lazily: gains only shrink, so a stale heap entry whose refreshed
/// gain still tops the heap is the true maximizer.
fn greedy_covering(m: &ResistanceMetric, r: f64) -> Vec<usize> {
    let n = m.vertex_count();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let gain = |x: usize, covered: &[bool]| m.row(x).iter().zip(covered).filter(|(&d, &c)| d <= r && !c).count();
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..n).map(|x| (gain(x, &covered), Reverse(x))).collect();
    let mut centers = Vec::new();
    while remaining > 0 {
        let (stale, Reverse(x)) = heap.pop().expect("some center covers every vertex");
        let fresh = gain(x, &covered);
        if fresh < stale {
            heap.push((fresh, Reverse(x)));
            continue;
        }
        for (z, &d) in m.row(x).iter().enumerate() {
            if d <= r && !covered[z] {
                covered[z] = true;
                remaining -= 1;
            }
        }
        centers.push(x);
    }
    centers.sort_unstable();
    centers
}

struct Search {
    nodes: u64,
    budget: u64,
}

impl Search {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(Error::BudgetExceeded(format!("exact net search exceeded {} nodes", self.budget)))
        } else {
            Ok(())
        }
    }
}

/// Maximum independent set of the ball-intersection graph.
fn exact_packing(m: &ResistanceMetric, r: f64, budget: u64) -> Result<Vec<usize>> {
    let balls = ball_masks(m, r)?;
    let n = balls.len();
    let conflict: Vec<u64> =
        (0..n).map(|x| (0..n).filter(|&y| balls[x] & balls[y] != 0).fold(0u64, |acc, y| acc | (1 << y))).collect();

    // clique partition of `p` in the conflict graph bounds any packing inside `p`
    fn clique_bound(mut p: u64, conflict: &[u64]) -> usize {
        let mut count = 0;
        while p != 0 {
            let v = p.trailing_zeros() as usize;
            let mut cand = p & conflict[v] & !(1 << v);
            p &= !(1 << v);
            while cand != 0 {
                let u = cand.trailing_zeros() as usize;
                p &= !(1 << u);
                cand &= conflict[u] & !(1 << u);
            }
            count += 1;
        }
        count
    }

    fn go(p: u64, chosen: u64, size: usize, best: &mut (usize, u64), conflict: &[u64], s: &mut Search) -> Result<()> {
        s.tick()?;
        if p == 0 {
            if size > best.0 {
                *best = (size, chosen);
            }
            return Ok(());
        }
        if size + clique_bound(p, conflict) <= best.0 {
            return Ok(());
        }
        let v = p.trailing_zeros() as usize;
        go(p & !conflict[v], chosen | (1 << v), size + 1, best, conflict, s)?;
        go(p & !(1 << v), chosen, size, best, conflict, s)
    }

    let mut best = (0, 0u64);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(all, 0, 0, &mut best, &conflict, &mut Search { nodes: 0, budget })?;
    Ok(bits(best.1).collect())
}

/// Minimum set cover by balls; branch on the centers able to cover the lowest
/// uncovered vertex.
fn exact_covering(m: &ResistanceMetric, r: f64, budget: u64) -> Result<Vec<usize>> {
    let balls = ball_masks(m, r)?;
    let n = balls.len();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    // each vertex in a set with pairwise disjoint coverers needs its own center
    fn lower_bound(uncovered: u64, balls: &[u64]) -> usize {
        let mut used = 0u64;
        let mut count = 0;
        for u in bits(uncovered) {
            if balls[u] & used == 0 {
                used |= balls[u];
                count += 1;
            }
        }
        let widest = balls.iter().map(|b| (b & uncovered).count_ones()).max().unwrap_or(1).max(1);
        count.max(uncovered.count_ones().div_ceil(widest) as usize)
    }

    fn go(
        uncovered: u64,
        chosen: &mut Vec<usize>,
        best: &mut Vec<usize>,
        balls: &[u64],
        s: &mut Search,
    ) -> Result<()> {
        s.tick()?;
        if uncovered == 0 {
            if chosen.len() < best.len() {
                *best = chosen.clone();
            }
            return Ok(());
        }
        if chosen.len() + lower_bound(uncovered, balls) >= best.len() {
            return Ok(());
        }
        let u = uncovered.trailing_zeros() as usize;
        // balls are symmetric: the centers covering u are exactly ball(u)
        let mut options: Vec<usize> = bits(balls[u]).collect();
        // drop centers whose new coverage is contained in another option's
        let gains: Vec<u64> = options.iter().map(|&c| balls[c] & uncovered).collect();
        let keep: Vec<bool> = (0..options.len())
            .map(|i| {
                !(0..options.len()).any(|j| {
                    j != i && gains[i] & !gains[j] == 0 && (gains[i] != gains[j] || j < i)
                })
            })
            .collect();
        let mut k = 0;
        options.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        for c in options {
            chosen.push(c);
            go(uncovered & !balls[c], chosen, best, balls, s)?;
            chosen.pop();
        }
        Ok(())
    }

    let mut best: Vec<usize> = (0..=n).collect();
    go(all, &mut Vec::new(), &mut best, &balls, &mut Search { nodes: 0, budget })?;
    best.sort_unstable();
    Ok(best)
}

/// `Σ_{k=1}^{k_0} √(ℓ_{k−1} · ln n_cov(ℓ_k))`.
pub fn chaining_functional(m: &ResistanceMetric, scales: &ScaleSequence, mode: NetMode) -> Result<f64> {
    let counts = covering_profile(m, scales, mode)?;
    Ok(chaining_sum(scales, &counts))
}

/// Covering counts at `ℓ_1, …, ℓ_{k_0}`; the last is `|V|`.
pub fn covering_profile(m: &ResistanceMetric, scales: &ScaleSequence, mode: NetMode) -> Result<Vec<usize>> {
    let radii = scales.radii();
    (1..radii.len())
        .map(|k| {
            if radii[k] == 0.0 {
                Ok(m.vertex_count())
            } else {
                covering_number(m, radii[k], mode).map(|c| c.count)
            }
        })
        .collect()
}

/// The chaining sum for given covering counts (one per `ℓ_1..ℓ_{k_0}`).
pub fn chaining_sum(scales: &ScaleSequence, counts: &[usize]) -> f64 {
    let radii = scales.radii();
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (radii[i] * (c as f64).ln()).sqrt())
        .sum()
}

/// `min_{y≠z} √R(y,z) · √(ln |centers|)`.
pub fn sudakov_functional(m: &ResistanceMetric, centers: &[usize]) -> Result<f64> {
    let mut distinct = centers.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::TooFewCenters(distinct.len()));
    }
    let mut separation = f64::INFINITY;
    for (i, &y) in distinct.iter().enumerate() {
        for &z in &distinct[i + 1..] {
            separation = separation.min(m.get(y, z));
        }
    }
    Ok(separation.sqrt() * (distinct.len() as f64).ln().sqrt())
}
