//! Independent reference computations for small instances: exhaustive
//! packing and covering, series-parallel networks with closed-form
//! resistance, and random connected weighted graphs.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::resistance::ResistanceMetric;

/// Largest vertex count accepted by the exhaustive searches.
pub const BRUTE_FORCE_LIMIT: usize = 16;

fn ball_masks(m: &ResistanceMetric, r: f64) -> Result<Vec<u32>> {
    let n = m.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::BudgetExceeded(format!("exhaustive search limited to {BRUTE_FORCE_LIMIT} vertices")));
    }
    Ok((0..n).map(|x| m.ball(x, r).iter().fold(0u32, |acc, &z| acc | 1 << z)).collect())
}

/// Maximum number of pairwise-disjoint closed balls, by enumerating every
/// center set.
pub fn brute_force_packing(m: &ResistanceMetric, r: f64) -> Result<usize> {
    let balls = ball_masks(m, r)?;
    let n = balls.len();
    let mut best = 0;
    for set in 1u32..(1 << n) {
        let size = set.count_ones() as usize;
        if size <= best {
            continue;
        }
        let mut union = 0u32;
        let mut disjoint = true;
        for (x, &b) in balls.iter().enumerate() {
            if set >> x & 1 == 1 {
                if union & b != 0 {
                    disjoint = false;
                    break;
                }
                union |= b;
            }
        }
        if disjoint {
            best = size;
        }
    }
    Ok(best)
}

/// Minimum number of closed balls covering every vertex, by enumerating
/// every center set.
pub fn brute_force_covering(m: &ResistanceMetric, r: f64) -> Result<usize> {
    let balls = ball_masks(m, r)?;
    let n = balls.len();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = n;
    for set in 1u32..(1 << n) {
        let size = set.count_ones() as usize;
        if size >= best {
            continue;
        }
        let union = balls.iter().enumerate().filter(|(x, _)| set >> x & 1 == 1).fold(0u32, |acc, (_, &b)| acc | b);
        if union == full {
            best = size;
        }
    }
    Ok(best)
}

/// Two-terminal series-parallel network with its resistance between the
/// terminals computed by the series and parallel laws.
#[derive(Debug, Clone)]
pub struct SeriesParallel {
    pub vertex_count: usize,
    /// `(u, v, conductance)`; parallel edges are merged in [`Self::graph`].
    pub edges: Vec<(usize, usize, f64)>,
    pub source: usize,
    pub sink: usize,
    pub resistance: f64,
}

impl SeriesParallel {
    pub fn edge(conductance: f64) -> Self {
        Self { vertex_count: 2, edges: vec![(0, 1, conductance)], source: 0, sink: 1, resistance: 1.0 / conductance }
    }

    /// Append `other` with its terminals glued onto `(s, t)`.
    fn absorb(&mut self, other: &SeriesParallel, s: usize, t: usize) {
        let base = self.vertex_count;
        let mut map = vec![usize::MAX; other.vertex_count];
        map[other.source] = s;
        map[other.sink] = t;
        let mut next = base;
        for slot in map.iter_mut() {
            if *slot == usize::MAX {
                *slot = next;
                next += 1;
            }
        }
        self.vertex_count = next;
        self.edges.extend(other.edges.iter().map(|&(u, v, w)| (map[u], map[v], w)));
    }

    pub fn series(mut self, other: &SeriesParallel) -> Self {
        let mid = self.sink;
        let end = self.vertex_count;
        self.vertex_count += 1;
        self.absorb(other, mid, end);
        self.sink = end;
        self.resistance += other.resistance;
        self
    }

    pub fn parallel(mut self, other: &SeriesParallel) -> Self {
        let (s, t) = (self.source, self.sink);
        self.absorb(other, s, t);
        self.resistance = 1.0 / (1.0 / self.resistance + 1.0 / other.resistance);
        self
    }

    pub fn graph(&self) -> Result<WeightedGraph> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(u, v, w) in &self.edges {
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        WeightedGraph::from_edges(self.vertex_count, merged.into_iter().map(|((u, v), w)| (u, v, w)))
    }
}

/// Random series-parallel network with `leaves` edges and conductances
/// uniform on `[lo, hi]`.
pub fn random_series_parallel<R: Rng + ?Sized>(leaves: usize, lo: f64, hi: f64, rng: &mut R) -> SeriesParallel {
    if leaves <= 1 {
        return SeriesParallel::edge(rng.random_range(lo..=hi));
    }
    let left = rng.random_range(1..leaves);
    let a = random_series_parallel(left, lo, hi, rng);
    let b = random_series_parallel(leaves - left, lo, hi, rng);
    if rng.random_bool(0.5) {
        a.series(&b)
    } else {
        a.parallel(&b)
    }
}

/// Connected graph on `n` vertices: a random recursive tree plus each other
/// pair independently with probability `extra`. Conductances uniform on
/// `[lo, hi]`.
pub fn random_connected_graph<R: Rng + ?Sized>(n: usize, extra: f64, lo: f64, hi: f64, rng: &mut R) -> Result<WeightedGraph> {
    if n < 2 {
        return Ok(WeightedGraph::single_vertex());
    }
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let p = rng.random_range(0..v);
        parent[v] = p;
        edges.push((p, v, rng.random_range(lo..=hi)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if parent[v] != u && rng.random_bool(extra) {
                edges.push((u, v, rng.random_range(lo..=hi)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{cycle, path};
    use crate::resistance::resistance_matrix;
    use crate::rng;

    #[test]
    fn brute_force_on_path() {
        let m = resistance_matrix(&path(5).unwrap()).unwrap();
        // balls of radius 1 are 3 consecutive vertices (2 at the ends)
        assert_eq!(brute_force_packing(&m, 1.0).unwrap(), 2);
        assert_eq!(brute_force_covering(&m, 1.0).unwrap(), 2);
        assert_eq!(brute_force_packing(&m, 0.0).unwrap(), 5);
        assert_eq!(brute_force_covering(&m, 4.0).unwrap(), 1);
    }

    #[test]
    fn brute_force_on_cycle() {
        let m = resistance_matrix(&cycle(6).unwrap()).unwrap();
        // adjacent resistance is 5/6, up to rounding
        let r = m.get(0, 1);
        assert!((r - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(brute_force_covering(&m, r).unwrap(), 2);
        assert_eq!(brute_force_packing(&m, r).unwrap(), 2);
    }

    #[test]
    fn series_parallel_laws() {
        let two = SeriesParallel::edge(1.0).series(&SeriesParallel::edge(1.0));
        assert_eq!(two.resistance, 2.0);
        let diamond = two.clone().parallel(&two);
        assert_eq!(diamond.resistance, 1.0);
        assert_eq!(diamond.vertex_count, 4);
        let doubled = SeriesParallel::edge(2.0).parallel(&SeriesParallel::edge(2.0));
        let g = doubled.graph().unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(4.0));
    }

    #[test]
    fn random_networks_are_valid() {
        let mut r = rng::stream(3, &[]);
        for leaves in 1..20 {
            let sp = random_series_parallel(leaves, 0.5, 2.0, &mut r);
            let g = sp.graph().unwrap();
            let m = resistance_matrix(&g).unwrap();
            assert!((m.get(sp.source, sp.sink) - sp.resistance).abs() < 1e-9 * sp.resistance.max(1.0));
        }
        let g = random_connected_graph(12, 0.2, 0.1, 10.0, &mut r).unwrap();
        assert_eq!(g.vertex_count(), 12);
    }
}
