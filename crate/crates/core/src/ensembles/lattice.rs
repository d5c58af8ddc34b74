//! Random graphs with cluster extraction: Erdős–Rényi, bond percolation on a
//! box, and the trace of a simple random walk.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use super::dsu::{induced_edges, DisjointSet};
use crate::error::{Error, Result};
use crate::graph::{build_graph, WeightedGraph};
use crate::rng;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("edge probability must lie in (0, 1], got {p}")))
    }
}

fn largest_cluster(n: usize, edges: &[(usize, usize)]) -> Result<WeightedGraph> {
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut dsu = DisjointSet::new(n);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    let members = dsu.largest_set();
    build_graph(induced_edges(n, &members, edges))
}

/// Largest connected component of `G(n, p)`, relabeled in ascending order of
/// original ids. Pairs are sampled by geometric skipping, so the cost is
/// proportional to the number of retained edges.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("need at least 2 vertices, got {n}")));
    }
    check_probability(p)?;
    let mut edges = Vec::new();
    if p >= 1.0 {
        for v in 1..n {
            for w in 0..v {
                edges.push((w, v));
            }
        }
    } else {
        let mut rng = rng::stream(seed, &[]);
        let log_q = (-p).ln_1p();
        let (mut v, mut w): (usize, i64) = (1, -1);
        while v < n {
            let r: f64 = rng.random();
            let skip = ((1.0 - r).ln() / log_q).floor();
            if !skip.is_finite() || skip > 1e18 {
                break;
            }
            w += 1 + skip as i64;
            while w >= v as i64 && v < n {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                edges.push((w as usize, v));
            }
        }
    }
    largest_cluster(n, &edges)
}

/// Largest open cluster of bond percolation with parameter `p` on the box
/// `[−half_width, half_width]^d`.
pub fn gen_percolation_box(d: usize, half_width: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if d < 2 || half_width < 1 {
        return Err(Error::InvalidParameters(format!(
            "percolation box needs d ≥ 2 and N ≥ 1, got d={d}, N={half_width}"
        )));
    }
    check_probability(p)?;
    let side = 2 * half_width + 1;
    let sites = side
        .checked_pow(d as u32)
        .filter(|&s| s <= 50_000_000)
        .ok_or_else(|| Error::BudgetExceeded(format!("box with side {side} in d={d} is too large")))?;
    let mut rng = rng::stream(seed, &[]);
    let mut edges = Vec::new();
    let mut stride = 1;
    let strides: Vec<usize> = (0..d)
        .map(|_| {
            let s = stride;
            stride *= side;
            s
        })
        .collect();
    for site in 0..sites {
        for &s in &strides {
            // coordinate along this axis
            if (site / s) % side + 1 < side {
                let open = p >= 1.0 || rng.random::<f64>() < p;
                if open {
                    edges.push((site, site + s));
                }
            }
        }
    }
    largest_cluster(sites, &edges)
}

/// Trace of a simple random walk of `steps` steps in `Z^d`: visited points
/// become vertices (in order of first visit, origin = 0) and traversed steps
/// become deduplicated unit edges.
pub fn gen_rw_range(d: usize, steps: usize, seed: u64) -> Result<WeightedGraph> {
    if d < 5 || steps < 1 {
        return Err(Error::InvalidParameters(format!(
            "walk range needs d ≥ 5 and N ≥ 1, got d={d}, N={steps}"
        )));
    }
    let mut rng = rng::stream(seed, &[]);
    let mut position = vec![0i32; d];
    let mut ids: HashMap<Vec<i32>, usize> = HashMap::new();
    ids.insert(position.clone(), 0);
    let mut current = 0usize;
    let mut seen_edges = HashSet::new();
    let mut edges = Vec::new();
    for _ in 0..steps {
        let direction = rng.random_range(0..(2 * d) as u32) as usize;
        position[direction / 2] += if direction.is_multiple_of(2) { 1 } else { -1 };
        let fresh = ids.len();
        let next = *ids.entry(position.clone()).or_insert(fresh);
        let key = (current.min(next), current.max(next));
        if seen_edges.insert(key) {
            edges.push((key.0, key.1, 1.0));
        }
        current = next;
    }
    build_graph(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_with_p_one_is_complete() {
        let g = gen_er(3, 1.0, 0).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn er_with_no_edges_is_empty() {
        assert!(matches!(gen_er(2, 1e-15, 3), Err(Error::EmptyGraph)));
        assert!(matches!(gen_er(1, 0.5, 3), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn supercritical_er_has_giant_component() {
        for seed in 0..20 {
            let g = gen_er(1000, 2.0 / 1000.0, 1 + seed).unwrap();
            assert!(g.vertex_count() >= 100, "seed {seed}: {}", g.vertex_count());
        }
    }

    #[test]
    fn er_edge_density_matches_p() {
        // dense regime: the whole graph is one component, so edges ~ p n(n-1)/2
        let g = gen_er(400, 0.1, 9).unwrap();
        let expected: f64 = 0.1 * 400.0 * 399.0 / 2.0;
        let sd = (expected * 0.9).sqrt();
        assert!((g.edge_count() as f64 - expected).abs() < 5.0 * sd);
    }

    #[test]
    fn full_percolation_box_is_grid() {
        let g = gen_percolation_box(2, 1, 1.0, 0).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 12);
    }

    #[test]
    fn supercritical_percolation_cluster_is_large() {
        for seed in 0..20 {
            let g = gen_percolation_box(2, 20, 0.7, 3 + seed).unwrap();
            assert!(g.vertex_count() as f64 >= 0.3 * 41.0 * 41.0);
        }
    }

    #[test]
    fn closed_percolation_box_is_empty() {
        assert!(matches!(gen_percolation_box(2, 3, 1e-300, 0), Err(Error::EmptyGraph)));
    }

    #[test]
    fn walk_range_bounds() {
        let g = gen_rw_range(5, 1, 0).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        let g = gen_rw_range(5, 10_000, 11).unwrap();
        assert!(g.vertex_count() <= 10_001);
    }

    #[test]
    fn walk_range_is_linear_in_d5() {
        let mean: f64 = (0..20)
            .map(|seed| gen_rw_range(5, 10_000, seed).unwrap().vertex_count() as f64 / 10_000.0)
            .sum::<f64>()
            / 20.0;
        assert!((0.5..=1.0).contains(&mean), "mean range fraction {mean}");
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_er(200, 0.01, 5).unwrap(), gen_er(200, 0.01, 5).unwrap());
        assert_eq!(
            gen_percolation_box(3, 3, 0.4, 5).unwrap(),
            gen_percolation_box(3, 3, 0.4, 5).unwrap()
        );
        assert_eq!(gen_rw_range(6, 500, 5).unwrap(), gen_rw_range(6, 500, 5).unwrap());
    }
}
