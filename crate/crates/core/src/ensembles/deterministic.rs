//! Deterministic families (Sierpinski gasket, barbell, and the small
//! catalog graphs used as exact oracles).

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{build_graph, WeightedGraph};
use crate::rng;

/// Level-`level` Sierpinski gasket graph with i.i.d. uniform weights on
/// `[low, high]`. Vertices 0, 1, 2 are the three extreme corners.
pub fn gen_sierpinski(level: u32, weight_bounds: [f64; 2], seed: u64) -> Result<WeightedGraph> {
    let [low, high] = weight_bounds;
    if !(low > 0.0 && low <= high && high.is_finite()) {
        return Err(Error::InvalidParameters(format!("weight bounds must satisfy 0 < c1 ≤ c2, got [{low}, {high}]")));
    }
    if level > 12 {
        return Err(Error::BudgetExceeded(format!("gasket level {level} is too large")));
    }
    // integer coordinates on a triangular lattice with side 2^level
    type Point = (i64, i64);
    let side = 1i64 << level;
    let corners: [Point; 3] = [(0, 0), (side, 0), (0, side)];
    let mut ids: HashMap<Point, usize> = HashMap::new();
    for c in corners {
        let next = ids.len();
        ids.insert(c, next);
    }
    let mut edges = Vec::new();
    let mut stack = vec![(corners, side)];
    let id_of = |p: Point, ids: &mut HashMap<Point, usize>| {
        let next = ids.len();
        *ids.entry(p).or_insert(next)
    };
    while let Some(([a, b, c], s)) = stack.pop() {
        if s == 1 {
            let (ia, ib, ic) = (id_of(a, &mut ids), id_of(b, &mut ids), id_of(c, &mut ids));
            edges.push((ia, ib));
            edges.push((ib, ic));
            edges.push((ic, ia));
            continue;
        }
        let mid = |p: Point, q: Point| ((p.0 + q.0) / 2, (p.1 + q.1) / 2);
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        // pushed in reverse so that sub-triangles are processed in corner order
        stack.push(([ca, bc, c], s / 2));
        stack.push(([ab, b, bc], s / 2));
        stack.push(([a, ab, ca], s / 2));
    }
    let mut rng = rng::stream(seed, &[]);
    let weighted = edges.into_iter().map(|(u, v)| {
        let w = if low == high { low } else { rng.random_range(low..=high) };
        (u, v, w)
    });
    let collected: Vec<_> = weighted.collect();
    build_graph(collected)
}

/// Complete graph `K_n` with `pendants` leaves hung on distinct vertices
/// `0..pendants`. Unit weights.
pub fn gen_barbell(n: usize, pendants: usize) -> Result<WeightedGraph> {
    if !(2 <= pendants && pendants <= n) {
        return Err(Error::InvalidParameters(format!("barbell needs 2 ≤ a_N ≤ N, got N={n}, a_N={pendants}")));
    }
    let mut edges = complete_edges(n);
    edges.extend((0..pendants).map(|i| (i, n + i, 1.0)));
    build_graph(edges)
}

fn complete_edges(n: usize) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v, 1.0));
        }
    }
    edges
}

pub fn complete(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("complete graph needs n ≥ 2, got {n}")));
    }
    build_graph(complete_edges(n))
}

pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("cycle needs n ≥ 3, got {n}")));
    }
    build_graph((0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

/// Path on `n` vertices.
pub fn path(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("path needs n ≥ 2, got {n}")));
    }
    build_graph((0..n - 1).map(|i| (i, i + 1, 1.0)))
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Result<WeightedGraph> {
    if leaves < 1 {
        return Err(Error::InvalidParameters("star needs at least one leaf".into()));
    }
    build_graph((1..=leaves).map(|i| (0, i, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gasket_counts() {
        let g0 = gen_sierpinski(0, [1.0, 1.0], 0).unwrap();
        assert_eq!((g0.vertex_count(), g0.edge_count()), (3, 3));
        let g1 = gen_sierpinski(1, [1.0, 1.0], 0).unwrap();
        assert_eq!((g1.vertex_count(), g1.edge_count()), (6, 9));
        for level in 0..7u32 {
            let g = gen_sierpinski(level, [1.0, 1.0], 0).unwrap();
            assert_eq!(g.vertex_count(), (3usize.pow(level + 1) + 3) / 2);
            assert_eq!(g.edge_count(), 3usize.pow(level + 1));
        }
    }

    #[test]
    fn gasket_corners_have_degree_two() {
        let g = gen_sierpinski(3, [1.0, 1.0], 0).unwrap();
        for c in 0..3 {
            assert_eq!(g.degree(c), 2);
        }
        assert!((3..g.vertex_count()).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn gasket_weights_stay_in_bounds() {
        let g = gen_sierpinski(3, [0.5, 2.0], 17).unwrap();
        assert!(g.edges().iter().all(|e| (0.5..=2.0).contains(&e.weight)));
        assert_eq!(g, gen_sierpinski(3, [0.5, 2.0], 17).unwrap());
    }

    #[test]
    fn barbell_shape() {
        let g = gen_barbell(4, 2).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (6, 8));
        assert!(matches!(gen_barbell(3, 4), Err(Error::InvalidParameters(_))));
        assert!(matches!(gen_barbell(3, 1), Err(Error::InvalidParameters(_))));
    }
}
