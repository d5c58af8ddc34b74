//! Immutable weighted graphs.
//!
//! A [`WeightedGraph`] is a finite, connected, undirected graph with strictly
//! positive conductances. Vertices are dense ids `0..n`. Edges are stored
//! normalized (`u < v`) and sorted, and a CSR adjacency is built once at
//! construction.
//!
//! The volume follows the ordered-pair convention: every edge is counted
//! from both endpoints, so `volume = Σ_x μ_x = 2 Σ_e μ_e`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    neighbor_weights: Vec<f64>,
    vertex_weights: Vec<f64>,
}

/// Build a validated graph from an edge list; the vertex count is one more
/// than the largest id that appears.
pub fn build_graph<I>(edges: I) -> Result<WeightedGraph>
where
    I: IntoIterator<Item = (usize, usize, f64)>,
{
    let edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
    let n = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    WeightedGraph::from_edges(n, edges)
}

impl WeightedGraph {
    /// Build a graph on exactly `vertex_count` vertices.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut normalized = Vec::new();
        for (u, v, weight) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            for &x in &[u, v] {
                if x >= vertex_count {
                    return Err(Error::InvalidVertex { vertex: x, vertex_count });
                }
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight { u, v, weight });
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            normalized.push(Edge { u, v, weight });
        }
        if normalized.is_empty() {
            return Err(Error::EmptyEdgeList);
        }
        normalized.sort_by_key(|e| (e.u, e.v));
        for pair in normalized.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::DuplicateEdge { u: pair[0].u, v: pair[0].v });
            }
        }
        let graph = Self::assemble(vertex_count, normalized);
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok(graph)
    }

    /// The one-vertex graph. It has no edges and zero volume; most analyses
    /// treat it as a degenerate base case.
    pub fn single_vertex() -> Self {
        Self::assemble(1, Vec::new())
    }

    fn assemble(vertex_count: usize, edges: Vec<Edge>) -> Self {
        let mut degree = vec![0usize; vertex_count];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..vertex_count].to_vec();
        let mut neighbors = vec![0usize; offsets[vertex_count]];
        let mut neighbor_weights = vec![0.0; offsets[vertex_count]];
        // edges are sorted by (u, v), so every adjacency row comes out sorted
        for e in &edges {
            neighbors[cursor[e.u]] = e.v;
            neighbor_weights[cursor[e.u]] = e.weight;
            cursor[e.u] += 1;
        }
        for e in &edges {
            neighbors[cursor[e.v]] = e.u;
            neighbor_weights[cursor[e.v]] = e.weight;
            cursor[e.v] += 1;
        }
        for x in 0..vertex_count {
            let (lo, hi) = (offsets[x], offsets[x + 1]);
            let mut row: Vec<(usize, f64)> = neighbors[lo..hi]
                .iter()
                .copied()
                .zip(neighbor_weights[lo..hi].iter().copied())
                .collect();
            row.sort_by_key(|&(y, _)| y);
            for (i, (y, w)) in row.into_iter().enumerate() {
                neighbors[lo + i] = y;
                neighbor_weights[lo + i] = w;
            }
        }
        let vertex_weights = (0..vertex_count)
            .map(|x| neighbor_weights[offsets[x]..offsets[x + 1]].iter().sum())
            .collect();
        Self { vertex_count, edges, offsets, neighbors, neighbor_weights, vertex_weights }
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.vertex_count {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        components
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges with `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn neighbor_weights(&self, x: usize) -> &[f64] {
        &self.neighbor_weights[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// `μ_x`, the sum of incident edge weights.
    pub fn vertex_weight(&self, x: usize) -> f64 {
        self.vertex_weights[x]
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    /// Weight of edge `{x, y}`, if present.
    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        let row = self.neighbors(x);
        row.binary_search(&y).ok().map(|i| self.neighbor_weights(x)[i])
    }

    /// `Σ_{x,y} μ_xy` over ordered pairs, i.e. twice the total edge weight.
    pub fn volume(&self) -> f64 {
        2.0 * self.edges.iter().map(|e| e.weight).sum::<f64>()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count
    }

    pub fn has_unit_weights(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count {
            Ok(())
        } else {
            Err(Error::InvalidVertex { vertex: x, vertex_count: self.vertex_count })
        }
    }

    /// Hop distances from `source` to every vertex.
    pub fn bfs_distances(&self, source: usize) -> Result<Vec<usize>> {
        self.check_vertex(source)?;
        let mut dist = vec![usize::MAX; self.vertex_count];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            for &y in self.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// Unweighted shortest-path hop count between `x` and `y`.
    pub fn graph_distance(&self, x: usize, y: usize) -> Result<usize> {
        self.check_vertex(y)?;
        Ok(self.bfs_distances(x)?[y])
    }

    pub fn max_degree_vertex(&self) -> usize {
        (0..self.vertex_count)
            .max_by(|&a, &b| self.degree(a).cmp(&self.degree(b)).then(b.cmp(&a)))
            .unwrap_or(0)
    }

    /// Serialize to the `.wgr` edge-list text format.
    pub fn to_wgr(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
        out
    }

    /// Parse the `.wgr` format: header `n m`, then `m` lines `u v w`.
    pub fn from_wgr(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::MalformedFile { line: 1, reason: "missing header".into() })?;
        let mut fields = header.split_whitespace();
        let mut next_usize = |line: usize, what: &str| -> Result<usize> {
            fields
                .next()
                .ok_or_else(|| Error::MalformedFile { line, reason: format!("missing {what}") })?
                .parse()
                .map_err(|_| Error::MalformedFile { line, reason: format!("bad {what}") })
        };
        let n = next_usize(hl + 1, "vertex count")?;
        let m = next_usize(hl + 1, "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            let lineno = i + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::MalformedFile {
                    line: lineno,
                    reason: format!("expected 3 fields, found {}", parts.len()),
                });
            }
            let bad = |what: &str| Error::MalformedFile { line: lineno, reason: format!("bad {what}") };
            let u: usize = parts[0].parse().map_err(|_| bad("source id"))?;
            let v: usize = parts[1].parse().map_err(|_| bad("target id"))?;
            let w: f64 = parts[2].parse().map_err(|_| bad("weight"))?;
            edges.push((u, v, w));
        }
        if edges.len() != m {
            return Err(Error::MalformedFile {
                line: 1,
                reason: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        if n == 1 && m == 0 {
            return Ok(Self::single_vertex());
        }
        Self::from_edges(n, edges)
    }

    pub fn write_wgr(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(self.to_wgr().as_bytes())?;
        Ok(())
    }

    pub fn read_wgr(path: &Path) -> Result<Self> {
        Self::from_wgr(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> WeightedGraph {
        build_graph([(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn k3() -> WeightedGraph {
        build_graph([(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn builds_small_graphs() {
        assert_eq!(p3().vertex_count(), 3);
        assert_eq!(k3().edge_count(), 3);
        assert_eq!(p3().neighbors(1), &[0, 2]);
    }

    #[test]
    fn rejects_invalid_edge_lists() {
        assert!(matches!(
            build_graph([(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::DisconnectedGraph { components: 2 })
        ));
        assert!(matches!(build_graph([(0, 1, 0.0)]), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(build_graph([(1, 1, 1.0)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            build_graph([(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge { u: 0, v: 1 })
        ));
        assert!(matches!(build_graph(Vec::new()), Err(Error::EmptyEdgeList)));
    }

    #[test]
    fn volume_counts_ordered_pairs() {
        assert_eq!(p3().volume(), 4.0);
        assert_eq!(k3().volume(), 6.0);
        assert_eq!(build_graph([(0, 1, 2.5)]).unwrap().volume(), 5.0);
        let g = k3();
        assert_eq!(g.vertex_weights().iter().sum::<f64>(), g.volume());
    }

    #[test]
    fn hop_distances() {
        assert_eq!(p3().graph_distance(0, 2).unwrap(), 2);
        assert_eq!(p3().graph_distance(1, 1).unwrap(), 0);
        assert_eq!(k3().graph_distance(0, 1).unwrap(), 1);
        assert!(matches!(p3().graph_distance(0, 7), Err(Error::InvalidVertex { .. })));
    }

    #[test]
    fn wgr_text_format() {
        assert_eq!(p3().to_wgr(), "3 2\n0 1 1\n1 2 1\n");
        assert_eq!(WeightedGraph::from_wgr("3 2\n0 1 1\n1 2 1\n").unwrap(), p3());
        assert!(matches!(
            WeightedGraph::from_wgr("2 1\n0 1 0\n"),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_wgr("2 1\n0 1\n"),
            Err(Error::MalformedFile { line: 2, .. })
        ));
        assert!(matches!(
            WeightedGraph::from_wgr("3 3\n0 1 1\n1 2 1\n"),
            Err(Error::MalformedFile { .. })
        ));
    }

    #[test]
    fn wgr_file_round_trip_keeps_volume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k3.wgr");
        k3().write_wgr(&path).unwrap();
        let back = WeightedGraph::read_wgr(&path).unwrap();
        assert_eq!(back.volume(), 6.0);
        assert_eq!(back, k3());
    }

    #[test]
    fn edge_lookup() {
        let g = build_graph([(0, 1, 0.5), (1, 2, 3.0)]).unwrap();
        assert_eq!(g.weight(2, 1), Some(3.0));
        assert_eq!(g.weight(0, 2), None);
        assert_eq!(g.vertex_weight(1), 3.5);
    }
}
