//! Galton–Watson family trees: supercritical trees conditioned to reach a
//! level, and Kesten's tree conditioned to survive (size-biased spine).

use std::collections::VecDeque;

use rand::Rng;

use super::offspring::{OffspringLaw, OffspringSpec};
use crate::error::{Error, Result};
use crate::graph::{build_graph, WeightedGraph};
use crate::rng;

pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

/// Grow a truncated family tree below `root` (at depth `root_depth`) and
/// append its edges. Returns the next free vertex id.
fn grow_subtree<R: Rng + ?Sized>(
    law: &OffspringLaw,
    root: usize,
    root_depth: u32,
    max_depth: u32,
    mut next_id: usize,
    edges: &mut Vec<(usize, usize, f64)>,
    rng: &mut R,
) -> usize {
    let mut queue = VecDeque::from([(root, root_depth)]);
    while let Some((parent, depth)) = queue.pop_front() {
        if depth >= max_depth {
            continue;
        }
        for _ in 0..law.sample(rng) {
            let child = next_id;
            next_id += 1;
            edges.push((parent, child, 1.0));
            queue.push_back((child, depth + 1));
        }
    }
    next_id
}

/// First `levels` generations of a supercritical Galton–Watson tree,
/// resampled until generation `levels` is nonempty. Vertex 0 is the root and
/// ids are assigned breadth first.
pub fn gen_supercritical_gw(spec: &OffspringSpec, levels: u32, seed: u64) -> Result<WeightedGraph> {
    gen_supercritical_gw_with_cap(spec, levels, seed, DEFAULT_REJECTION_CAP)
}

pub fn gen_supercritical_gw_with_cap(
    spec: &OffspringSpec,
    levels: u32,
    seed: u64,
    rejection_cap: u64,
) -> Result<WeightedGraph> {
    let law = spec.law()?;
    if !(law.mean() > 1.0) {
        return Err(Error::InvalidParameters(format!(
            "supercritical tree needs offspring mean > 1, got {}",
            law.mean()
        )));
    }
    if levels == 0 {
        return Err(Error::InvalidParameters("tree needs at least one level".into()));
    }
    let mut rng = rng::stream(seed, &[]);
    for _ in 0..rejection_cap {
        let mut edges = Vec::new();
        let mut generation = vec![0usize];
        let mut next_id = 1;
        for _ in 0..levels {
            let mut children = Vec::new();
            for &parent in &generation {
                for _ in 0..law.sample(&mut rng) {
                    edges.push((parent, next_id, 1.0));
                    children.push(next_id);
                    next_id += 1;
                }
            }
            generation = children;
            if generation.is_empty() {
                break;
            }
        }
        if !generation.is_empty() {
            return build_graph(edges);
        }
    }
    Err(Error::RejectionBudgetExceeded { attempts: rejection_cap })
}

/// Kesten's tree truncated at depth `levels`, together with its spine.
#[derive(Debug, Clone)]
pub struct SpinedTree {
    pub graph: WeightedGraph,
    /// `spine[k]` is the spine vertex at depth `k`; `spine[0] = 0`.
    pub spine: Vec<usize>,
}

/// First `levels` generations of the incipient infinite cluster of a
/// critical Galton–Watson tree. Spine vertices draw size-biased offspring;
/// one child continues the spine and the others root ordinary critical trees
/// cut at total depth `levels`.
pub fn gen_kesten_iic(spec: &OffspringSpec, levels: u32, seed: u64) -> Result<WeightedGraph> {
    Ok(gen_kesten_iic_with_spine(spec, levels, seed)?.graph)
}

pub fn gen_kesten_iic_with_spine(spec: &OffspringSpec, levels: u32, seed: u64) -> Result<SpinedTree> {
    let law = spec.law()?;
    law.require_critical()?;
    if levels == 0 {
        return Err(Error::InvalidParameters("tree needs at least one level".into()));
    }
    let mut rng = rng::stream(seed, &[]);
    let spine: Vec<usize> = (0..=levels as usize).collect();
    let mut next_id = spine.len();
    let mut edges = Vec::new();
    for depth in 0..levels {
        let here = spine[depth as usize];
        edges.push((here, spine[depth as usize + 1], 1.0));
        // the children are exchangeable, so which one carries the spine does
        // not change the unlabeled tree
        let siblings = law.sample_size_biased(&mut rng) - 1;
        for _ in 0..siblings {
            let child = next_id;
            next_id += 1;
            edges.push((here, child, 1.0));
            next_id = grow_subtree(&law, child, depth + 1, levels, next_id, &mut edges, &mut rng);
        }
    }
    Ok(SpinedTree { graph: build_graph(edges)?, spine })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depth_from_root(g: &WeightedGraph) -> usize {
        *g.bfs_distances(0).unwrap().iter().max().unwrap()
    }

    #[test]
    fn deterministic_binary_tree() {
        let spec = OffspringSpec::Explicit { probabilities: vec![0.0, 0.0, 1.0] };
        let g = gen_supercritical_gw(&spec, 3, 1).unwrap();
        assert_eq!(g.vertex_count(), 15);
        assert!(g.is_tree());
    }

    #[test]
    fn supercritical_tree_reaches_its_last_level() {
        let spec = OffspringSpec::Poisson { mean: 2.0 };
        for seed in 0..20 {
            let g = gen_supercritical_gw(&spec, 6, 42 + seed).unwrap();
            assert_eq!(depth_from_root(&g), 6);
            assert!(g.is_tree());
        }
        let a = gen_supercritical_gw(&spec, 6, 42).unwrap();
        assert_eq!(a, gen_supercritical_gw(&spec, 6, 42).unwrap());
    }

    #[test]
    fn subcritical_law_is_rejected() {
        let spec = OffspringSpec::Explicit { probabilities: vec![1.0] };
        assert!(matches!(gen_supercritical_gw(&spec, 3, 0), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn rejection_cap_is_enforced() {
        // mean 2, but the root dies out with probability 0.999
        let mut probabilities = vec![0.0; 2001];
        probabilities[0] = 0.999;
        probabilities[2000] = 0.001;
        let spec = OffspringSpec::Explicit { probabilities };
        assert!(spec.law().unwrap().mean() > 1.0);
        assert!(matches!(
            gen_supercritical_gw_with_cap(&spec, 3, 5, 10),
            Err(Error::RejectionBudgetExceeded { attempts: 10 })
        ));
    }

    #[test]
    fn degenerate_critical_law_gives_bare_spine() {
        let spec = OffspringSpec::Explicit { probabilities: vec![0.0, 1.0] };
        let t = gen_kesten_iic_with_spine(&spec, 5, 3).unwrap();
        assert_eq!(t.graph.vertex_count(), 6);
        assert_eq!(t.graph.edge_count(), 5);
        assert_eq!(t.graph.graph_distance(0, 5).unwrap(), 5);
    }

    #[test]
    fn iic_has_exact_depth_and_spine_path() {
        let spec = OffspringSpec::Poisson { mean: 1.0 };
        for seed in 7..27 {
            let t = gen_kesten_iic_with_spine(&spec, 8, seed).unwrap();
            assert_eq!(depth_from_root(&t.graph), 8);
            for w in t.spine.windows(2) {
                assert!(t.graph.weight(w[0], w[1]).is_some());
            }
            assert_eq!(t.graph.graph_distance(0, t.spine[8]).unwrap(), 8);
        }
    }

    #[test]
    fn iic_rejects_noncritical_law() {
        let spec = OffspringSpec::Poisson { mean: 1.5 };
        assert!(matches!(gen_kesten_iic(&spec, 3, 0), Err(Error::NotCritical { .. })));
    }

    #[test]
    fn spine_root_offspring_is_size_biased() {
        // N = 1: the root's child count is size-biased geometric(1/2),
        // P(k) = k 2^{-(k+1)}; compare with a chi-square statistic.
        let spec = OffspringSpec::Geometric { p: 0.5 };
        let samples = 10_000;
        let bins = 8; // k = 1..7 and a tail bin k >= 8
        let mut observed = vec![0f64; bins];
        for seed in 0..samples {
            let g = gen_kesten_iic(&spec, 1, seed).unwrap();
            let k = g.vertex_count() - 1;
            observed[(k - 1).min(bins - 1)] += 1.0;
        }
        let pmf = |k: usize| k as f64 * 0.5f64.powi(k as i32 + 1);
        let mut expected: Vec<f64> = (1..bins).map(|k| pmf(k) * samples as f64).collect();
        expected.push(samples as f64 - expected.iter().sum::<f64>());
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e) * (o - e) / e)
            .sum();
        // 7 degrees of freedom; the 0.999 quantile is 24.32
        assert!(chi2 < 24.32, "chi-square {chi2}");
    }
}
