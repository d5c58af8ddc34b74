//! Fixed inputs shared by the benchmarks.

use ctlab_core::ensembles::{self, OffspringSpec};
use ctlab_core::WeightedGraph;

/// Deterministic benchmark graphs, named.
pub fn fixtures() -> Vec<(&'static str, WeightedGraph)> {
    vec![
        ("cycle_200", ensembles::cycle(200).unwrap()),
        ("gasket_4", ensembles::gen_sierpinski(4, [1.0, 1.0], 0).unwrap()),
        ("rw_range_5d_2000", ensembles::gen_rw_range(5, 2000, 1).unwrap()),
        (
            "gw_poisson2_8",
            ensembles::gen_supercritical_gw(&OffspringSpec::Poisson { mean: 2.0 }, 8, 1).unwrap(),
        ),
    ]
}

pub fn fixture(name: &str) -> WeightedGraph {
    fixtures().into_iter().find(|(n, _)| *n == name).map(|(_, g)| g).expect("known fixture")
}
