use ctlab_core::chain;
use ctlab_core::analysis::Certainty;
use ctlab_core::classify::{self, SampleRecord};
use ctlab_core::ensembles::{Family, OffspringSpec};
use ctlab_core::geometry::{self, NetMode};
use ctlab_core::oracle;
use ctlab_core::resistance::{self, GreenKernel};
use ctlab_core::rng;
use ctlab_core::walk::{self, StartPolicy};
use ctlab_core::WeightedGraph;
use proptest::prelude::*;
use rand::Rng;

fn graph(seed: u64, n: usize, extra: f64) -> WeightedGraph {
    oracle::random_connected_graph(n, extra, 0.1, 10.0, &mut rng::stream(seed, &[])).unwrap()
}

fn graphs(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (any::<u64>(), 2..=max_n, 0.0..0.6f64).prop_map(|(s, n, p)| graph(s, n, p))
}

const REL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn volume_is_twice_total_weight(g in graphs(20)) {
        let total: f64 = g.edges().iter().map(|e| e.weight).sum();
        prop_assert!((g.volume() - 2.0 * total).abs() <= 1e-12 * g.volume());
        let weights: f64 = g.vertex_weights().iter().sum();
        prop_assert!((g.volume() - weights).abs() <= 1e-12 * g.volume());
    }

    #[test]
    fn edge_list_round_trips(g in graphs(20)) {
        prop_assert_eq!(WeightedGraph::from_wgr(&g.to_wgr()).unwrap(), g);
    }

    #[test]
    fn resistance_is_a_metric(g in graphs(14)) {
        let m = resistance::resistance_matrix(&g).unwrap();
        let n = g.vertex_count();
        for x in 0..n {
            prop_assert_eq!(m.get(x, x), 0.0);
            for y in 0..n {
                prop_assert_eq!(m.get(x, y), m.get(y, x));
                if x != y {
                    prop_assert!(m.get(x, y) > 0.0);
                }
                for z in 0..n {
                    prop_assert!(m.get(x, z) <= (m.get(x, y) + m.get(y, z)) * (1.0 + REL));
                }
            }
        }
        // an edge is a path of resistance 1/w
        for e in g.edges() {
            prop_assert!(m.get(e.u, e.v) <= (1.0 / e.weight) * (1.0 + REL));
        }
    }

    #[test]
    fn commute_identity(g in graphs(20)) {
        let m = resistance::resistance_matrix(&g).unwrap();
        let h = chain::hitting_times(&g).unwrap();
        prop_assert!(h.commute_residual(&g, &m) <= 1e-8);
        // half the commute time of the diameter pair bounds t_hit from below,
        // the full commute time from above
        let (d, _) = m.diameter();
        prop_assert!(h.t_hit() >= 0.5 * g.volume() * d * (1.0 - REL));
        prop_assert!(h.t_hit() <= g.volume() * d * (1.0 + REL));
    }

    #[test]
    fn rayleigh_monotonicity(seed in any::<u64>(), n in 3usize..=14, factor in 1.01..5.0f64) {
        let g = graph(seed, n, 0.3);
        let pick = (seed % g.edge_count() as u64) as usize;
        let raised = WeightedGraph::from_edges(
            n,
            g.edges().iter().enumerate().map(|(i, e)| (e.u, e.v, if i == pick { e.weight * factor } else { e.weight })),
        ).unwrap();
        let before = resistance::resistance_matrix(&g).unwrap();
        let after = resistance::resistance_matrix(&raised).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert!(after.get(x, y) <= before.get(x, y) * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn nash_williams_never_exceeds_resistance(g in graphs(16), pick in any::<u64>()) {
        let n = g.vertex_count();
        let x = (pick % n as u64) as usize;
        let y = (x + 1 + (pick / 7 % (n as u64 - 1)) as usize) % n;
        let cuts = ctlab_core::catalog::layer_cutsets(&g, x, y).unwrap();
        let bound = resistance::nash_williams_bound(&g, x, y, &cuts).unwrap();
        let exact = resistance::resistance_matrix(&g).unwrap().get(x, y);
        prop_assert!(bound <= exact * (1.0 + REL));
    }

    #[test]
    fn series_parallel_closed_form(seed in any::<u64>(), leaves in 1usize..30) {
        let sp = oracle::random_series_parallel(leaves, 0.1, 10.0, &mut rng::stream(seed, &[]));
        let m = resistance::resistance_matrix(&sp.graph().unwrap()).unwrap();
        prop_assert!((m.get(sp.source, sp.sink) - sp.resistance).abs() <= REL * sp.resistance);
    }

    #[test]
    fn kernel_increments_equal_resistance(g in graphs(14), root in any::<usize>()) {
        let m = resistance::resistance_matrix(&g).unwrap();
        let n = g.vertex_count();
        let k = GreenKernel::new(&m, root % n).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert!((k.increment_variance(x, y) - m.get(x, y)).abs() <= 1e-9 * m.get(x, y).max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn exact_cover_sandwich(g in graphs(9)) {
        let n = g.vertex_count();
        let cover = chain::exact_cover_time(&g).unwrap();
        let h = chain::hitting_times(&g).unwrap();
        prop_assert!(chain::sandwich_check(cover.t_cov, h.t_hit(), n).passed);
        prop_assert!(cover.t_cov <= chain::matthews_upper(h.t_hit(), n) * (1.0 + REL));
        for x in 0..n {
            // covering from x includes hitting every y
            prop_assert!(cover.per_start[x] >= h.max_from(x) * (1.0 - REL));
        }
    }

    #[test]
    fn net_dualities(g in graphs(12), frac in 0.0..1.2f64) {
        let m = resistance::resistance_matrix(&g).unwrap();
        let r = m.diameter().0 * frac;
        let pac = geometry::packing_number(&m, r, NetMode::Exact).unwrap();
        let cov = geometry::covering_number(&m, r, NetMode::Exact).unwrap();
        let gpac = geometry::packing_number(&m, r, NetMode::Greedy).unwrap();
        let gcov = geometry::covering_number(&m, r, NetMode::Greedy).unwrap();
        for net in [&pac, &cov, &gpac, &gcov] {
            prop_assert!(net.is_valid_for(&m));
        }
        prop_assert!(gpac.count <= pac.count);
        prop_assert!(gcov.count >= cov.count);
        prop_assert!(pac.count <= cov.count);
        let cov2 = geometry::covering_number(&m, 2.0 * r, NetMode::Exact).unwrap();
        prop_assert!(cov2.count <= gpac.count);
        prop_assert_eq!(pac.count, oracle::brute_force_packing(&m, r).unwrap());
        prop_assert_eq!(cov.count, oracle::brute_force_covering(&m, r).unwrap());
    }

    #[test]
    fn covering_profile_and_chaining(g in graphs(12)) {
        let m = resistance::resistance_matrix(&g).unwrap();
        let scales = geometry::dyadic_scales(&m);
        let counts = geometry::covering_profile(&m, &scales, NetMode::Exact).unwrap();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*counts.last().unwrap(), g.vertex_count());
        let exact = geometry::chaining_functional(&m, &scales, NetMode::Exact).unwrap();
        let greedy = geometry::chaining_functional(&m, &scales, NetMode::Greedy).unwrap();
        // greedy coverings over-count, so their chaining sum is no smaller
        prop_assert!(exact <= greedy * (1.0 + REL));
    }

    #[test]
    fn walks_are_reproducible(g in graphs(10), seed in any::<u64>()) {
        let policy = StartPolicy::WorstOfSet(vec![0, g.vertex_count() - 1]);
        let a = walk::estimate_cover_time(&g, &policy, 20, seed).unwrap();
        let b = walk::estimate_cover_time(&g, &policy, 20, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tree_runs_cover_every_edge(seed in any::<u64>(), n in 2usize..30) {
        let g = graph(seed, n, 0.0);
        let mut r = rng::stream(seed, &[1]);
        let steps = walk::simulate_cover_once(&g, 0, &mut r).unwrap();
        let ecc = *g.bfs_distances(0).unwrap().iter().max().unwrap();
        prop_assert!(steps as usize >= 2 * g.edge_count() - ecc);
    }

    #[test]
    fn event_frequencies_are_monotone(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[]);
        let mut records = Vec::new();
        for size in [10usize, 20, 40] {
            for sample in 0..10 {
                let t_hit = r.random_range(1.0..100.0);
                let vertex_count = size;
                let ratio = r.random_range(1.0..(2.0 * (size as f64).ln()));
                records.push(SampleRecord {
                    size,
                    sample,
                    seed: 0,
                    vertex_count,
                    edge_count: size,
                    volume: 2.0 * size as f64,
                    diam_r: 1.0,
                    diam_certainty: Certainty::Exact,
                    t_hit,
                    t_hit_certainty: Certainty::Exact,
                    t_cov: ratio * t_hit,
                    t_cov_se: 0.0,
                    t_cov_certainty: Certainty::Exact,
                    chaining: None,
                    packing_counts: Vec::new(),
                    sandwich_passed: true,
                });
            }
        }
        let stats = classify::EnsembleStats {
            schema_version: classify::STATS_SCHEMA_VERSION,
            family: Family::Cycle,
            master_seed: seed,
            sizes: vec![10, 20, 40],
            samples: 10,
            records,
            failures: Vec::new(),
            partial: false,
        };
        let report = classify::classify_type(&stats, &[32.0, 2.0, 8.0], 0.9).unwrap();
        for f in &report.per_size {
            prop_assert!(f.type1.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.type2.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(f.type1.iter().chain(&f.type2).all(|p| (0.0..=1.0).contains(p)));
        }
    }
}

#[test]
fn ensemble_records_satisfy_the_sandwich() {
    let options = classify::EnsembleOptions {
        sizes: vec![3, 4, 5],
        samples: 4,
        budgets: Default::default(),
        geometry: true,
    };
    let family = Family::GwSupercritical { offspring: OffspringSpec::Poisson { mean: 2.0 } };
    let stats = classify::run_ensemble(&family, &options, 17).unwrap();
    assert_eq!(stats.sandwich_violations(), 0);
    for r in &stats.records {
        assert!(r.t_hit > 0.0 && r.t_cov > 0.0 && r.diam_r > 0.0 && r.volume > 0.0);
        assert!(r.chaining.unwrap() > 0.0);
        assert_eq!(r.packing_counts.len(), classify::PACKING_GRID_LEN);
    }
}

