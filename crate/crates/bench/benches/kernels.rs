use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctlab_bench::{fixture, fixtures};
use ctlab_core::chain;
use ctlab_core::ensembles;
use ctlab_core::geometry::{self, NetMode};
use ctlab_core::gff::{self, GffModel};
use ctlab_core::resistance::{self, GreenKernel};
use ctlab_core::walk::{self, StartPolicy};

fn resistance_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("resistance");
    group.sample_size(10);
    for (name, g) in fixtures() {
        if g.vertex_count() <= 600 {
            group.bench_with_input(BenchmarkId::new("dense", name), &g, |b, g| {
                b.iter(|| resistance::resistance_matrix(black_box(g)).unwrap())
            });
        }
    }
    group.finish();
}

fn hitting(c: &mut Criterion) {
    let mut group = c.benchmark_group("hitting");
    group.sample_size(10);
    let gasket = fixture("gasket_4");
    group.bench_function("dense/gasket_4", |b| b.iter(|| chain::hitting_times(black_box(&gasket)).unwrap()));
    let range = fixture("rw_range_5d_2000");
    group.bench_function("sweep/rw_range_5d_2000", |b| {
        b.iter(|| chain::hitting_sweep(black_box(&range), &[0], 4, Default::default()).unwrap())
    });
    group.finish();
}

fn exact_cover(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_cover");
    group.sample_size(10);
    for (name, g) in [
        ("complete_12", ensembles::complete(12).unwrap()),
        ("barbell_8", ensembles::gen_barbell(8, 8).unwrap()),
        ("gasket_2", ensembles::gen_sierpinski(2, [1.0, 1.0], 0).unwrap()),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &g, |b, g| {
            b.iter(|| chain::exact_cover_time(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("cover_mc");
    group.sample_size(10);
    let g = fixture("cycle_200");
    group.bench_function("cycle_200/100_runs", |b| {
        b.iter(|| walk::estimate_cover_time(black_box(&g), &StartPolicy::Fixed(0), 100, 7).unwrap())
    });
    group.finish();
}

fn nets(c: &mut Criterion) {
    let mut group = c.benchmark_group("nets");
    let m = resistance::resistance_matrix(&ensembles::gen_sierpinski(3, [1.0, 1.0], 0).unwrap()).unwrap();
    let r = m.diameter().0 / 4.0;
    group.bench_function("exact_covering/gasket_3", |b| {
        b.iter(|| geometry::covering_number(black_box(&m), r, NetMode::Exact).unwrap())
    });
    group.bench_function("greedy_packing/gasket_3", |b| {
        b.iter(|| geometry::packing_number(black_box(&m), r, NetMode::Greedy).unwrap())
    });
    group.finish();
}

fn field(c: &mut Criterion) {
    let mut group = c.benchmark_group("gff");
    group.sample_size(10);
    let m = resistance::resistance_matrix(&fixture("gasket_4")).unwrap();
    let model = GffModel::new(GreenKernel::new(&m, 0).unwrap());
    group.bench_function("expected_max/gasket_4/1000", |b| {
        b.iter(|| gff::estimate_expected_max(black_box(&model), 1000, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, resistance_tables, hitting, exact_cover, monte_carlo, nets, field);
criterion_main!(benches);
