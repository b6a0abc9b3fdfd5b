//! Sequential vs parallel execution on the two hot loops: the probe loop of
//! the Chebyshev recurrence and the per-charge loop of heat grids.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maglap::exact::{heat_grid_with, HeatGridOptions};
use maglap::format::linspace;
use maglap::generators::{cyclic_sbm, erdos_renyi_directed};
use maglap::kpm::{chebyshev_moments, kpm_heat_grid, rescale, KpmConfig, Rescaled};
use maglap::{Execution, MagneticOperator, OperatorKind};

const POLICIES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn moments(c: &mut Criterion) {
    let g = erdos_renyi_directed(20_000, 5e-4, 1).unwrap().largest_weakly_connected_component().unwrap().graph;
    let op = MagneticOperator::from_graph(&g, 0.2, OperatorKind::Normalized).unwrap();
    let Rescaled::Operator(h) = rescale(&op, 0.01) else { unreachable!() };
    let mut group = c.benchmark_group("chebyshev_moments");
    group.sample_size(10);
    for execution in POLICIES {
        let cfg = KpmConfig { execution, ..KpmConfig::new(100, 8).with_seed(3) };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{execution:?}")), &cfg, |b, cfg| {
            b.iter(|| black_box(chebyshev_moments(&h, cfg).unwrap()))
        });
    }
    group.finish();
}

fn heat_grids(c: &mut Criterion) {
    let g = cyclic_sbm(3, 100, 0.25, 0.5, 2).unwrap();
    let qs = linspace(0.0, 0.5, 8);
    let ts = linspace(0.01, 0.15, 30);
    let mut group = c.benchmark_group("heat_grid");
    group.sample_size(10);
    for execution in POLICIES {
        let opts = HeatGridOptions { execution, ..HeatGridOptions::default() };
        group.bench_function(BenchmarkId::new("exact", format!("{execution:?}")), |b| {
            b.iter(|| black_box(heat_grid_with(&g, &qs, &ts, &opts).unwrap()))
        });
        let cfg = KpmConfig { execution, ..KpmConfig::heat_defaults().with_seed(5) };
        group.bench_function(BenchmarkId::new("kpm", format!("{execution:?}")), |b| {
            b.iter(|| black_box(kpm_heat_grid(&g, &qs, &ts, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, moments, heat_grids);
criterion_main!(benches);
