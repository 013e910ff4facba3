//! Sequential vs rayon paths of the per-column and per-sample loops.
//! Without the `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ibrom::eulerian::ProjectionSolver;
use ibrom::exec::Execution;
use ibrom::harness::{ExperimentConfig, Setup};
use ibrom::interp::{interp_m0_k1, sample_kernel_tables};
use ibrom::lagrangian::SpreadOperator;
use ibrom::rom::direct_products;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn setup(h: f64) -> (Setup, ProjectionSolver) {
    let s = Setup::new(&ExperimentConfig::membrane(h)).unwrap();
    let solver = ProjectionSolver::factorize(&s.grid).unwrap();
    (s, solver)
}

fn direct_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct_assembly");
    group.sample_size(10);
    for h in [1.0 / 8.0, 1.0 / 16.0] {
        let (s, solver) = setup(h);
        let b = SpreadOperator::assemble(&s.grid, &s.x0, s.radius).unwrap();
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, 1.0 / h), &exec, |bench, &exec| {
                bench.iter(|| black_box(direct_products(&solver, &b, &b, exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn table_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("table_sampling");
    group.sample_size(10);
    let (s, solver) = setup(1.0 / 8.0);
    for (name, exec) in POLICIES {
        group.bench_function(name, |bench| {
            bench.iter(|| black_box(sample_kernel_tables(&solver, s.radius, 1.0, 0.25 * s.grid.h(), exec).unwrap()))
        });
    }
    group.finish();
}

fn interp_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("interp_assembly");
    let (s, solver) = setup(1.0 / 8.0);
    let table = sample_kernel_tables(&solver, s.radius, 1.0, 0.25 * s.grid.h(), Execution::default()).unwrap();
    for (name, exec) in POLICIES {
        group.bench_function(name, |bench| {
            bench.iter(|| black_box(interp_m0_k1(&table, s.x0.positions(), exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, direct_assembly, table_sampling, interp_assembly);
criterion_main!(benches);
