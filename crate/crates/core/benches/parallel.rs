//! Sequential against data-parallel execution on the crate's parallel
//! loops: seminorm pair sampling, comparison windows and gradient checks.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isodensity::analysis::comparison_windows;
use isodensity::density::{estimate_seminorm, DensityField, DensitySpec, WorkingBox};
use isodensity::grid::Grid;
use isodensity::integrand::SurfaceIntegrand;
use isodensity::solver::{solve_constrained, ProblemSpec, SolverConfig};
use isodensity::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn seminorm(c: &mut Criterion) {
    let bx = WorkingBox::centered(2, 1.0, 10.0).unwrap();
    let f = DensityField::from_spec(&DensitySpec::Example1H { alpha: 0.5 }, &bx).unwrap();
    let mut group = c.benchmark_group("estimate_seminorm");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 200_000), &exec, |b, &exec| {
            b.iter(|| estimate_seminorm(black_box(&f), &bx, 200_000, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn windows(c: &mut Criterion) {
    let bx = WorkingBox::centered(1, 1.0, 10.0).unwrap();
    let h = DensityField::from_spec(&DensitySpec::Example1H { alpha: 0.5 }, &bx).unwrap();
    let one = DensityField::constant(1.0);
    let grid = Arc::new(Grid::interval_between(0.0, 1.0, 4097).unwrap());
    let spec = ProblemSpec::weighted(grid, one.clone(), h, 0.1, |_| 0.0).unwrap();
    let cfg = SolverConfig::default();
    let u = solve_constrained(&spec, &cfg).unwrap();
    let ak = SurfaceIntegrand::new(1.25 * u.w.max_gradient()).unwrap();
    let radii = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125];
    let mut group = c.benchmark_group("comparison_windows");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, radii.len()), &exec, |b, &exec| {
            b.iter(|| comparison_windows(black_box(&u), &one, &ak, &[0.0], &radii, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, seminorm, windows);
criterion_main!(benches);
