use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ridgepca::{
    empirical_risk, lambda_sweep, Method, NoiseModel, PreparedDesign, RotatedProblem,
};
use ridgepca_bench::{instance, log_grid, response};

const SIZES: [usize; 3] = [5, 20, 50];

fn eigendecompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigendecompose");
    for p in SIZES {
        let sigma = instance(p).second_moment();
        group.bench_with_input(BenchmarkId::from_parameter(p), &sigma, |b, s| {
            b.iter(|| black_box(s).eigendecompose().unwrap())
        });
    }
    group.finish();
}

fn fits(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    for p in SIZES {
        let inst = instance(p);
        let y = response(&inst);
        let design = PreparedDesign::new(inst).unwrap();
        group.bench_with_input(BenchmarkId::new("ridge", p), &p, |b, _| {
            b.iter(|| design.ridge(black_box(&y), 0.1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pca_ols", p), &p, |b, _| {
            b.iter(|| design.pca_ols(black_box(&y), 0.1).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_sweep");
    let grid = log_grid(200);
    for p in SIZES {
        let problem = RotatedProblem::from_instance(&instance(p)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &problem, |b, prob| {
            b.iter(|| lambda_sweep(black_box(prob), &grid).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("empirical_risk_1000_trials");
    group.sample_size(20);
    for p in [5, 20] {
        let inst = instance(p);
        let noise = NoiseModel::gaussian(inst.noise_variance()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &inst, |b, inst| {
            b.iter(|| empirical_risk(inst, Method::Ridge, 0.1, &noise, 1000, 7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, eigendecompose, fits, sweep, monte_carlo);
criterion_main!(benches);
