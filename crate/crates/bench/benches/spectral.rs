use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use openevt_bench::{golden_mean, solve};
use openevt_core::ulam::perturbed_eigenvalue_curve;

fn ulam_solve(c: &mut Criterion) {
    let sys = golden_mean();
    let mut g = c.benchmark_group("spectral_solution");
    for bins in [1024, 4096] {
        g.bench_with_input(BenchmarkId::new("uniform", bins), &bins, |b, &k| {
            b.iter(|| solve(&sys, black_box(k), false))
        });
        g.bench_with_input(BenchmarkId::new("markov", bins), &bins, |b, &k| {
            b.iter(|| solve(&sys, black_box(k), true))
        });
    }
    g.finish();
}

fn perturbed(c: &mut Criterion) {
    let sys = golden_mean();
    let sol = solve(&sys, 4096, true);
    let radii = [2f64.powi(-6), 2f64.powi(-8), 2f64.powi(-10)];
    c.bench_function("perturbed_curve_z_third", |b| {
        b.iter(|| perturbed_eigenvalue_curve(&sys, &sol, black_box(1.0 / 3.0), &radii, true, true).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = ulam_solve, perturbed
}
criterion_main!(benches);
