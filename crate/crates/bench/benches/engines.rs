use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use unfriendly_core::series::x_law;
use unfriendly_core::spectral::branches;
use unfriendly_core::{
    build_config, constants, exact_distribution, simulate, CutPolicy, Family, FamilyTag, PgfEngine, SelectionMode,
    TransferMatrix,
};

fn recurrence(c: &mut Criterion) {
    let mut g = c.benchmark_group("recurrence_x");
    for n in [25, 50, 100] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| PgfEngine::new().x(black_box(n)))
        });
    }
    g.finish();
}

fn series_route(c: &mut Criterion) {
    let mut g = c.benchmark_group("series_x_law");
    g.sample_size(10);
    for n in [50, 100] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| x_law(black_box(n))));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_x");
    for n in [8, 12] {
        let grid = build_config(Family::new(FamilyTag::X, n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| exact_distribution(black_box(grid)).unwrap())
        });
    }
    g.finish();
}

fn constant_digits(c: &mut Criterion) {
    let mut g = c.benchmark_group("constants");
    for d in [20, 100] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| b.iter(|| constants(black_box(d)).unwrap()));
    }
    g.finish();
}

fn spectral(c: &mut Criterion) {
    let t = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    c.bench_function("branches_k50", |b| {
        b.iter(|| branches(black_box(t), -50..=50, CutPolicy::UpperSide).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let grid = build_config(Family::new(FamilyTag::X, 50));
    c.bench_function("simulate_x50_1000", |b| {
        b.iter(|| simulate(black_box(&grid), 1000, 1, SelectionMode::UniformFree).unwrap())
    });
    c.bench_function("transfer_matrix_x200", |b| {
        let grid = build_config(Family::new(FamilyTag::X, 200));
        b.iter(|| TransferMatrix::new(black_box(&grid)).count())
    });
}

criterion_group!(benches, recurrence, series_route, oracle, constant_digits, spectral, sampling);
criterion_main!(benches);
