//! Benchmarks for the numeric kernels: series truncation, the grid
//! transform, phase marching, and the Gram PSD test.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use divisor_bench::{mu, nu};
use divisor_core::{
    compound_power_atoms, frac_power_grid, is_member, second_characteristic,
    BinomialSeriesParams, MembershipMethod, SignedAtomicMeasure,
};

fn bench_compound_series(c: &mut Criterion) {
    let theta = SignedAtomicMeasure::delta(1.0);
    c.bench_function("compound_power_atoms t=2.5", |b| {
        let p = BinomialSeriesParams::new(0.5, 2.5, 1e-10, theta.clone()).unwrap();
        b.iter(|| compound_power_atoms(black_box(&p)).unwrap())
    });
}

fn bench_grid_transform(c: &mut Criterion) {
    let mu = mu();
    c.bench_function("frac_power_grid mu t=1.5 n=8192", |b| {
        b.iter(|| frac_power_grid(black_box(&mu), 1.5, 60.0, 8192).unwrap())
    });
}

fn bench_phase_marching(c: &mut Criterion) {
    let mu = mu();
    c.bench_function("second_characteristic mu n=2048", |b| {
        b.iter(|| second_characteristic(black_box(&mu), 40.0, 2048).unwrap())
    });
}

fn bench_membership(c: &mut Criterion) {
    let nu = nu();
    c.bench_function("is_member nu t=1.5 series", |b| {
        b.iter(|| is_member(black_box(&nu), 1.5, 1e-7, MembershipMethod::SeriesDensity).unwrap())
    });
    c.bench_function("is_member nu t=1.5 gram_psd", |b| {
        b.iter(|| is_member(black_box(&nu), 1.5, 1e-8, MembershipMethod::GramPsd).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_compound_series,
    bench_grid_transform,
    bench_phase_marching,
    bench_membership
);
criterion_main!(kernels);
