use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tdscat::{free_propagator, sigma_r, transfer_matrix_transmission, KernelTable};
use tdscat_bench::unit_lattice;

fn bench_kernel_table(c: &mut Criterion) {
    let lat = unit_lattice(4);
    let mut group = c.benchmark_group("kernel_table_build");
    for n in [1024usize, 8192] {
        group.bench_function(format!("{n}_steps"), |b| {
            b.iter(|| KernelTable::build(black_box(&lat), 0.05, n).unwrap())
        });
    }
    group.finish();
}

fn bench_sigma_r(c: &mut Criterion) {
    c.bench_function("sigma_r_1000_times", |b| {
        b.iter(|| {
            let mut acc = tdscat::Complex64::new(0.0, 0.0);
            for i in 0..1000 {
                acc += sigma_r(black_box(0.5), 0.05 * i as f64);
            }
            acc
        })
    });
}

fn bench_free_propagator(c: &mut Criterion) {
    // Far sites at late times exercise the large-order Bessel path.
    c.bench_function("free_propagator_row", |b| {
        b.iter(|| {
            let mut acc = tdscat::Complex64::new(0.0, 0.0);
            for n in 0..200i64 {
                acc += free_propagator(black_box(0.5), n, 40.0);
            }
            acc
        })
    });
}

fn bench_transfer_matrix(c: &mut Criterion) {
    let lat = unit_lattice(400);
    let mut barrier = vec![0.0; 401];
    for (j, u) in barrier.iter_mut().enumerate() {
        *u = 0.2 * (0.03 * j as f64).sin().powi(2);
    }
    c.bench_function("transfer_matrix_401_sites", |b| {
        b.iter(|| transfer_matrix_transmission(black_box(&lat), &barrier, 0.9).unwrap())
    });
}

criterion_group!(kernels, bench_kernel_table, bench_sigma_r, bench_free_propagator, bench_transfer_matrix);
criterion_main!(kernels);
