use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tdscat::{
    crank_nicolson_bigbox, evolve, memory_term, step, BigBoxConfig, Complex64, KernelTable,
    PlaneWaveSource, PotentialSpec, WaveState,
};
use tdscat_bench::{barrier_run, unit_lattice};

fn bench_evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    for n_steps in [200usize, 400] {
        let cfg = barrier_run(n_steps);
        group.bench_function(format!("barrier_{n_steps}_steps"), |b| {
            b.iter(|| evolve(black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

// The convolution at the lead sites is the only superlinear piece of the
// engine, so it gets its own number at a depth where it dominates.
fn bench_memory_term(c: &mut Criterion) {
    let lat = unit_lattice(4);
    let k = 2000usize;
    let table = KernelTable::build(&lat, 0.02, k).unwrap();
    let hist: Vec<Complex64> =
        (0..=k).map(|i| Complex64::from_polar(1.0, 0.1 * i as f64)).collect();
    c.bench_function("memory_term_depth_2000", |b| {
        b.iter(|| memory_term(black_box(&hist), black_box(&hist), &table, k))
    });
}

fn bench_single_step(c: &mut Criterion) {
    let cfg = barrier_run(400);
    let table = KernelTable::build(&unit_lattice(60), 0.02, 400).unwrap();
    // March to mid-run so the step carries a realistic history depth.
    let mut state = WaveState::initial(&cfg);
    for _ in 0..200 {
        state = step(state, &cfg, &table).unwrap();
    }
    c.bench_function("step_at_depth_200", |b| {
        b.iter_batched(
            || state.clone(),
            |s| step(s, &cfg, &table).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bench_bigbox(c: &mut Criterion) {
    let lat = unit_lattice(60);
    let src = PlaneWaveSource::new(&lat, 1.0).unwrap();
    let cfg = BigBoxConfig {
        lat,
        src,
        pot: PotentialSpec::None,
        pad_sites: 300,
        dt: 0.02,
        n_steps: 200,
        record_stride: 200,
    };
    c.bench_function("bigbox_cn_200_steps", |b| {
        b.iter(|| crank_nicolson_bigbox(black_box(&cfg)).unwrap())
    });
}

criterion_group!(engine, bench_evolve, bench_single_step, bench_memory_term, bench_bigbox);
criterion_main!(engine);
