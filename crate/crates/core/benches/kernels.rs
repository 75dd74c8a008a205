//! Sequential vs rayon-parallel amplitude kernels on a 16-qubit register.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fput_core::correlator::{Estimator, GeneratingFunction, GeneratingKind};
use fput_core::propagator::DftPair;
use fput_core::validation::mode_displaced_centers;
use fput_core::{
    EncodingKind, Execution, GridSpec, LatticeState, ModelParams, Propagator, TrotterOrder,
};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn setup(n: usize, bits: u32) -> (ModelParams, GridSpec, LatticeState) {
    let params = ModelParams::units(n, 1.0).unwrap();
    let grid = GridSpec::with_default_q_max(&params, bits, EncodingKind::UnsignedOffset).unwrap();
    let centers = mode_displaced_centers(n, 1, 1.0).unwrap();
    let psi = LatticeState::product_gaussian(
        &params,
        &grid,
        params.default_width().unwrap(),
        Some(&centers),
        26,
    )
    .unwrap();
    (params, grid, psi)
}

fn kernels(c: &mut Criterion) {
    let (params, grid, psi) = setup(4, 4);
    let mut g = c.benchmark_group("kernels_n4_b4");
    for (name, exec) in MODES {
        let prop = Propagator::with_options(&params, &grid, exec, DftPair::Standard).unwrap();
        let mut s = psi.clone();
        g.bench_function(BenchmarkId::new("kinetic_step", name), |b| {
            b.iter(|| prop.kinetic_step(black_box(&mut s), 0.01).unwrap())
        });
        g.bench_function(BenchmarkId::new("potential_step", name), |b| {
            b.iter(|| prop.potential_step(black_box(&mut s), 0.01).unwrap())
        });
        g.bench_function(BenchmarkId::new("second_order_step", name), |b| {
            b.iter(|| {
                prop.trotter_step(black_box(&mut s), 0.01, TrotterOrder::Second)
                    .unwrap()
            })
        });
        g.bench_function(BenchmarkId::new("kinetic_expectation", name), |b| {
            b.iter(|| black_box(prop.kinetic_expectation(&s).unwrap()))
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let (params, grid, psi) = setup(3, 4);
    let mut points = Vec::new();
    for kind in GeneratingKind::ALL {
        for (a, b) in Estimator::Richardson.stencil(0.05) {
            points.push((kind, a, b));
        }
    }
    let times = [0.0, 0.05, 0.1];
    let mut g = c.benchmark_group("generating_sweep_n3_b4");
    g.sample_size(10);
    for (name, exec) in MODES {
        let prop = Propagator::with_options(&params, &grid, exec, DftPair::Standard).unwrap();
        let gf = GeneratingFunction::new(&prop, &psi, 1, TrotterOrder::Second, 0.01).unwrap();
        g.bench_function(name, |b| {
            b.iter(|| black_box(gf.sweep(&times, &points).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels, sweep);
criterion_main!(benches);
