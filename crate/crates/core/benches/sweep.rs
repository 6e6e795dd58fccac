use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use dsg::costs::{CostEnsemble, QuadraticRanges};
use dsg::mixing::MixingMatrix;
use dsg::network::{default_radius, generate_rgg};
use dsg::solvers::{run_dsg_form_a, run_gradient_tracking, RunOptions, Safeguards};
use dsg::sweep;

fn seed_run(seed: &u64) -> usize {
    let g = generate_rgg(30, default_radius(30), *seed, 1000).unwrap();
    let m = MixingMatrix::max_degree(&g).unwrap();
    let e = CostEnsemble::generate_quadratic(30, 10, *seed, QuadraticRanges::default()).unwrap();
    let x0 = vec![0.0; 300];
    let opts = RunOptions { max_iters: 5000, tol: 1e-2, record_history: false };
    let tracking = run_gradient_tracking(&e, &m, 1.0 / (3.0 * e.l()), &x0, &opts).unwrap();
    let guards = Safeguards::new(0.3 * e.l(), 1e8).unwrap();
    let dsg = run_dsg_form_a(&e, &m, guards, 3.0 * e.l(), &x0, &opts).unwrap();
    tracking.trace.iterations() + dsg.trace.iterations()
}

fn bench_sweep(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..8).collect();
    let mut group = c.benchmark_group("seed sweep n=30");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| sweep::map_sequential(black_box(&seeds), seed_run)));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| sweep::map_parallel(black_box(&seeds), seed_run)));
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
