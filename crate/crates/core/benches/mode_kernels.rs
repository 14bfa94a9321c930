//! Per-mode kernel benchmarks.
//!
//! Built with default features the kernels run on rayon; `--no-default-features`
//! gives the sequential fallback. Results are bit-identical either way, so the
//! two builds can be compared with criterion baselines:
//!
//! ```text
//! cargo bench -p fvp-core -- --save-baseline rayon
//! cargo bench -p fvp-core --no-default-features -- --baseline rayon
//! ```
//!
//! With the `parallel` feature the suite additionally runs every kernel inside
//! a single-thread rayon pool for an in-run parallel/sequential comparison.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fvp_core::eigenbasis::{interval_basis, EigenSystem, Space, SpectralVector};
use fvp_core::forward::{duhamel_solve, uniform_grid, ModalSignal};
use fvp_core::semigroup::graph_norm;
use num_complex::Complex64;

const N_MODES: usize = 256;
const N_QUAD: usize = 2048;

#[cfg(feature = "parallel")]
type Pool = rayon::ThreadPool;
#[cfg(not(feature = "parallel"))]
type Pool = ();

fn run_in<R: Send>(pool: Option<&Pool>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(pool) = pool {
        return pool.install(f);
    }
    let _ = pool;
    f()
}

fn setup() -> (EigenSystem, Vec<Complex64>, SpectralVector, ModalSignal) {
    let es = interval_basis(std::f64::consts::PI, N_MODES, N_QUAD).unwrap();
    let samples: Vec<Complex64> = es
        .quad_grid()
        .nodes_x
        .iter()
        .map(|&x| Complex64::new((3.0 * x).sin() + 0.25 * (11.0 * x).cos(), 0.0))
        .collect();
    let coeffs: Vec<f64> = (1..=N_MODES).map(|k| 1.0 / k as f64).collect();
    let v = SpectralVector::from_real(&es, &coeffs).unwrap();
    let horizon = 20.0 / es.lambda_max();
    let f = ModalSignal::from_fn(&es, horizon, 32, |j, t| {
        Complex64::new((0.1 * (j + 1) as f64 + t).sin(), 0.0)
    })
    .unwrap();
    (es, samples, v, f)
}

fn run_kernels(c: &mut Criterion, label: &str, pool: Option<&Pool>) {
    let (es, samples, v, f) = setup();
    let out = uniform_grid(f.horizon(), 65);
    let u0 = v.clone();

    let mut group = c.benchmark_group("mode_kernels");
    group.bench_function(BenchmarkId::new("project", label), |b| {
        b.iter(|| run_in(pool, || es.project(black_box(&samples)).unwrap()))
    });
    let xs = es.quad_grid().nodes_x.clone();
    group.bench_function(BenchmarkId::new("synthesize", label), |b| {
        b.iter(|| run_in(pool, || es.synthesize(black_box(&v), &xs).unwrap()))
    });
    group.bench_function(BenchmarkId::new("duhamel_solve", label), |b| {
        b.iter(|| run_in(pool, || duhamel_solve(&es, black_box(&u0), &f, &out).unwrap()))
    });
    group.bench_function(BenchmarkId::new("sobolev_norm", label), |b| {
        b.iter(|| run_in(pool, || es.sobolev_norm(black_box(&v), Space::V).unwrap()))
    });
    group.bench_function(BenchmarkId::new("graph_norm", label), |b| {
        b.iter(|| run_in(pool, || graph_norm(&es, black_box(&v), 0.01).unwrap()))
    });
    group.finish();
}

fn bench_kernels(c: &mut Criterion) {
    #[cfg(feature = "parallel")]
    {
        run_kernels(c, "rayon", None);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
        run_kernels(c, "one-thread-pool", Some(&single));
    }
    #[cfg(not(feature = "parallel"))]
    run_kernels(c, "sequential", None);
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
