//! Single-worker versus all-core throughput for the parallel kernels.
//! Build with `--no-default-features` to measure the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oversmooth::empirics::{layerwise_sweep, SweepConfig, SweepInput};
use oversmooth::propagation::{exact_variance_curve, propagate, OperatorSpec, DEFAULT_EXACT_CAP};
use oversmooth::{sample_instance, CsbmParams};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut sizes = vec![1];
    if all > 1 {
        sizes.push(all);
    }
    sizes
        .into_iter()
        .map(|n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            (format!("{n}-threads"), pool)
        })
        .collect()
}

fn kernels(c: &mut Criterion) {
    let params = CsbmParams::default();
    let (graph, features) = sample_instance(&params, 0).unwrap();
    let wide = ndarray::Array2::from_shape_fn((graph.n_nodes(), 64), |(i, j)| ((i * 31 + j) % 17) as f64);
    let sweep_cfg = SweepConfig {
        n_max: 10,
        trials: 8,
        ..SweepConfig::default()
    };

    let mut group = c.benchmark_group("throughput");
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new("propagate_rw_d64_n10", &label), |b| {
            b.iter(|| pool.install(|| propagate(&graph, &wide, OperatorSpec::RANDOM_WALK, 10).unwrap()))
        });
        group.bench_function(BenchmarkId::new("exact_variance_n8", &label), |b| {
            b.iter(|| {
                pool.install(|| {
                    exact_variance_curve(&graph, OperatorSpec::RANDOM_WALK, 8, 1.0, DEFAULT_EXACT_CAP).unwrap()
                })
            })
        });
        group.bench_function(BenchmarkId::new("sweep_8_trials", &label), |b| {
            b.iter(|| pool.install(|| layerwise_sweep(SweepInput::Csbm(&params), &sweep_cfg).unwrap()))
        });
    }
    group.finish();
    drop(features);
}

criterion_group!(benches, kernels);
criterion_main!(benches);
