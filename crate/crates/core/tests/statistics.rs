//! Monte Carlo checks of the generators and estimators.

use oversmooth::csbm::{sample_graph, sample_instance, CsbmParams};
use oversmooth::empirics::{layerwise_sweep, mean_stderr, monte_carlo_moments, SweepConfig, SweepInput};
use oversmooth::propagation::{exact_variance_profile, OperatorSpec};

#[test]
fn edge_frequencies_match_probabilities() {
    let (p, q, t) = (0.1, 0.05, 200usize);
    let params = CsbmParams::new(500, p, q).unwrap();
    let half = 250usize;
    let intra_pairs = 2 * half * (half - 1) / 2;
    let inter_pairs = half * half;
    let (mut intra, mut inter) = (0usize, 0usize);
    for trial in 0..t as u64 {
        for (u, v) in sample_graph(&params, trial).edges() {
            if (u < half) == (v < half) {
                intra += 1;
            } else {
                inter += 1;
            }
        }
    }
    let f_intra = intra as f64 / (intra_pairs * t) as f64;
    let f_inter = inter as f64 / (inter_pairs * t) as f64;
    assert!((f_intra - p).abs() <= 4.0 * (p * (1.0 - p) / t as f64).sqrt(), "{f_intra}");
    assert!((f_inter - q).abs() <= 4.0 * (q * (1.0 - q) / t as f64).sqrt(), "{f_inter}");
}

#[test]
fn mean_degree_at_the_reference_model() {
    let params = CsbmParams::default();
    for trial in 0..20 {
        let g = sample_graph(&params, trial);
        let mean = g.degrees().iter().sum::<usize>() as f64 / g.n_nodes() as f64;
        assert!((13.0..=17.5).contains(&mean), "{mean}");
    }
}

#[test]
fn feature_class_means() {
    let params = CsbmParams::default();
    let (g, f) = sample_instance(&params, 0).unwrap();
    let col = f.matrix.column(0);
    let mean = |class: usize| {
        let v: Vec<f64> = (0..g.n_nodes()).filter(|&i| g.labels()[i] == class).map(|i| col[i]).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let band = 3.0 / 1000f64.sqrt();
    assert!((mean(1) - 1.0).abs() <= band);
    assert!((mean(2) - 1.5).abs() <= band);
}

#[test]
fn moment_estimator_converges_to_exact_variance() {
    let params = CsbmParams::new(200, 0.1, 0.04).unwrap().with_seed(3);
    let report = monte_carlo_moments(&params, OperatorSpec::RANDOM_WALK, 4, 2000).unwrap();
    for depth in 1..=4 {
        // Average the exact per-node variance over the sampled graphs.
        let exact: Vec<f64> = (0..2000u64)
            .map(|t| {
                let g = sample_graph(&params, t);
                let prof = exact_variance_profile(&g, OperatorSpec::RANDOM_WALK, depth, params.sigma2).unwrap();
                prof.mean()
            })
            .collect();
        let (target, _) = mean_stderr(&exact);
        let row = &report.rows[depth];
        assert!(
            (row.model_variance - target).abs() <= 3.0 * row.model_variance_stderr,
            "depth {depth}: {} vs {target} (se {})",
            row.model_variance,
            row.model_variance_stderr
        );
    }
}

#[test]
fn class_mean_distance_contracts_per_layer() {
    let params = CsbmParams::default();
    let cfg = SweepConfig {
        n_max: 5,
        trials: 20,
        ..SweepConfig::default()
    };
    let rows = layerwise_sweep(SweepInput::Csbm(&params), &cfg).unwrap();
    for n in 1..=5 {
        let ratio = rows[n].mixing_metric / rows[n - 1].mixing_metric;
        assert!((ratio - 0.5).abs() <= 0.1, "depth {n}: {ratio}");
    }
}

#[test]
fn sweep_reports_do_not_depend_on_worker_count() {
    let params = CsbmParams::new(400, 0.05, 0.02).unwrap().with_seed(9);
    let cfg = SweepConfig {
        ops: vec![OperatorSpec::RANDOM_WALK, OperatorSpec::appnp(0.1).with_relu()],
        n_max: 6,
        trials: 4,
        ..SweepConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| layerwise_sweep(SweepInput::Csbm(&params), &cfg).unwrap())
    };
    let (a, b) = (run(1), run(4));
    let bits = |rows: &Vec<oversmooth::empirics::SweepRow>| -> Vec<u64> {
        rows.iter().flat_map(|r| [r.test_acc.to_bits(), r.empirical_z.to_bits(), r.denoising_metric.to_bits()]).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}
