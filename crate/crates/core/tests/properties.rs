use ndarray::Array2;
use oversmooth::csbm::{sample_graph, sample_instance, CsbmParams};
use oversmooth::depth::{predict_depth, predict_from_curves, Scenario};
use oversmooth::empirics::structure::random_connected_graph;
use oversmooth::empirics::{class_stats, random_split, threshold_accuracy, SplitFractions};
use oversmooth::graph::Graph;
use oversmooth::propagation::{exact_variance_curve, propagate, OperatorSpec, DEFAULT_EXACT_CAP};
use oversmooth::rng::{trial_rng, Stream};
use oversmooth::theory::{appnp_mean_gap, appnp_variance_bounds, mean_gap, theory_bounds, variance_bounds, variance_limit};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = CsbmParams> {
    (1usize..60, 0.05f64..1.0, 0.0f64..1.0, any::<u64>()).prop_map(|(half, p, frac, seed)| {
        CsbmParams::new(2 * half, p, p * frac)
            .unwrap()
            .with_seed(seed)
    })
}

fn connected(seed: u64, n: usize) -> Graph {
    random_connected_graph(&mut trial_rng(seed, 0, Stream::Auxiliary), n, 0.3)
}

fn features(n: usize, d: usize, seed: u64) -> Array2<f64> {
    use rand::Rng;
    let mut rng = trial_rng(seed, 1, Stream::Auxiliary);
    Array2::from_shape_fn((n, d), |_| rng.random_range(-3.0..3.0))
}

fn linear_ops() -> impl Strategy<Value = OperatorSpec> {
    prop_oneof![
        Just(OperatorSpec::RANDOM_WALK),
        Just(OperatorSpec::SYMMETRIC),
        (0.05f64..=1.0).prop_map(OperatorSpec::appnp),
        (0.05f64..=1.0, 1usize..12).prop_map(|(a, k)| OperatorSpec::ppnp(a, k)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_graphs_are_well_formed(p in params(), trial in 0u64..1000) {
        let g = sample_graph(&p, trial);
        let n = p.n_nodes;
        let a = g.dense_adjacency();
        for i in 0..n {
            prop_assert_eq!(a[[i, i]], 0.0);
            prop_assert_eq!(a.row(i).sum() as usize, g.degree(i));
            prop_assert_eq!(g.neighbors(i).len(), g.degree(i));
            for j in 0..n {
                prop_assert_eq!(a[[i, j]], a[[j, i]]);
            }
        }
        prop_assert_eq!(g.labels().iter().filter(|&&l| l == 1).count(), n / 2);
        prop_assert_eq!(g.labels().iter().filter(|&&l| l == 2).count(), n / 2);
        prop_assert!(g.labels()[..n / 2].iter().all(|&l| l == 1));
    }

    #[test]
    fn sampling_is_deterministic(p in params(), trial in 0u64..1000) {
        let (g1, f1) = sample_instance(&p, trial).unwrap();
        let (g2, f2) = sample_instance(&p, trial).unwrap();
        prop_assert_eq!(&g1, &g2);
        prop_assert_eq!(f1.matrix.as_slice().unwrap(), f2.matrix.as_slice().unwrap());
    }

    #[test]
    fn random_walk_preserves_constants(seed in any::<u64>(), n in 3usize..60, depth in 0usize..15) {
        let g = connected(seed, n);
        let ones = Array2::ones((n, 1));
        for op in [OperatorSpec::RANDOM_WALK, OperatorSpec::appnp(0.3)] {
            let h = propagate(&g, &ones, op, depth).unwrap().matrix;
            prop_assert!(h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
        // The truncated series misses exactly the tail mass.
        let (h, tail) = oversmooth::propagation::ppnp(&g, &ones, 0.2, 6).unwrap();
        prop_assert!(h.iter().all(|v| (v - (1.0 - tail)).abs() < 1e-12));
    }

    #[test]
    fn propagation_is_linear(
        seed in any::<u64>(), n in 3usize..60, depth in 0usize..10,
        a in -3.0f64..3.0, b in -3.0f64..3.0, op in linear_ops(),
    ) {
        let g = connected(seed, n);
        let x = features(n, 2, seed);
        let y = features(n, 2, seed ^ 1);
        let combo = &x * a + &y * b;
        let lhs = propagate(&g, &combo, op, depth).unwrap().matrix;
        let rhs = propagate(&g, &x, op, depth).unwrap().matrix * a + propagate(&g, &y, op, depth).unwrap().matrix * b;
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            prop_assert!((l - r).abs() <= 1e-10);
        }
    }

    #[test]
    fn depth_zero_is_the_input(seed in any::<u64>(), n in 2usize..40, op in linear_ops(), relu in any::<bool>()) {
        let g = connected(seed, n);
        let x = features(n, 3, seed);
        let op = if relu { op.with_relu() } else { op };
        let h = propagate(&g, &x, op, 0).unwrap();
        // PPNP has no depth-0 state: it is evaluated once.
        if !matches!(op.kind, oversmooth::propagation::OperatorKind::Ppnp { .. }) {
            let expect = if relu { x.mapv(|v| v.max(0.0)) } else { x.clone() };
            prop_assert_eq!(h.matrix, expect);
        }
    }

    #[test]
    fn random_walk_variance_lies_between_reach_and_input(seed in any::<u64>(), n in 2usize..40, sigma2 in 0.1f64..5.0) {
        let g = connected(seed, n);
        let curve = exact_variance_curve(&g, OperatorSpec::RANDOM_WALK, 8, sigma2, DEFAULT_EXACT_CAP).unwrap();
        for prof in &curve {
            for (node, &v) in prof.per_node.iter().enumerate() {
                let reach: usize = g.shell_sizes(node, prof.depth).iter().sum();
                prop_assert!(v <= sigma2 * (1.0 + 1e-12));
                prop_assert!(v >= sigma2 / reach as f64 * (1.0 - 1e-12));
                prop_assert!(v >= sigma2 / n as f64 * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn symmetric_variance_never_increases(seed in any::<u64>(), n in 2usize..=50) {
        let g = connected(seed, n);
        let curve = exact_variance_curve(&g, OperatorSpec::SYMMETRIC, 10, 1.0, DEFAULT_EXACT_CAP).unwrap();
        for w in curve.windows(2) {
            for (a, b) in w[0].per_node.iter().zip(&w[1].per_node) {
                prop_assert!(b - a <= 1e-12);
            }
        }
    }

    #[test]
    fn mean_gap_is_geometric(p in params(), n in 0usize..60) {
        let r = (p.p_intra - p.q_inter) / (p.p_intra + p.q_inter);
        let (a, b) = (mean_gap(&p, n), mean_gap(&p, n + 1));
        if a != 0.0 {
            prop_assert!((b / a - r).abs() <= 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn appnp_gap_starts_at_the_input_gap(
        half in 1usize..5000, p in 0.001f64..1.0, q in 0.0f64..1.0,
        mu1 in -5.0f64..0.0, mu2 in 0.001f64..5.0, alpha in 0.001f64..=1.0,
    ) {
        let params = CsbmParams::new(2 * half, p, q).unwrap().with_means(mu1, mu2).unwrap();
        prop_assert!((appnp_mean_gap(&params, alpha, 0) - (mu2 - mu1)).abs() <= 1e-12);
    }

    #[test]
    fn appnp_without_teleport_matches_random_walk_bounds(p in params(), n in 0usize..40) {
        let (lo, hi) = variance_bounds(&p, n);
        let (alo, ahi) = appnp_variance_bounds(&p, 0.0, n);
        prop_assert!((lo - alo).abs() <= 1e-12 * lo.abs().max(1.0));
        prop_assert!((hi - ahi).abs() <= 1e-12 * hi.abs().max(1.0));
    }

    #[test]
    fn variance_limit_is_at_least_uniform(seed in any::<u64>(), n in 3usize..40) {
        let g = connected(seed, n);
        if let Ok(limit) = variance_limit(&g) {
            prop_assert!(limit >= 1.0 / n as f64 - 1e-15);
        }
    }

    #[test]
    fn triangles_rule_out_bipartite(seed in any::<u64>(), n in 3usize..40) {
        let g = connected(seed, n);
        if g.contains_triangle() {
            prop_assert!(!g.is_bipartite());
        }
    }

    #[test]
    fn prediction_structure(
        z0 in 0.01f64..3.0,
        zl in prop::collection::vec(0.0f64..4.0, 2..30),
        widths in prop::collection::vec(0.0f64..2.0, 30),
    ) {
        let zu: Vec<f64> = zl.iter().zip(&widths).map(|(l, w)| l + w).collect();
        let d = predict_from_curves(z0, &zl, &zu).unwrap();
        let h = d.horizon;
        for iv in [d.n0_interval, d.nstar_interval] {
            prop_assert!(iv[0] <= iv[1] && iv[1] <= h);
        }
        let any_upper = zu[1..].iter().any(|&z| z >= z0);
        let any_lower = zl[1..].iter().any(|&z| z >= z0);
        let expected = match (any_upper, any_lower) {
            (false, _) => Scenario::AllBelow,
            (true, false) => Scenario::UpperCrossOnly,
            (true, true) => Scenario::LowerCrossToo,
        };
        prop_assert_eq!(d.scenario, expected);
        match d.scenario {
            Scenario::AllBelow => {
                prop_assert_eq!(d.n0_interval, [0, 0]);
                prop_assert_eq!(d.nstar_interval, [0, 0]);
            }
            Scenario::LowerCrossToo => {
                let f = d.nstar_floor.unwrap();
                prop_assert!(d.nstar_interval[0] <= f && f <= d.nstar_interval[1]);
            }
            Scenario::UpperCrossOnly => prop_assert!(d.nstar_floor.is_none()),
        }
    }

    #[test]
    fn doubling_the_horizon_keeps_settled_predictions(p in params(), horizon in 1usize..25) {
        let short = predict_depth(&p, horizon).unwrap();
        let f = short.horizon_flags;
        let settled = !f.horizon_exhausted && !f.nstar_right_fallback && !f.nstar_floor_at_horizon;
        // Once the bounds cross the lower curve is no longer a lower bound on anything.
        if settled && short.crossed_depths.is_empty() {
            let long = predict_depth(&p, 2 * horizon).unwrap();
            prop_assert_eq!(short.scenario, long.scenario);
            prop_assert_eq!(short.n0_interval, long.n0_interval);
            prop_assert_eq!(short.nstar_interval, long.nstar_interval);
        }
    }

    #[test]
    fn threshold_accuracy_ignores_affine_maps(
        seed in any::<u64>(), scale in 0.01f64..100.0, shift in -50.0f64..50.0,
    ) {
        let p = CsbmParams::new(200, 0.05, 0.02).unwrap().with_dim(2).unwrap().with_seed(seed);
        let (g, f) = sample_instance(&p, 0).unwrap();
        let split = random_split(200, SplitFractions::default(), seed, 0).unwrap();
        let base = threshold_accuracy(&f.matrix, g.labels(), &split).unwrap();
        let moved = f.matrix.mapv(|v| scale * v + shift);
        let after = threshold_accuracy(&moved, g.labels(), &split).unwrap();
        prop_assert!((base.0 - after.0).abs() < 1e-12 && (base.1 - after.1).abs() < 1e-12);
    }

    #[test]
    fn class_stats_are_well_formed(seed in any::<u64>(), half in 2usize..40, d in 1usize..4) {
        let p = CsbmParams::new(2 * half, 0.3, 0.1).unwrap().with_dim(d).unwrap().with_seed(seed);
        let (g, f) = sample_instance(&p, 0).unwrap();
        let s = class_stats(&f.matrix, g.labels(), 0).unwrap();
        let m = &s.pairwise_mean_dists;
        prop_assert!(s.pooled_within_var >= 0.0);
        for i in 0..m.nrows() {
            prop_assert_eq!(m[[i, i]], 0.0);
            for j in 0..m.ncols() {
                prop_assert_eq!(m[[i, j]], m[[j, i]]);
            }
        }
    }
}

#[test]
fn bound_curves_are_ordered_at_the_reference_model() {
    let p = CsbmParams::default();
    for n in 1..50 {
        let b = theory_bounds(&p, n);
        if b.consistent {
            assert!(b.var_lower <= b.var_upper && b.z_lower <= b.z_upper, "depth {n}");
            assert!(b.bayes_err_upper >= b.bayes_err_lower);
        } else {
            assert!(b.checked().is_err());
        }
    }
}

#[test]
fn bayes_error_decreases_in_z_and_dimension() {
    use oversmooth::theory::bayes_error;
    let mut last = f64::INFINITY;
    for k in 0..100 {
        let e = bayes_error(0.05 * k as f64, 1.0, 1);
        assert!(e <= last);
        last = e;
    }
    for d in 1..20 {
        assert!(bayes_error(0.5, 1.0, d + 1) < bayes_error(0.5, 1.0, d));
    }
}

#[test]
fn noisier_features_keep_convolution_useful() {
    for sigma2 in [0.5, 1.0, 2.0, 4.0] {
        let p = CsbmParams::default().with_sigma2(sigma2).unwrap();
        assert_ne!(predict_depth(&p, 30).unwrap().scenario, Scenario::AllBelow, "sigma2 {sigma2}");
    }
}

#[test]
fn variance_limit_is_uniform_only_on_regular_graphs() {
    let regular = Graph::circulant(10, &[1, 2]);
    assert!((variance_limit(&regular).unwrap() - 0.1).abs() < 1e-15);
    let irregular = Graph::triangle_with_pendant();
    assert!(variance_limit(&irregular).unwrap() > 0.25 + 1e-3);
}
