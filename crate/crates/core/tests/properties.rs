//! Property-based invariants for the model, likelihood, priors, schedule,
//! holdout, and metric code.

use countnet_core::likelihood::dcm_log_prob_for_cells;
use countnet_core::*;
use ndarray::Array2;
use proptest::prelude::*;

fn small_count_matrix() -> impl Strategy<Value = CountMatrix> {
    (2usize..6, any::<bool>()).prop_flat_map(|(n, symmetric)| {
        let cells = proptest::collection::vec(
            ((0..n, 0..n), 0u32..40),
            1..(n * n).min(10),
        );
        cells.prop_map(move |entries| {
            let mut m = CountMatrix::new(n, symmetric);
            for ((i, j), c) in entries {
                m.observe(i, j, c as f64).unwrap();
            }
            m
        })
    })
}

fn paired_vectors(max_abs: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..20).prop_flat_map(move |len| {
        (
            proptest::collection::vec(-max_abs..max_abs, len),
            proptest::collection::vec(-max_abs..max_abs, len),
        )
    })
}

fn gaussian_state(n: usize, d: usize, seed_vals: &[f64]) -> LatentState {
    let mut it = seed_vals.iter().copied().cycle();
    let z = Array2::from_shape_fn((d, n), |_| it.next().unwrap());
    let w = Array2::from_shape_fn((d, d), |_| it.next().unwrap());
    LatentState::gaussian(z, w).unwrap()
}

proptest! {
    #[test]
    fn softplus_is_strictly_convex(a in -20.0f64..19.0, gap in 1.0f64..8.0) {
        let b = a + gap;
        let mid = softplus((a + b) / 2.0).unwrap();
        let chord = (softplus(a).unwrap() + softplus(b).unwrap()) / 2.0;
        prop_assert!(mid < chord - 1e-12, "mid {mid} chord {chord}");
    }

    #[test]
    fn softplus_derivative_is_logistic(x in -15.0f64..15.0) {
        let h = 1e-5;
        let slope = (softplus(x + h).unwrap() - softplus(x - h).unwrap()) / (2.0 * h);
        let logistic = 1.0 / (1.0 + (-x).exp());
        prop_assert!((slope - logistic).abs() < 1e-6);
    }

    #[test]
    fn softplus_is_monotone(x in -700.0f64..700.0, gap in 1e-6f64..10.0) {
        prop_assert!(softplus(x + gap).unwrap() > softplus(x).unwrap() || x > 35.0);
    }

    #[test]
    fn pmf_is_positive_and_matches_crp_lookup(
        labels in proptest::collection::vec(0usize..4, 2..8),
        weights in proptest::collection::vec(-8.0f64..8.0, 16),
    ) {
        let assignments = canonicalize_assignments(&labels);
        let k = assignments.iter().max().unwrap() + 1;
        let mut w = Array2::zeros((k, k));
        let mut it = weights.iter().copied().cycle();
        for r in 0..k {
            for c in 0..k {
                w[[r, c]] = it.next().unwrap();
            }
        }
        let state = LatentState::crp(assignments.clone(), w.clone()).unwrap();
        for i in 0..assignments.len() {
            for j in 0..assignments.len() {
                let p = pmf_cell(&state, i, j).unwrap();
                prop_assert!(p > 0.0);
                let direct = softplus(w[[assignments[i], assignments[j]]]).unwrap();
                prop_assert_eq!(p, direct);
            }
        }
    }

    #[test]
    fn interaction_probs_normalize(vals in proptest::collection::vec(-2.0f64..2.0, 8)) {
        let state = gaussian_state(3, 2, &vals);
        let cells: Vec<Cell> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        let mut total = 0.0;
        for &(i, j) in &cells {
            let p = interaction_prob(&state, i, j, &cells).unwrap();
            prop_assert!(0.0 < p && p < 1.0);
            total += p;
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dcm_is_permutation_invariant(
        pairs in proptest::collection::vec((0.0f64..20.0, 0.05f64..5.0), 2..8),
        swap in any::<prop::sample::Index>(),
    ) {
        let counts: Vec<f64> = pairs.iter().map(|p| p.0.floor()).collect();
        let alphas: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let base = dcm_log_prob(&counts, &DcmParams::new(alphas.clone()).unwrap()).unwrap();

        let k = swap.index(pairs.len());
        let mut counts2 = counts.clone();
        let mut alphas2 = alphas.clone();
        counts2.swap(0, k);
        alphas2.swap(0, k);
        let permuted = dcm_log_prob(&counts2, &DcmParams::new(alphas2).unwrap()).unwrap();
        prop_assert!((base - permuted).abs() < 1e-9);
    }

    #[test]
    fn smoothing_is_monotone_in_alpha_dcm(
        vals in proptest::collection::vec(-2.0f64..2.0, 8),
        alpha in 0.1f64..5.0,
        bump in 0.1f64..5.0,
    ) {
        let state = gaussian_state(3, 2, &vals);
        let cells: Vec<Cell> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        let lo = dcm_alphas(&state, &SmoothingScheme::new(alpha, 5).unwrap(), &cells).unwrap();
        let hi =
            dcm_alphas(&state, &SmoothingScheme::new(alpha + bump, 5).unwrap(), &cells).unwrap();
        for (a, b) in lo.alphas().iter().zip(hi.alphas()) {
            prop_assert!(b > a);
        }
    }

    #[test]
    fn likelihood_ignores_observation_insertion_order(m in small_count_matrix()) {
        let state = gaussian_state(m.n_nodes(), 2, &[0.4, -0.8, 1.3, 0.2, -0.5]);
        let smoothing = SmoothingScheme::from_train(1.0, &m).unwrap();
        let base = data_log_likelihood(&m, &state, &smoothing).unwrap();

        let mut reversed = CountMatrix::new(m.n_nodes(), m.is_symmetric());
        let cells: Vec<_> = m.observed().collect();
        for &((i, j), c) in cells.iter().rev() {
            reversed.observe(i, j, c).unwrap();
        }
        let again = data_log_likelihood(&reversed, &state, &smoothing).unwrap();
        prop_assert_eq!(base, again);
    }

    #[test]
    fn predictive_sums_to_one_over_the_universe(
        vals in proptest::collection::vec(-2.0f64..2.0, 10),
        alpha in 0.2f64..3.0,
    ) {
        let state = gaussian_state(4, 2, &vals);
        let sample = Sample {
            state,
            train_log_lik: 0.0,
            log_posterior: 0.0,
            seconds_elapsed: 0.0,
            dims: 2,
        };
        let universe: Vec<Cell> =
            (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
        let smoothing = SmoothingScheme::new(alpha, 3).unwrap();
        let probs =
            predictive_probs(&[sample], &smoothing, &universe, &universe).unwrap();
        let total: f64 = probs.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "total {total}");
    }

    #[test]
    fn seating_probs_sum_to_one(
        labels in proptest::collection::vec(0usize..5, 2..10),
        alpha in 0.05f64..10.0,
        node in any::<prop::sample::Index>(),
    ) {
        let assignments = canonicalize_assignments(&labels);
        let node = node.index(assignments.len());
        let state = CrpState::new(assignments, alpha).unwrap();
        let probs = crp_seating_probs(&state, node).unwrap();
        prop_assert!(probs.iter().all(|&p| p > 0.0));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crp_log_prob_is_exchangeable(
        labels in proptest::collection::vec(0usize..4, 3..10),
        rotate in 1usize..5,
        alpha in 0.1f64..5.0,
    ) {
        let canon = canonicalize_assignments(&labels);
        let base = crp_log_prob(&CrpState::new(canon.clone(), alpha).unwrap());
        let mut rotated = canon.clone();
        rotated.rotate_left(rotate % canon.len());
        let rotated = canonicalize_assignments(&rotated);
        let other = crp_log_prob(&CrpState::new(rotated, alpha).unwrap());
        prop_assert!((base - other).abs() < 1e-12);
    }

    #[test]
    fn rescale_recovers_the_original_exactly(m in small_count_matrix()) {
        prop_assume!(m.min_nonzero_count().is_some());
        let stages = rescale_schedule(&m, 2.0).unwrap();
        prop_assert_eq!(stages.last().unwrap(), &m);
        let min = m.min_nonzero_count().unwrap();
        let expected = (min.log2().ceil() as usize) + 1;
        prop_assert_eq!(stages.len(), expected);
        // masks are preserved at every stage
        for stage in &stages {
            prop_assert_eq!(stage.n_observed(), m.n_observed());
        }
    }

    #[test]
    fn interaction_split_conserves_every_cell(m in small_count_matrix(), seed in any::<u64>()) {
        let split = split_interactions(&m, 0.8, seed).unwrap();
        for ((i, j), c) in m.observed() {
            prop_assert_eq!(split.train.count(i, j) + split.test.count(i, j), c);
        }
        prop_assert_eq!(split.train.observed_cells(), m.observed_cells());
        prop_assert_eq!(split.test.observed_cells(), m.observed_cells());
    }

    #[test]
    fn pair_split_partitions_the_mask(m in small_count_matrix(), seed in any::<u64>()) {
        prop_assume!(m.n_observed() >= 2);
        let split = split_pairs(&m, 0.8, seed).unwrap();
        let mut union: Vec<Cell> = split
            .train
            .observed_cells()
            .into_iter()
            .chain(split.test.observed_cells())
            .collect();
        union.sort_unstable();
        prop_assert_eq!(union, m.observed_cells());
        for cell in split.test.observed_cells() {
            prop_assert!(!split.train.is_observed(cell.0, cell.1));
        }
        let expected_test = ((0.2 * m.n_observed() as f64) + 1e-9).floor() as usize;
        prop_assert_eq!(split.test.n_observed(), expected_test);
    }

    #[test]
    fn tau_is_invariant_under_strictly_increasing_maps((x, y) in paired_vectors(40.0)) {
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let base = kendall_tau(&x, &y).unwrap();
        let mapped: Vec<f64> = x.iter().map(|&v| (v / 20.0).exp()).collect();
        let got = kendall_tau(&mapped, &y).unwrap();
        prop_assert_eq!(base.0, got.0);
        prop_assert_eq!(base.1, got.1);
    }

    #[test]
    fn dcor_is_invariant_under_positive_affine_maps(
        (x, y) in paired_vectors(40.0),
        a in 0.1f64..10.0,
        b in -5.0f64..5.0,
    ) {
        let base = distance_correlation(&x, &y).unwrap();
        let mapped: Vec<f64> = x.iter().map(|&v| a * v + b).collect();
        let got = distance_correlation(&mapped, &y).unwrap();
        prop_assert!((base - got).abs() < 1e-9, "{base} vs {got}");
    }

    #[test]
    fn metric_symmetry((x, y) in paired_vectors(10.0)) {
        prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
        let (t1, p1) = kendall_tau(&x, &y).unwrap();
        let (t2, p2) = kendall_tau(&y, &x).unwrap();
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(p1, p2);
        let d1 = distance_correlation(&x, &y).unwrap();
        let d2 = distance_correlation(&y, &x).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-15);
    }

    #[test]
    fn restricted_test_ll_is_zero_on_zero_counts(m in small_count_matrix()) {
        let zeroed = m.map_counts(|_| 0.0);
        let state = gaussian_state(m.n_nodes(), 2, &[0.3, -0.9, 0.8]);
        let smoothing = SmoothingScheme::new(1.0, 3).unwrap();
        let cells = zeroed.observed_cells();
        let ll = dcm_log_prob_for_cells(&zeroed, &state, &smoothing, &cells).unwrap();
        prop_assert_eq!(ll, 0.0);
    }
}
