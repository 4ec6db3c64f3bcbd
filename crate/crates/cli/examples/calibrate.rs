// Temporary calibration harness; removed before release.
use countnet_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "recovery" => recovery(),
        "trend" => trend(),
        _ => {
            recovery();
            trend();
        }
    }
}

fn recovery() {
    println!("== end-to-end recovery: n=20 d=2 2000 draws, 300 samples ==");
    let burn_in: usize = std::env::args()
        .nth(2)
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let t_all = Instant::now();
    let mut ok = 0;
    for seed in 0..10u64 {
        let t = Instant::now();
        let mut rng = ChaCha20Rng::seed_from_u64(9000 + seed);
        let (data, truth) =
            synthetic::generate_gaussian_data(20, 2, 1.0, 1.0, 2000, true, &mut rng).unwrap();
        let split = split_interactions(&data, 0.8, seed).unwrap();
        let hyper = Hyperparams {
            d_gaussian: 2,
            ..Hyperparams::default()
        };
        let mut cfg = ChainConfig::new(PriorKind::Gaussian, 300, seed);
        cfg.burn_in = burn_in;
        let samples = run_chain(&split.train, &hyper, &cfg).unwrap();
        let smoothing = SmoothingScheme::from_train(1.0, &split.train).unwrap();
        let report = evaluate(&samples, &split, &smoothing).unwrap();

        // ceiling: tau of the true generating state's cell probabilities
        let cells = split.test.observed_cells();
        let total = split.test.total_count();
        let empirical: Vec<f64> = cells
            .iter()
            .map(|&(i, j)| split.test.count(i, j) / total)
            .collect();
        let truth_probs: Vec<f64> = cells
            .iter()
            .map(|&(i, j)| interaction_prob(&truth, i, j, &cells).unwrap())
            .collect();
        let (tau_ceiling, _) = kendall_tau(&empirical, &truth_probs).unwrap();

        // diagnostics: does the chain reach the truth's likelihood, and do
        // predictive ranks align with the truth's?
        let ll_truth = data_log_likelihood(&split.train, &truth, &smoothing).unwrap();
        let ll_mean = samples.iter().map(|s| s.train_log_lik).sum::<f64>()
            / samples.len() as f64;
        let universe: Vec<Cell> = split.train.universe().collect();
        let predictive =
            predictive_probs(&samples, &smoothing, &cells, &universe).unwrap();
        let (tau_pred_truth, _) = kendall_tau(&predictive, &truth_probs).unwrap();
        println!(
            "  ll mean {ll_mean:.1} vs truth {ll_truth:.1}; tau(pred, truth) {tau_pred_truth:.4}"
        );

        let pass = report.kendall_tau > 0.3 && report.tau_p_value < 0.05;
        if pass {
            ok += 1;
        }
        println!(
            "seed {seed}: tau={:.4} (truth {:.4}) p={:.2e} dcor={:.4} testll={:.1} {:.1}s {}",
            report.kendall_tau,
            tau_ceiling,
            report.tau_p_value,
            report.dcor,
            report.test_log_lik,
            t.elapsed().as_secs_f64(),
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("passes: {ok}/10, total {:.1}s", t_all.elapsed().as_secs_f64());
}

fn trend() {
    for (gen_seed, chain_seed) in [(77u64, 3u64), (123, 4), (500, 5)] {
        println!("== performance trend: n=100, seeds ({gen_seed}, {chain_seed}) ==");
        let mut rng = ChaCha20Rng::seed_from_u64(gen_seed);
        let (data, _) =
            synthetic::generate_class_data(100, 8, 9.0, 6000, false, &mut rng).unwrap();
        let hyper = Hyperparams {
            d_gaussian: 2,
            ..Hyperparams::default()
        };
        for kind in [PriorKind::Gaussian, PriorKind::Crp] {
            let t = Instant::now();
            let mut cfg = ChainConfig::new(kind, 9, chain_seed);
            cfg.init.batch_size_max = 10;
            let samples = run_chain(&data, &hyper, &cfg).unwrap();
            let mut secs: Vec<f64> = samples.iter().map(|s| s.seconds_elapsed).collect();
            secs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let dims: Vec<usize> = samples.iter().map(|s| s.dims).collect();
            println!(
                "{kind:?}: median sec/sample {:.4} dims {:?} total {:.1}s",
                secs[secs.len() / 2],
                dims,
                t.elapsed().as_secs_f64()
            );
        }
    }
}
