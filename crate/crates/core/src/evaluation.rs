//! Holdout construction, held-out log-likelihood, Kendall's tau-b with
//! significance, and distance correlation over predictive probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::count_matrix::CountMatrix;
use crate::error::{CoreError, Result};
use crate::likelihood::{
    dcm_log_prob_for_cells, log_sum_exp, predictive_probs, SmoothingScheme,
};
use crate::sampler::Sample;

/// How held-out data was carved from the original counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldoutScheme {
    /// Individual interaction events thinned out of cells; train and test
    /// share the observation mask.
    Interactions,
    /// Whole cells hidden from training; masks are disjoint.
    NodePairs,
}

/// A train/test split of a count matrix.
#[derive(Debug, Clone)]
pub struct HoldoutSplit {
    pub train: CountMatrix,
    pub test: CountMatrix,
    pub scheme: HoldoutScheme,
    pub train_fraction: f64,
}

/// Evaluation summary over a sample set and a holdout split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub test_log_lik: f64,
    pub kendall_tau: f64,
    pub tau_p_value: f64,
    pub dcor: f64,
    pub sec_per_sample: f64,
    pub mean_dims: f64,
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction.is_finite() && 0.0 < fraction && fraction < 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    Ok(())
}

/// Thins each unit of count independently into train (with probability
/// `fraction`) or test. Both halves keep the full original mask, so
/// per-cell train + test counts reproduce the originals exactly.
pub fn split_interactions(data: &CountMatrix, fraction: f64, seed: u64) -> Result<HoldoutSplit> {
    check_fraction(fraction)?;
    data.validate_integer_counts()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut train = CountMatrix::new(data.n_nodes(), data.is_symmetric());
    let mut test = CountMatrix::new(data.n_nodes(), data.is_symmetric());
    for ((i, j), count) in data.observed() {
        let units = count as u64;
        let mut kept = 0.0;
        for _ in 0..units {
            if rng.random::<f64>() < fraction {
                kept += 1.0;
            }
        }
        train.observe(i, j, kept)?;
        test.observe(i, j, count - kept)?;
    }
    Ok(HoldoutSplit {
        train,
        test,
        scheme: HoldoutScheme::Interactions,
        train_fraction: fraction,
    })
}

/// Hides whole cells: `floor((1 - fraction) * |mask|)` observed cells move
/// to the test mask with their counts, and the training matrix treats them
/// as missing.
pub fn split_pairs(data: &CountMatrix, fraction: f64, seed: u64) -> Result<HoldoutSplit> {
    check_fraction(fraction)?;
    let cells = data.observed_cells();
    if cells.len() < 2 {
        return Err(CoreError::MaskTooSmall(cells.len()));
    }
    // nudge past representation noise so e.g. 0.2 * 10 lands on 2, not 1
    let n_test = (((1.0 - fraction) * cells.len() as f64) + 1e-9).floor() as usize;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..cells.len()).collect();
    for pick in 0..n_test.min(cells.len()) {
        let other = pick + rng.random_range(0..cells.len() - pick);
        indices.swap(pick, other);
    }
    let mut held_out = vec![false; cells.len()];
    for &idx in &indices[..n_test] {
        held_out[idx] = true;
    }
    let mut train = CountMatrix::new(data.n_nodes(), data.is_symmetric());
    let mut test = CountMatrix::new(data.n_nodes(), data.is_symmetric());
    for (pos, &(i, j)) in cells.iter().enumerate() {
        let count = data.count(i, j);
        if held_out[pos] {
            test.observe(i, j, count)?;
        } else {
            train.observe(i, j, count)?;
        }
    }
    Ok(HoldoutSplit {
        train,
        test,
        scheme: HoldoutScheme::NodePairs,
        train_fraction: fraction,
    })
}

/// Log of the posterior-mean test likelihood: log-sum-exp over per-sample
/// compound log-densities of the test counts, minus log sample count. The
/// compound distribution is restricted to the test cells.
pub fn test_log_likelihood(
    samples: &[Sample],
    test: &CountMatrix,
    smoothing: &SmoothingScheme,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    let cells = test.observed_cells();
    let per_sample: Vec<f64> = samples
        .iter()
        .map(|s| dcm_log_prob_for_cells(test, &s.state, smoothing, &cells))
        .collect::<Result<_>>()?;
    Ok(log_sum_exp(&per_sample) - (samples.len() as f64).ln())
}

/// Kendall's tau-b with tie correction and a two-sided p-value from the
/// normal approximation to the null distribution.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(CoreError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(CoreError::InvalidArgument(
            "rank correlation needs at least 2 observations".into(),
        ));
    }
    for &v in x.iter().chain(y.iter()) {
        if !v.is_finite() {
            return Err(CoreError::NonFinite(v));
        }
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(CoreError::ConstantVector);
    }

    // sort jointly by (x, y); discordant pairs are then inversions of y
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .expect("finite")
            .then(y[a].partial_cmp(&y[b]).expect("finite"))
    });
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();

    let (x_ties, joint_ties) = x_and_joint_tie_stats(&xs, &ys);
    let swaps = merge_count_inversions(&mut ys);
    // ys is now sorted; reuse it for the y tie statistics
    let y_ties = run_stats(&ys);

    let n_f = n as f64;
    let n0 = n_f * (n_f - 1.0) / 2.0;
    let s = n0 - x_ties.pairs - y_ties.pairs + joint_ties - 2.0 * swaps as f64;
    let denom = (n0 - x_ties.pairs) * (n0 - y_ties.pairs);
    let tau = (s / denom.sqrt()).clamp(-1.0, 1.0);

    // tie-corrected variance of S under the null
    let v0 = n_f * (n_f - 1.0) * (2.0 * n_f + 5.0);
    let mut var_s = (v0 - x_ties.vt - y_ties.vt) / 18.0
        + x_ties.v1 * y_ties.v1 / (2.0 * n_f * (n_f - 1.0));
    if n > 2 {
        var_s += x_ties.v2 * y_ties.v2 / (9.0 * n_f * (n_f - 1.0) * (n_f - 2.0));
    }
    let p = if var_s > 0.0 {
        let z = s / var_s.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(f64::MIN_POSITIVE, 1.0)
    } else {
        1.0
    };
    Ok((tau, p))
}

struct TieStats {
    pairs: f64,
    vt: f64,
    v1: f64,
    v2: f64,
}

fn accumulate_run(stats: &mut TieStats, run: f64) {
    stats.pairs += run * (run - 1.0) / 2.0;
    stats.vt += run * (run - 1.0) * (2.0 * run + 5.0);
    stats.v1 += run * (run - 1.0);
    stats.v2 += run * (run - 1.0) * (run - 2.0);
}

fn run_stats(sorted: &[f64]) -> TieStats {
    let mut stats = TieStats {
        pairs: 0.0,
        vt: 0.0,
        v1: 0.0,
        v2: 0.0,
    };
    let mut run = 1.0;
    for i in 1..sorted.len() {
        if sorted[i] == sorted[i - 1] {
            run += 1.0;
        } else {
            accumulate_run(&mut stats, run);
            run = 1.0;
        }
    }
    accumulate_run(&mut stats, run);
    stats
}

fn x_and_joint_tie_stats(xs: &[f64], ys: &[f64]) -> (TieStats, f64) {
    let mut stats = TieStats {
        pairs: 0.0,
        vt: 0.0,
        v1: 0.0,
        v2: 0.0,
    };
    let mut joint = 0.0;
    let mut x_run = 1.0;
    let mut joint_run = 1.0;
    for i in 1..xs.len() {
        if xs[i] == xs[i - 1] {
            x_run += 1.0;
            if ys[i] == ys[i - 1] {
                joint_run += 1.0;
            } else {
                joint += joint_run * (joint_run - 1.0) / 2.0;
                joint_run = 1.0;
            }
        } else {
            accumulate_run(&mut stats, x_run);
            x_run = 1.0;
            joint += joint_run * (joint_run - 1.0) / 2.0;
            joint_run = 1.0;
        }
    }
    accumulate_run(&mut stats, x_run);
    joint += joint_run * (joint_run - 1.0) / 2.0;
    (stats, joint)
}

fn merge_count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    let mut buffer = values.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    buffer[k] = values[i];
                    i += 1;
                } else {
                    buffer[k] = values[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        values.copy_from_slice(&buffer);
        width *= 2;
    }
    swaps
}

/// Distance correlation via double-centered distance matrices. Returns 0
/// when either vector is (numerically) constant.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(CoreError::InvalidArgument(
            "distance correlation needs at least 2 observations".into(),
        ));
    }
    for &v in x.iter().chain(y.iter()) {
        if !v.is_finite() {
            return Err(CoreError::NonFinite(v));
        }
    }
    let a = centered_distances(x);
    let b = centered_distances(y);
    let n2 = (n * n) as f64;
    let mut dcov2 = 0.0;
    let mut dvar_x = 0.0;
    let mut dvar_y = 0.0;
    for (va, vb) in a.iter().zip(&b) {
        dcov2 += va * vb;
        dvar_x += va * va;
        dvar_y += vb * vb;
    }
    dcov2 /= n2;
    dvar_x /= n2;
    dvar_y /= n2;
    if dvar_x <= 0.0 || dvar_y <= 0.0 {
        return Ok(0.0);
    }
    let r2 = dcov2 / (dvar_x * dvar_y).sqrt();
    Ok(r2.max(0.0).sqrt().min(1.0))
}

fn centered_distances(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n * n];
    let mut row_means = vec![0.0; n];
    let mut grand = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dist = (v[i] - v[j]).abs();
            d[i * n + j] = dist;
            row_means[i] += dist;
            grand += dist;
        }
    }
    let n_f = n as f64;
    for m in &mut row_means {
        *m /= n_f;
    }
    grand /= n_f * n_f;
    for i in 0..n {
        for j in 0..n {
            // distances are symmetric, so column means equal row means
            d[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    d
}

/// Full evaluation: held-out log-likelihood plus rank and distance
/// correlation between the empirical test probabilities (test counts
/// normalized over test cells) and the mean predictive probabilities.
pub fn evaluate(
    samples: &[Sample],
    split: &HoldoutSplit,
    smoothing: &SmoothingScheme,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    let test_cells = split.test.observed_cells();
    let total: f64 = split.test.total_count();
    let empirical: Vec<f64> = test_cells
        .iter()
        .map(|&(i, j)| {
            let c = split.test.count(i, j);
            if total > 0.0 {
                c / total
            } else {
                c
            }
        })
        .collect();
    let universe: Vec<_> = split.train.universe().collect();
    let predictive = predictive_probs(samples, smoothing, &test_cells, &universe)?;
    let (kendall, p) = kendall_tau(&empirical, &predictive)?;
    let dcor = distance_correlation(&empirical, &predictive)?;
    let test_log_lik = test_log_likelihood(samples, &split.test, smoothing)?;
    let m = samples.len() as f64;
    Ok(EvalReport {
        test_log_lik,
        kendall_tau: kendall,
        tau_p_value: p,
        dcor,
        sec_per_sample: samples.iter().map(|s| s.seconds_elapsed).sum::<f64>() / m,
        mean_dims: samples.iter().map(|s| s.dims as f64).sum::<f64>() / m,
    })
}
