//! Dirichlet-compound-Multinomial log-likelihood of a count matrix and the
//! smoothed posterior-predictive cell probabilities.
//!
//! Every cell's Dirichlet parameter is its unnormalized interaction mass
//! plus a symmetric smoothing share, `alpha(i,j) = pmf(i,j) + alpha_dcm/K`,
//! where `K` counts the node pairings seen in training. The density is the
//! ratio-of-gammas form without the multinomial coefficient; the
//! coefficient is constant in the parameters, so posterior comparisons are
//! unaffected.

use statrs::function::gamma::ln_gamma;

use crate::count_matrix::{Cell, CountMatrix};
use crate::error::{CoreError, Result};
use crate::model::{softplus_raw, LatentState};
use crate::sampler::Sample;

/// Symmetric smoothing: total mass `alpha_dcm` spread over the `k_seen`
/// node pairings observed with a nonzero count in training.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingScheme {
    alpha_dcm: f64,
    k_seen: usize,
}

impl SmoothingScheme {
    pub fn new(alpha_dcm: f64, k_seen: usize) -> Result<Self> {
        if !(alpha_dcm.is_finite() && alpha_dcm > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "alpha_dcm must be strictly positive, got {alpha_dcm}"
            )));
        }
        if k_seen < 1 {
            return Err(CoreError::InvalidArgument("k_seen must be >= 1".into()));
        }
        Ok(Self { alpha_dcm, k_seen })
    }

    /// Derives `k_seen` from the training matrix (floored at 1 so that
    /// prior-only runs on empty masks remain well defined).
    pub fn from_train(alpha_dcm: f64, train: &CountMatrix) -> Result<Self> {
        Self::new(alpha_dcm, train.n_nonzero().max(1))
    }

    pub fn alpha_dcm(&self) -> f64 {
        self.alpha_dcm
    }

    pub fn k_seen(&self) -> usize {
        self.k_seen
    }

    /// The smoothing share added to every cell's Dirichlet parameter.
    #[inline]
    pub fn per_cell(&self) -> f64 {
        self.alpha_dcm / self.k_seen as f64
    }
}

/// Per-cell Dirichlet parameters with their cached sum.
#[derive(Debug, Clone)]
pub struct DcmParams {
    alphas: Vec<f64>,
    total_alpha: f64,
}

impl DcmParams {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(CoreError::EmptyCells);
        }
        if alphas.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
            return Err(CoreError::InvalidArgument(
                "all alphas must be strictly positive".into(),
            ));
        }
        let total_alpha = alphas.iter().sum();
        Ok(Self {
            alphas,
            total_alpha,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn total_alpha(&self) -> f64 {
        self.total_alpha
    }
}

/// Smoothed Dirichlet parameters `pmf(i,j) + alpha_dcm/K` for each cell.
pub fn dcm_alphas(
    state: &LatentState,
    smoothing: &SmoothingScheme,
    cells: &[Cell],
) -> Result<DcmParams> {
    if cells.is_empty() {
        return Err(CoreError::EmptyCells);
    }
    let s = smoothing.per_cell();
    let alphas = crate::model::pmf_matrix(state, cells)?
        .into_iter()
        .map(|p| p + s)
        .collect();
    DcmParams::new(alphas)
}

/// Log-density of a count vector under the compound distribution:
/// `lnG(A) - lnG(N + A) + sum lnG(n_c + a_c) - lnG(a_c)`.
///
/// Counts may be real-valued (annealed matrices rescale them below
/// integers); an all-zero vector has probability one.
pub fn dcm_log_prob(counts: &[f64], params: &DcmParams) -> Result<f64> {
    if counts.len() != params.alphas.len() {
        return Err(CoreError::DimensionMismatch {
            expected: params.alphas.len(),
            got: counts.len(),
        });
    }
    let mut n_total = 0.0;
    let mut per_cell = 0.0;
    for (&n, &a) in counts.iter().zip(&params.alphas) {
        if !n.is_finite() {
            return Err(CoreError::NonFinite(n));
        }
        if n < 0.0 {
            return Err(CoreError::NegativeCount(n));
        }
        n_total += n;
        if n > 0.0 {
            per_cell += ln_gamma(n + a) - ln_gamma(a);
        }
    }
    let a_total = params.total_alpha;
    Ok(ln_gamma(a_total) - ln_gamma(n_total + a_total) + per_cell)
}

/// Log-likelihood of the observed counts under `state`.
///
/// The compound distribution ranges over the full cell universe: cells
/// outside the observed mask contribute no counts and no per-cell gamma
/// terms, but their smoothed mass still enters the Dirichlet total.
pub fn data_log_likelihood(
    data: &CountMatrix,
    state: &LatentState,
    smoothing: &SmoothingScheme,
) -> Result<f64> {
    if state.n_nodes() != data.n_nodes() {
        return Err(CoreError::DimensionMismatch {
            expected: data.n_nodes(),
            got: state.n_nodes(),
        });
    }
    Ok(log_lik_unchecked(data, state, smoothing))
}

/// Hot-path likelihood without the size check; callers guarantee that the
/// state covers the matrix's nodes.
pub(crate) fn log_lik_unchecked(
    data: &CountMatrix,
    state: &LatentState,
    smoothing: &SmoothingScheme,
) -> f64 {
    let s = smoothing.per_cell();
    let mut a_total = 0.0;
    for (i, j) in data.universe() {
        a_total += softplus_raw(state.bilinear(i, j)) + s;
    }
    let mut n_total = 0.0;
    let mut per_cell = 0.0;
    for ((i, j), count) in data.observed() {
        n_total += count;
        if count > 0.0 {
            let alpha = softplus_raw(state.bilinear(i, j)) + s;
            per_cell += ln_gamma(count + alpha) - ln_gamma(alpha);
        }
    }
    ln_gamma(a_total) - ln_gamma(n_total + a_total) + per_cell
}

/// Compound log-density of `data`'s counts restricted to `cells`, with
/// Dirichlet parameters from `state` and `smoothing` on those same cells.
/// Used for held-out evaluation.
pub fn dcm_log_prob_for_cells(
    data: &CountMatrix,
    state: &LatentState,
    smoothing: &SmoothingScheme,
    cells: &[Cell],
) -> Result<f64> {
    let params = dcm_alphas(state, smoothing, cells)?;
    let counts: Vec<f64> = cells.iter().map(|&(i, j)| data.count(i, j)).collect();
    dcm_log_prob(&counts, &params)
}

/// `log(sum exp(v))` computed stably around the maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Posterior-predictive probabilities of `cells`, averaged over samples:
/// for each sample, `alpha(i,j) / A` with the Dirichlet total taken over
/// the full `universe`.
pub fn predictive_probs(
    samples: &[Sample],
    smoothing: &SmoothingScheme,
    cells: &[Cell],
    universe: &[Cell],
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(CoreError::EmptySamples);
    }
    if universe.is_empty() {
        return Err(CoreError::EmptyCells);
    }
    let s = smoothing.per_cell();
    let mut acc = vec![0.0; cells.len()];
    for sample in samples {
        let mut a_total = 0.0;
        for &(i, j) in universe {
            a_total += crate::model::pmf_cell(&sample.state, i, j)? + s;
        }
        for (&(i, j), slot) in cells.iter().zip(&mut acc) {
            *slot += (crate::model::pmf_cell(&sample.state, i, j)? + s) / a_total;
        }
    }
    let m = samples.len() as f64;
    Ok(acc.into_iter().map(|v| v / m).collect())
}

/// Posterior-predictive probability of a single cell.
pub fn predictive_prob(
    samples: &[Sample],
    smoothing: &SmoothingScheme,
    i: usize,
    j: usize,
    universe: &[Cell],
) -> Result<f64> {
    if !universe.contains(&(i, j)) {
        return Err(CoreError::CellNotInList(i, j));
    }
    Ok(predictive_probs(samples, smoothing, &[(i, j)], universe)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PriorKind;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    const LOG_2: f64 = std::f64::consts::LN_2;

    fn zero_weight_state(n: usize) -> LatentState {
        let z = Array2::from_elem((1, n), 0.5);
        LatentState::gaussian(z, Array2::zeros((1, 1))).unwrap()
    }

    #[test]
    fn alphas_add_smoothing_share() {
        let state = zero_weight_state(2);
        let smoothing = SmoothingScheme::new(1.0, 4).unwrap();
        let params = dcm_alphas(&state, &smoothing, &[(0, 1)]).unwrap();
        assert_abs_diff_eq!(params.alphas()[0], LOG_2 + 0.25, epsilon = 1e-12);

        // smoothing share vanishes as alpha_dcm -> 0
        let tiny = SmoothingScheme::new(1e-12, 4).unwrap();
        let params = dcm_alphas(&state, &tiny, &[(0, 1)]).unwrap();
        assert_abs_diff_eq!(params.alphas()[0], LOG_2, epsilon = 1e-9);

        let smoothing = SmoothingScheme::new(3.0, 3).unwrap();
        let params = dcm_alphas(&state, &smoothing, &[(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_abs_diff_eq!(params.total_alpha(), 5.079441541679836, epsilon = 1e-12);
    }

    #[test]
    fn dcm_log_prob_reference_values() {
        let params = DcmParams::new(vec![1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            dcm_log_prob(&[1.0, 0.0], &params).unwrap(),
            (0.5f64).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            dcm_log_prob(&[1.0, 1.0], &params).unwrap(),
            (1.0f64 / 6.0).ln(),
            epsilon = 1e-12
        );
        let params = DcmParams::new(vec![0.3, 2.1, 7.7]).unwrap();
        assert_eq!(dcm_log_prob(&[0.0, 0.0, 0.0], &params).unwrap(), 0.0);
    }

    #[test]
    fn dcm_log_prob_rejects_bad_input() {
        let params = DcmParams::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            dcm_log_prob(&[1.0], &params),
            Err(CoreError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            dcm_log_prob(&[1.0, -0.5], &params),
            Err(CoreError::NegativeCount(_))
        ));
    }

    #[test]
    fn likelihood_on_empty_mask_is_zero() {
        let data = CountMatrix::new(3, false);
        let state = zero_weight_state(3);
        let smoothing = SmoothingScheme::new(1.0, 1).unwrap();
        assert_eq!(
            data_log_likelihood(&data, &state, &smoothing).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_cell_universe_is_deterministic() {
        let mut data = CountMatrix::new(1, false);
        data.observe(0, 0, 1.0).unwrap();
        let state = zero_weight_state(1);
        let smoothing = SmoothingScheme::new(1.0, 1).unwrap();
        assert_abs_diff_eq!(
            data_log_likelihood(&data, &state, &smoothing).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn symmetric_two_node_matrix_matches_hand_assembly() {
        let mut data = CountMatrix::new(2, true);
        data.observe(0, 1, 2.0).unwrap();
        let z = array![[1.0, 1.0]];
        let state = LatentState::gaussian(z, Array2::zeros((1, 1))).unwrap();
        let smoothing = SmoothingScheme::new(1.0, 1).unwrap();

        // three upper-triangle cells, counts (2, 0, 0), equal alphas
        let s = smoothing.per_cell();
        let params = DcmParams::new(vec![LOG_2 + s; 3]).unwrap();
        let by_hand = dcm_log_prob(&[2.0, 0.0, 0.0], &params).unwrap();
        let got = data_log_likelihood(&data, &state, &smoothing).unwrap();
        assert_abs_diff_eq!(got, by_hand, epsilon = 1e-12);
        assert_abs_diff_eq!(got, -1.912814663382633, epsilon = 1e-12);
    }

    #[test]
    fn predictive_is_uniform_under_zero_weights() {
        let state = zero_weight_state(2);
        let universe: Vec<Cell> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .collect();
        let sample = Sample {
            state,
            train_log_lik: 0.0,
            log_posterior: 0.0,
            seconds_elapsed: 0.0,
            dims: 1,
        };
        let smoothing = SmoothingScheme::new(2.5, 7).unwrap();
        let one = predictive_probs(std::slice::from_ref(&sample), &smoothing, &universe, &universe).unwrap();
        for &p in &one {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
        // averaging two identical samples changes nothing
        let two =
            predictive_probs(&[sample.clone(), sample], &smoothing, &universe, &universe).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn predictive_averages_across_samples() {
        // two states whose single off-diagonal pmf differs
        let mk = |w00: f64| {
            let z = array![[1.0, 1.0]];
            let state = LatentState::gaussian(z, array![[w00]]).unwrap();
            Sample {
                state,
                train_log_lik: 0.0,
                log_posterior: 0.0,
                seconds_elapsed: 0.0,
                dims: 1,
            }
        };
        let universe: Vec<Cell> = vec![(0, 0), (0, 1), (1, 0), (1, 1)];
        let smoothing = SmoothingScheme::new(1.0, 2).unwrap();
        let a = predictive_prob(&[mk(0.0)], &smoothing, 0, 1, &universe).unwrap();
        let b = predictive_prob(&[mk(2.0)], &smoothing, 0, 1, &universe).unwrap();
        let both = predictive_prob(&[mk(0.0), mk(2.0)], &smoothing, 0, 1, &universe).unwrap();
        assert_abs_diff_eq!(both, (a + b) / 2.0, epsilon = 1e-15);
        assert!(matches!(
            predictive_prob(&[], &smoothing, 0, 1, &universe),
            Err(CoreError::EmptySamples)
        ));
    }

    #[test]
    fn crp_state_likelihood_runs() {
        let mut data = CountMatrix::new(3, false);
        data.observe(0, 1, 4.0).unwrap();
        data.observe(2, 2, 1.0).unwrap();
        let w = array![[0.2, -0.4], [1.0, 0.3]];
        let state = LatentState::crp(vec![0, 1, 0], w).unwrap();
        assert_eq!(state.prior_kind(), PriorKind::Crp);
        let smoothing = SmoothingScheme::new(1.0, 2).unwrap();
        let ll = data_log_likelihood(&data, &state, &smoothing).unwrap();
        assert!(ll.is_finite() && ll < 0.0);
    }
}
