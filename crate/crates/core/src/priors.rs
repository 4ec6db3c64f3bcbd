//! Log-densities and sampling for the priors: the Chinese restaurant
//! process over class assignments and diagonal Gaussians over node
//! representations and weight entries.

use ndarray::ArrayView2;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{CoreError, Result};

/// A partition of `n` nodes into occupied classes under a CRP prior.
#[derive(Debug, Clone)]
pub struct CrpState {
    assignments: Vec<usize>,
    class_sizes: Vec<usize>,
    concentration: f64,
}

impl CrpState {
    /// Builds from per-node class labels; labels must be compact (every
    /// class in `0..K` occupied).
    pub fn new(assignments: Vec<usize>, concentration: f64) -> Result<Self> {
        if assignments.is_empty() {
            return Err(CoreError::InvalidState("no nodes".into()));
        }
        if !(concentration.is_finite() && concentration > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "concentration must be strictly positive, got {concentration}"
            )));
        }
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        let mut class_sizes = vec![0usize; k];
        for &a in &assignments {
            class_sizes[a] += 1;
        }
        if class_sizes.contains(&0) {
            return Err(CoreError::InvalidState(
                "class labels are not compact".into(),
            ));
        }
        Ok(Self {
            assignments,
            class_sizes,
            concentration,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.assignments.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }
}

/// Seating probabilities for one node given everyone else's seats: entry
/// `k` is `m_k / (n - 1 + alpha)` over the classes that remain occupied
/// once `excluding` is removed (in label order), and the final entry is
/// the new-class probability `alpha / (n - 1 + alpha)`.
pub fn crp_seating_probs(state: &CrpState, excluding: usize) -> Result<Vec<f64>> {
    let n = state.n_nodes();
    if excluding >= n {
        return Err(CoreError::IndexOutOfRange {
            index: excluding,
            n_nodes: n,
        });
    }
    let alpha = state.concentration;
    let denom = (n - 1) as f64 + alpha;
    let removed = state.assignments[excluding];
    let mut probs: Vec<f64> = state
        .class_sizes
        .iter()
        .enumerate()
        .filter_map(|(k, &m)| {
            let m = if k == removed { m - 1 } else { m };
            (m > 0).then_some(m as f64 / denom)
        })
        .collect();
    probs.push(alpha / denom);
    Ok(probs)
}

/// Log-probability of the set partition induced by the assignments:
/// `K ln(alpha) + sum_k lnG(m_k) - sum_{t=0}^{n-1} ln(t + alpha)`.
/// Exchangeable: invariant to node order and class relabeling.
pub fn crp_log_prob(state: &CrpState) -> f64 {
    let alpha = state.concentration;
    let mut value = state.n_classes() as f64 * alpha.ln();
    for &m in &state.class_sizes {
        value += ln_gamma(m as f64);
    }
    for t in 0..state.n_nodes() {
        value -= (t as f64 + alpha).ln();
    }
    value
}

/// Relabels classes by order of first appearance.
pub fn canonicalize_assignments(assignments: &[usize]) -> Vec<usize> {
    let mut relabel: Vec<Option<usize>> =
        vec![None; assignments.iter().max().map_or(0, |m| m + 1)];
    let mut next = 0;
    assignments
        .iter()
        .map(|&a| {
            *relabel[a].get_or_insert_with(|| {
                let label = next;
                next += 1;
                label
            })
        })
        .collect()
}

/// Draws a partition by the sequential seating metaphor; labels come out
/// in order of first appearance.
pub fn crp_sequential_draw<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Vec<usize> {
    let mut assignments = Vec::with_capacity(n);
    let mut sizes: Vec<f64> = Vec::new();
    for t in 0..n {
        let denom = t as f64 + alpha;
        let u: f64 = rng.random::<f64>() * denom;
        let mut acc = 0.0;
        let mut chosen = sizes.len();
        for (k, &m) in sizes.iter().enumerate() {
            acc += m;
            if u < acc {
                chosen = k;
                break;
            }
        }
        if chosen == sizes.len() {
            sizes.push(1.0);
        } else {
            sizes[chosen] += 1.0;
        }
        assignments.push(chosen);
    }
    assignments
}

/// Log-density of a node representation under `N(0, sigma_sq I)`.
pub fn gaussian_log_prior_z(z_column: &[f64], sigma_z_sq: f64) -> Result<f64> {
    gaussian_log_density(z_column.iter().copied(), z_column.len(), sigma_z_sq)
}

#[inline]
pub(crate) fn gaussian_log_prior_w_raw(w: ArrayView2<'_, f64>, sigma_sq: f64) -> f64 {
    let norm_sq: f64 = w.iter().map(|v| v * v).sum();
    gaussian_raw(norm_sq, w.len() as f64, sigma_sq)
}

#[inline]
pub(crate) fn gaussian_log_prior_col_raw(
    col: ndarray::ArrayView1<'_, f64>,
    sigma_sq: f64,
) -> f64 {
    let norm_sq: f64 = col.iter().map(|v| v * v).sum();
    gaussian_raw(norm_sq, col.len() as f64, sigma_sq)
}

#[inline]
fn gaussian_raw(norm_sq: f64, d: f64, sigma_sq: f64) -> f64 {
    -0.5 * d * (2.0 * std::f64::consts::PI * sigma_sq).ln() - norm_sq / (2.0 * sigma_sq)
}

/// Log-density of the weight matrix under elementwise `N(0, sigma_sq)`.
pub fn gaussian_log_prior_w(w: ArrayView2<'_, f64>, sigma_w_sq: f64) -> Result<f64> {
    gaussian_log_density(w.iter().copied(), w.len(), sigma_w_sq)
}

fn gaussian_log_density(
    values: impl Iterator<Item = f64>,
    len: usize,
    sigma_sq: f64,
) -> Result<f64> {
    if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "variance must be strictly positive, got {sigma_sq}"
        )));
    }
    let mut norm_sq = 0.0;
    for v in values {
        if !v.is_finite() {
            return Err(CoreError::NonFinite(v));
        }
        norm_sq += v * v;
    }
    let d = len as f64;
    Ok(-0.5 * d * (2.0 * std::f64::consts::PI * sigma_sq).ln() - norm_sq / (2.0 * sigma_sq))
}
