//! Synthetic data drawn from the generative model, for experiments,
//! fixtures, and benchmarks.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::count_matrix::CountMatrix;
use crate::error::Result;
use crate::model::{pmf_cell, Hyperparams, LatentState, PriorKind};
use crate::sampler::draw_prior_state;

/// Draws a state from the Gaussian prior and a fully observed count matrix
/// of `n_draws` interaction events distributed over the cell universe with
/// probabilities proportional to the unnormalized masses.
pub fn generate_gaussian_data<R: Rng + ?Sized>(
    n_nodes: usize,
    d: usize,
    sigma_z_sq: f64,
    sigma_w_sq: f64,
    n_draws: u64,
    symmetric: bool,
    rng: &mut R,
) -> Result<(CountMatrix, LatentState)> {
    let hyper = Hyperparams {
        sigma_z_sq,
        sigma_w_sq,
        d_gaussian: d,
        ..Hyperparams::default()
    };
    let state = draw_prior_state(PriorKind::Gaussian, n_nodes, &hyper, rng)?;
    let data = draw_counts(&state, n_nodes, n_draws, symmetric, rng)?;
    Ok((data, state))
}

/// Plants `n_classes` balanced latent classes with weights drawn from
/// `N(0, sigma_w_sq)` and draws a fully observed count matrix from the
/// induced cell probabilities. Useful for well-separated class structure.
pub fn generate_class_data<R: Rng + ?Sized>(
    n_nodes: usize,
    n_classes: usize,
    sigma_w_sq: f64,
    n_draws: u64,
    symmetric: bool,
    rng: &mut R,
) -> Result<(CountMatrix, LatentState)> {
    let assignments: Vec<usize> = (0..n_nodes).map(|i| i % n_classes.max(1)).collect();
    let normal = Normal::new(0.0, sigma_w_sq.sqrt())
        .map_err(|e| crate::error::CoreError::InvalidArgument(e.to_string()))?;
    let mut w = ndarray::Array2::zeros((n_classes, n_classes));
    for r in 0..n_classes {
        for c in 0..n_classes {
            w[[r, c]] = normal.sample(rng);
        }
    }
    let state = LatentState::crp(assignments, w)?;
    let data = draw_counts(&state, n_nodes, n_draws, symmetric, rng)?;
    Ok((data, state))
}

/// Multinomial draw of `n_draws` events over the cell universe, every cell
/// observed (zero counts included).
pub fn draw_counts<R: Rng + ?Sized>(
    state: &LatentState,
    n_nodes: usize,
    n_draws: u64,
    symmetric: bool,
    rng: &mut R,
) -> Result<CountMatrix> {
    let mut data = CountMatrix::new(n_nodes, symmetric);
    let cells: Vec<_> = data.universe().collect();
    let mut cumulative = Vec::with_capacity(cells.len());
    let mut total = 0.0;
    for &(i, j) in &cells {
        total += pmf_cell(state, i, j)?;
        cumulative.push(total);
    }
    let mut counts = vec![0.0; cells.len()];
    for _ in 0..n_draws {
        let target = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= target);
        counts[idx.min(cells.len() - 1)] += 1.0;
    }
    for (&(i, j), &c) in cells.iter().zip(&counts) {
        data.observe(i, j, c)?;
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn counts_total_matches_draws_and_mask_is_complete() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (data, state) =
            generate_gaussian_data(6, 2, 1.0, 1.0, 500, false, &mut rng).unwrap();
        assert_eq!(data.total_count(), 500.0);
        assert_eq!(data.n_observed(), 36);
        assert_eq!(state.n_nodes(), 6);

        let (data, state) = generate_class_data(9, 3, 4.0, 200, true, &mut rng).unwrap();
        assert_eq!(data.total_count(), 200.0);
        assert_eq!(data.n_observed(), 45);
        assert_eq!(state.d(), 3);
    }

    #[test]
    fn generation_is_reproducible() {
        let draw = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            generate_gaussian_data(5, 2, 1.0, 1.0, 100, true, &mut rng).unwrap()
        };
        let (a, _) = draw(7);
        let (b, _) = draw(7);
        assert_eq!(a, b);
    }
}
