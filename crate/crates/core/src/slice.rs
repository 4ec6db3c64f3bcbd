//! Univariate slice sampling with the linear stepping-out and shrinkage
//! procedures (Neal 2003).

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{CoreError, Result};

/// Tuning for the stepping-out interval search.
#[derive(Debug, Clone, Copy)]
pub struct SliceConfig {
    /// Width of the initial interval placed around the current point.
    pub initial_width: f64,
    /// Maximum number of whole-width extensions per side.
    pub max_step_outs: u32,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            initial_width: 1.0,
            max_step_outs: 64,
        }
    }
}

/// One slice-sampling update of `x0` against `log_density`.
///
/// Draws the slice level `log_density(x0) - Exponential(1)`, steps an
/// interval of `initial_width` out by whole widths (at most
/// `max_step_outs` per side) until both endpoints fall below the level,
/// then shrinkage-samples inside the interval until a point above the
/// level is accepted. Leaves the target distribution invariant.
pub fn slice_sample_1d<R: Rng + ?Sized>(
    mut log_density: impl FnMut(f64) -> f64,
    x0: f64,
    cfg: &SliceConfig,
    rng: &mut R,
) -> Result<f64> {
    let f0 = log_density(x0);
    if !f0.is_finite() {
        return Err(CoreError::NonFinite(f0));
    }
    let exp_draw: f64 = Exp1.sample(rng);
    let level = f0 - exp_draw;

    let width = cfg.initial_width;
    let mut left = x0 - width * rng.random::<f64>();
    let mut right = left + width;
    let mut steps = 0;
    while steps < cfg.max_step_outs && log_density(left) > level {
        left -= width;
        steps += 1;
    }
    steps = 0;
    while steps < cfg.max_step_outs && log_density(right) > level {
        right += width;
        steps += 1;
    }

    loop {
        if right - left < 1e-300 {
            return Err(CoreError::DegenerateSlice);
        }
        let x1 = left + rng.random::<f64>() * (right - left);
        if log_density(x1) > level {
            return Ok(x1);
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
    }
}
