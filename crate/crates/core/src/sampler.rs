//! The MCMC engine: slice updates for continuous coordinates, Gibbs sweeps
//! for CRP class assignments with a Monte Carlo estimate of the new-class
//! likelihood, sequential initialization with count rescaling, and chain
//! orchestration.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::count_matrix::CountMatrix;
use crate::error::{CoreError, Result};
use crate::likelihood::{log_lik_unchecked, log_sum_exp, SmoothingScheme};
use crate::model::{Hyperparams, LatentState, PriorKind};
use crate::priors::{
    crp_log_prob, crp_sequential_draw, gaussian_log_prior_col_raw, gaussian_log_prior_w_raw,
    CrpState,
};
use crate::slice::{slice_sample_1d, SliceConfig};

/// Growth and annealing schedule for sequential initialization.
#[derive(Debug, Clone, Copy)]
pub struct InitSchedule {
    /// Nodes added per activation wave after the first.
    pub batch_size_max: usize,
    /// MCMC iterations run after each wave and each rescale stage.
    pub iterations_per_batch: usize,
    /// Multiplier applied per annealing stage until counts recover.
    pub rescale_factor: f64,
    /// Nodes activated before the first wave.
    pub initial_nodes: usize,
}

impl Default for InitSchedule {
    fn default() -> Self {
        Self {
            batch_size_max: 4,
            iterations_per_batch: 2,
            rescale_factor: 2.0,
            initial_nodes: 2,
        }
    }
}

/// Full chain configuration.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub init: InitSchedule,
    pub prior_kind: PriorKind,
    pub slice: SliceConfig,
}

impl ChainConfig {
    pub fn new(prior_kind: PriorKind, n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            burn_in: 0,
            thin: 1,
            seed,
            init: InitSchedule::default(),
            prior_kind,
            slice: SliceConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(CoreError::InvalidArgument("n_samples must be >= 1".into()));
        }
        if self.thin < 1 {
            return Err(CoreError::InvalidArgument("thin must be >= 1".into()));
        }
        if self.init.batch_size_max < 1 {
            return Err(CoreError::InvalidArgument(
                "batch_size_max must be >= 1".into(),
            ));
        }
        if self.init.iterations_per_batch < 1 {
            return Err(CoreError::InvalidArgument(
                "iterations_per_batch must be >= 1".into(),
            ));
        }
        if self.init.initial_nodes < 2 {
            return Err(CoreError::InvalidArgument(
                "initial_nodes must be >= 2".into(),
            ));
        }
        if !(self.init.rescale_factor.is_finite() && self.init.rescale_factor > 1.0) {
            return Err(CoreError::InvalidArgument(
                "rescale_factor must be > 1".into(),
            ));
        }
        if !(self.slice.initial_width.is_finite() && self.slice.initial_width > 0.0) {
            return Err(CoreError::InvalidArgument(
                "slice initial_width must be > 0".into(),
            ));
        }
        if self.slice.max_step_outs < 1 {
            return Err(CoreError::InvalidArgument(
                "max_step_outs must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One retained posterior draw with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: LatentState,
    pub train_log_lik: f64,
    pub log_posterior: f64,
    /// Wall-clock cost of producing this sample (the whole thinning block).
    pub seconds_elapsed: f64,
    /// Occupied classes for CRP states, the fixed dimension otherwise.
    pub dims: usize,
}

/// Diagnostics from a single MCMC iteration.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub train_log_lik: f64,
    pub log_posterior: f64,
    pub dims: usize,
    pub seconds: f64,
}

/// Slice-samples every weight entry in row-major order against the
/// training likelihood plus the Gaussian weight prior.
pub fn update_w<R: Rng + ?Sized>(
    state: &mut LatentState,
    data: &CountMatrix,
    smoothing: &SmoothingScheme,
    hyper: &Hyperparams,
    slice_cfg: &SliceConfig,
    rng: &mut R,
) -> Result<()> {
    let d = state.d();
    let sigma_w_sq = hyper.sigma_w_sq;
    for row in 0..d {
        for col in 0..d {
            let x0 = state.w()[[row, col]];
            let accepted = slice_sample_1d(
                |v| {
                    state.set_w_entry(row, col, v);
                    log_lik_unchecked(data, state, smoothing)
                        + gaussian_log_prior_w_raw(state.w(), sigma_w_sq)
                },
                x0,
                slice_cfg,
                rng,
            )?;
            state.set_w_entry(row, col, accepted);
        }
    }
    Ok(())
}

/// Slice-samples every component of every node representation (node-major,
/// then component) against the likelihood plus the Gaussian column prior.
pub fn update_z_gaussian<R: Rng + ?Sized>(
    state: &mut LatentState,
    data: &CountMatrix,
    smoothing: &SmoothingScheme,
    hyper: &Hyperparams,
    slice_cfg: &SliceConfig,
    rng: &mut R,
) -> Result<()> {
    if state.prior_kind() != PriorKind::Gaussian {
        return Err(CoreError::InvalidState(
            "update_z_gaussian requires a Gaussian-prior state".into(),
        ));
    }
    let sigma_z_sq = hyper.sigma_z_sq;
    for node in 0..state.n_nodes() {
        for comp in 0..state.d() {
            let x0 = state.z()[[comp, node]];
            let accepted = slice_sample_1d(
                |v| {
                    state.set_z_entry(comp, node, v);
                    log_lik_unchecked(data, state, smoothing)
                        + gaussian_log_prior_col_raw(state.z().column(node), sigma_z_sq)
                },
                x0,
                slice_cfg,
                rng,
            )?;
            state.set_z_entry(comp, node, accepted);
        }
    }
    Ok(())
}

/// Monte Carlo estimate of the marginal log-likelihood of seating `node`
/// at a previously unseen class: fresh weight rows/columns are drawn from
/// the prior `M` times and the likelihoods averaged by log-sum-exp. The
/// fresh class and its weights are discarded afterwards.
pub fn mc_new_class_log_lik<R: Rng + ?Sized>(
    state: &LatentState,
    data: &CountMatrix,
    smoothing: &SmoothingScheme,
    hyper: &Hyperparams,
    node: usize,
    rng: &mut R,
) -> Result<f64> {
    if state.prior_kind() != PriorKind::Crp {
        return Err(CoreError::InvalidState(
            "mc_new_class_log_lik requires a CRP state".into(),
        ));
    }
    if node >= state.n_nodes() {
        return Err(CoreError::IndexOutOfRange {
            index: node,
            n_nodes: state.n_nodes(),
        });
    }
    let m = hyper.mc_new_class_samples;
    if m < 1 {
        return Err(CoreError::InvalidArgument(
            "mc_new_class_samples must be >= 1".into(),
        ));
    }
    let k = state.d();
    let mut work = state.clone();
    work.add_crp_class(&vec![0.0; k], &vec![0.0; k], 0.0);
    work.set_crp_class(node, k);
    let normal = Normal::new(0.0, hyper.sigma_w_sq.sqrt())
        .map_err(|e| CoreError::InvalidArgument(e.to_string()))?;
    let mut log_liks = Vec::with_capacity(m);
    for _ in 0..m {
        for col in 0..=k {
            work.set_w_entry(k, col, normal.sample(rng));
        }
        for row in 0..k {
            work.set_w_entry(row, k, normal.sample(rng));
        }
        log_liks.push(log_lik_unchecked(data, &work, smoothing));
    }
    Ok(log_sum_exp(&log_liks) - (m as f64).ln())
}

/// One Gibbs sweep over CRP class assignments. Each node is unseated
/// (classes emptied by the removal are dropped and the weight matrix
/// shrinks), reseated by sampling from seating probability times
/// likelihood over existing classes plus a Monte-Carlo-estimated fresh
/// class, and a chosen fresh class is instantiated with prior-drawn
/// weights.
pub fn update_z_crp<R: Rng + ?Sized>(
    state: &mut LatentState,
    data: &CountMatrix,
    smoothing: &SmoothingScheme,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    if state.prior_kind() != PriorKind::Crp {
        return Err(CoreError::InvalidState(
            "update_z_crp requires a CRP state".into(),
        ));
    }
    let n = state.n_nodes();
    let normal = Normal::new(0.0, hyper.sigma_w_sq.sqrt())
        .map_err(|e| CoreError::InvalidArgument(e.to_string()))?;
    let mut sizes = vec![0usize; state.d()];
    for &a in state.assignments().expect("CRP state") {
        sizes[a] += 1;
    }
    for node in 0..n {
        let current = state.assignments().expect("CRP state")[node];
        sizes[current] -= 1;
        // A node alone at the only class keeps the class slot; its weights
        // are resampled below when the (certain) fresh-class seat is taken.
        let lone = sizes[current] == 0 && sizes.len() == 1;
        if sizes[current] == 0 && !lone {
            let park = if current == 0 { 1 } else { 0 };
            state.set_crp_class(node, park);
            state.remove_crp_class(current);
            sizes.remove(current);
        }
        let n_existing = if lone { 0 } else { sizes.len() };
        let mut log_weights = Vec::with_capacity(n_existing + 1);
        for (class, &size) in sizes.iter().enumerate().take(n_existing) {
            state.set_crp_class(node, class);
            let ll = log_lik_unchecked(data, state, smoothing);
            log_weights.push((size as f64).ln() + ll);
        }
        let fresh_ll = mc_new_class_log_lik(state, data, smoothing, hyper, node, rng)?;
        log_weights.push(hyper.alpha_crp.ln() + fresh_ll);
        let choice = sample_categorical_log(&log_weights, rng);
        if choice == n_existing {
            if lone {
                debug_assert_eq!(state.d(), 1);
                state.set_w_entry(0, 0, normal.sample(rng));
                state.set_crp_class(node, 0);
                sizes[0] = 1;
            } else {
                let k = sizes.len();
                let new_row: Vec<f64> = (0..k).map(|_| normal.sample(rng)).collect();
                let new_col: Vec<f64> = (0..k).map(|_| normal.sample(rng)).collect();
                let corner = normal.sample(rng);
                state.add_crp_class(&new_row, &new_col, corner);
                state.set_crp_class(node, k);
                sizes.push(1);
            }
        } else {
            state.set_crp_class(node, choice);
            sizes[choice] += 1;
        }
    }
    Ok(())
}

fn sample_categorical_log<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (idx, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return idx;
        }
    }
    log_weights.len() - 1
}

/// Log-density of the latent state under its prior (used for the reported
/// log-posterior).
pub fn log_prior_of_state(state: &LatentState, hyper: &Hyperparams) -> Result<f64> {
    let w_term = crate::priors::gaussian_log_prior_w(state.w(), hyper.sigma_w_sq)?;
    match state.prior_kind() {
        PriorKind::Crp => {
            let crp = CrpState::new(
                state.assignments().expect("CRP state").to_vec(),
                hyper.alpha_crp,
            )?;
            Ok(crp_log_prob(&crp) + w_term)
        }
        PriorKind::Gaussian => {
            let mut z_term = 0.0;
            for node in 0..state.n_nodes() {
                z_term += gaussian_log_prior_col_raw(state.z().column(node), hyper.sigma_z_sq);
            }
            Ok(z_term + w_term)
        }
    }
}

/// One full MCMC iteration: node representations given weights, then
/// weights given representations.
pub fn mcmc_step<R: Rng + ?Sized>(
    state: &mut LatentState,
    data: &CountMatrix,
    smoothing: &SmoothingScheme,
    hyper: &Hyperparams,
    slice_cfg: &SliceConfig,
    rng: &mut R,
) -> Result<StepDiagnostics> {
    let start = Instant::now();
    match state.prior_kind() {
        PriorKind::Crp => update_z_crp(state, data, smoothing, hyper, rng)?,
        PriorKind::Gaussian => update_z_gaussian(state, data, smoothing, hyper, slice_cfg, rng)?,
    }
    update_w(state, data, smoothing, hyper, slice_cfg, rng)?;
    let train_log_lik = log_lik_unchecked(data, state, smoothing);
    let log_posterior = train_log_lik + log_prior_of_state(state, hyper)?;
    Ok(StepDiagnostics {
        train_log_lik,
        log_posterior,
        dims: state.d(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Annealing stages: counts scaled so the smallest nonzero count is 1,
/// then multiplied by `factor` per stage (capped at the originals) until
/// the final stage, which is an exact copy of the input.
pub fn rescale_schedule(data: &CountMatrix, factor: f64) -> Result<Vec<CountMatrix>> {
    if !(factor.is_finite() && factor > 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "rescale factor must be > 1, got {factor}"
        )));
    }
    let m = data.min_nonzero_count().ok_or(CoreError::AllZeroCounts)?;
    let mut mult_steps = 0usize;
    let mut reach = 1.0;
    while reach < m {
        reach *= factor;
        mult_steps += 1;
    }
    if mult_steps == 0 {
        return Ok(vec![data.clone()]);
    }
    let mut stages = Vec::with_capacity(mult_steps + 1);
    stages.push(data.map_counts(|c| c / m));
    for t in 1..mult_steps {
        let scale = factor.powi(t as i32) / m;
        stages.push(data.map_counts(|c| (c * scale).min(c)));
    }
    stages.push(data.clone());
    Ok(stages)
}

/// Sizes of the node-activation waves: `initial` first, then batches of at
/// most `batch_max` until all `n` nodes are active.
pub fn activation_waves(n: usize, initial: usize, batch_max: usize) -> Vec<usize> {
    let mut waves = vec![initial.min(n)];
    let mut active = initial.min(n);
    while active < n {
        let batch = batch_max.min(n - active);
        waves.push(batch);
        active += batch;
    }
    waves
}

/// Grows the model from two nodes to the full node set in small batches
/// with interleaved MCMC, then anneals rescaled counts back up to the
/// original matrix. Nodes are activated in order of descending total
/// interaction count.
pub fn sequential_initialize<R: Rng + ?Sized>(
    data: &CountMatrix,
    smoothing: &SmoothingScheme,
    hyper: &Hyperparams,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<LatentState> {
    let n = data.n_nodes();
    if n < 2 {
        return Err(CoreError::TooFewNodes(n));
    }
    hyper.validate()?;
    cfg.validate()?;
    let sched = cfg.init;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        data.node_strength(b)
            .partial_cmp(&data.node_strength(a))
            .expect("finite strengths")
            .then(a.cmp(&b))
    });

    // Prior-only chains have nothing to rescale; run the waves on the data
    // as-is instead of failing like the standalone schedule does.
    let stages = if data.min_nonzero_count().is_none() {
        vec![data.clone()]
    } else {
        rescale_schedule(data, sched.rescale_factor)?
    };

    let mut active = order[..sched.initial_nodes.min(n)].to_vec();
    let mut state = draw_prior_state(cfg.prior_kind, active.len(), hyper, rng)?;
    loop {
        let sub = stages[0].restricted(&active)?;
        for _ in 0..sched.iterations_per_batch {
            mcmc_step(&mut state, &sub, smoothing, hyper, &cfg.slice, rng)?;
        }
        if active.len() == n {
            break;
        }
        let next_end = (active.len() + sched.batch_size_max).min(n);
        let batch: Vec<usize> = order[active.len()..next_end].to_vec();
        for _ in &batch {
            append_prior_node(&mut state, hyper, rng)?;
        }
        active.extend(batch);
    }
    for stage in &stages[1..] {
        let sub = stage.restricted(&active)?;
        for _ in 0..sched.iterations_per_batch {
            mcmc_step(&mut state, &sub, smoothing, hyper, &cfg.slice, rng)?;
        }
    }

    let mut position = vec![0usize; n];
    for (pos, &node) in active.iter().enumerate() {
        position[node] = pos;
    }
    Ok(state.reorder_nodes(&position).canonicalized())
}

/// Draws a fresh state for `n_nodes` nodes from the prior.
pub fn draw_prior_state<R: Rng + ?Sized>(
    prior_kind: PriorKind,
    n_nodes: usize,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<LatentState> {
    hyper.validate()?;
    let normal_w = Normal::new(0.0, hyper.sigma_w_sq.sqrt())
        .map_err(|e| CoreError::InvalidArgument(e.to_string()))?;
    match prior_kind {
        PriorKind::Crp => {
            let assignments = crp_sequential_draw(n_nodes, hyper.alpha_crp, rng);
            let k = assignments.iter().max().map_or(0, |m| m + 1);
            let w = draw_matrix(k, k, &normal_w, rng);
            LatentState::crp(assignments, w)
        }
        PriorKind::Gaussian => {
            let normal_z = Normal::new(0.0, hyper.sigma_z_sq.sqrt())
                .map_err(|e| CoreError::InvalidArgument(e.to_string()))?;
            let d = hyper.d_gaussian;
            let z = draw_matrix(d, n_nodes, &normal_z, rng);
            let w = draw_matrix(d, d, &normal_w, rng);
            LatentState::gaussian(z, w)
        }
    }
}

fn draw_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    dist: &Normal<f64>,
    rng: &mut R,
) -> Array2<f64> {
    let mut m = Array2::zeros((rows, cols));
    for r in 0..rows {
        for c in 0..cols {
            m[[r, c]] = dist.sample(rng);
        }
    }
    m
}

fn append_prior_node<R: Rng + ?Sized>(
    state: &mut LatentState,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    match state.prior_kind() {
        PriorKind::Gaussian => {
            let normal_z = Normal::new(0.0, hyper.sigma_z_sq.sqrt())
                .map_err(|e| CoreError::InvalidArgument(e.to_string()))?;
            let col: Vec<f64> = (0..state.d()).map(|_| normal_z.sample(rng)).collect();
            state.append_gaussian_node(&col);
        }
        PriorKind::Crp => {
            // seat by the prior conditional given the current partition
            let mut sizes = vec![0usize; state.d()];
            for &a in state.assignments().expect("CRP state") {
                sizes[a] += 1;
            }
            let denom = state.n_nodes() as f64 + hyper.alpha_crp;
            let target = rng.random::<f64>() * denom;
            let mut acc = 0.0;
            let mut chosen = sizes.len();
            for (k, &m) in sizes.iter().enumerate() {
                acc += m as f64;
                if target < acc {
                    chosen = k;
                    break;
                }
            }
            if chosen == sizes.len() {
                let normal_w = Normal::new(0.0, hyper.sigma_w_sq.sqrt())
                    .map_err(|e| CoreError::InvalidArgument(e.to_string()))?;
                let k = state.d();
                let new_row: Vec<f64> = (0..k).map(|_| normal_w.sample(rng)).collect();
                let new_col: Vec<f64> = (0..k).map(|_| normal_w.sample(rng)).collect();
                let corner = normal_w.sample(rng);
                state.add_crp_class(&new_row, &new_col, corner);
            }
            state.append_crp_node(chosen);
        }
    }
    Ok(())
}

/// Runs a full chain: sequential initialization, burn-in, then `n_samples`
/// retained draws at the configured thinning. Fully reproducible from the
/// seed.
pub fn run_chain(
    data: &CountMatrix,
    hyper: &Hyperparams,
    cfg: &ChainConfig,
) -> Result<Vec<Sample>> {
    hyper.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let smoothing = SmoothingScheme::from_train(hyper.alpha_dcm, data)?;
    let mut state = sequential_initialize(data, &smoothing, hyper, cfg, &mut rng)?;
    for _ in 0..cfg.burn_in {
        mcmc_step(&mut state, data, &smoothing, hyper, &cfg.slice, &mut rng)?;
    }
    let mut samples = Vec::with_capacity(cfg.n_samples);
    while samples.len() < cfg.n_samples {
        let mut seconds = 0.0;
        let mut last = None;
        for _ in 0..cfg.thin {
            let diag = mcmc_step(&mut state, data, &smoothing, hyper, &cfg.slice, &mut rng)?;
            seconds += diag.seconds;
            last = Some(diag);
        }
        let diag = last.expect("thin >= 1");
        samples.push(Sample {
            state: state.canonicalized(),
            train_log_lik: diag.train_log_lik,
            log_posterior: diag.log_posterior,
            seconds_elapsed: seconds,
            dims: diag.dims,
        });
    }
    Ok(samples)
}
