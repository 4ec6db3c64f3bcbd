//! The run pipeline: ingest, split, chain, evaluate, persist. Every stage
//! failure is tagged and any partially written artifacts are removed.

use std::path::{Path, PathBuf};

use countnet_core::{
    evaluate, run_chain, split_interactions, split_pairs, test_log_likelihood, ChainConfig,
    CountMatrix, HoldoutScheme, HoldoutSplit, Hyperparams, InitSchedule, PriorKind,
    Sample, SmoothingScheme,
};

use crate::error::{CliError, Result, StageContext};
use crate::formats::{
    self, load_counts, read_matrix, read_samples, read_trace_seconds, split_fingerprint,
    write_matrix, write_predicted, write_report, write_samples, write_trace, InputFormat,
    ReportDoc, RunMeta, TraceRow,
};

/// One full run request, as assembled from the command line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: PriorKind,
    pub dim: Option<usize>,
    pub alpha_crp: f64,
    pub sigma_z_sq: f64,
    pub sigma_w_sq: f64,
    pub alpha_dcm: f64,
    pub mc_samples: usize,
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub holdout: Option<HoldoutScheme>,
    pub train_fraction: f64,
    pub symmetric: bool,
    pub rescale_factor: f64,
    pub batch_size: usize,
    pub init_iters: usize,
    pub format: InputFormat,
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub chains: usize,
}

impl RunConfig {
    pub fn new(model: PriorKind, input: PathBuf, out_dir: PathBuf) -> Self {
        let init = InitSchedule::default();
        Self {
            model,
            dim: None,
            alpha_crp: 1.0,
            sigma_z_sq: 1.0,
            sigma_w_sq: 1.0,
            alpha_dcm: 1.0,
            mc_samples: 10,
            n_samples: 100,
            burn_in: 0,
            thin: 1,
            seed: 0,
            holdout: None,
            train_fraction: 0.8,
            symmetric: false,
            rescale_factor: init.rescale_factor,
            batch_size: init.batch_size_max,
            init_iters: init.iterations_per_batch,
            format: InputFormat::EdgeList,
            input,
            out_dir,
            chains: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model == PriorKind::Gaussian && self.dim.is_none() {
            return Err(CliError::stage(
                "config",
                "--dim is required for the gaussian model",
            ));
        }
        if self.model == PriorKind::Crp && self.dim.is_some() {
            return Err(CliError::stage(
                "config",
                "--dim applies only to the gaussian model",
            ));
        }
        if self.holdout.is_some() && !(0.0 < self.train_fraction && self.train_fraction < 1.0) {
            return Err(CliError::stage(
                "config",
                format!(
                    "--train-fraction must lie in (0, 1), got {}",
                    self.train_fraction
                ),
            ));
        }
        if self.chains < 1 {
            return Err(CliError::stage("config", "--chains must be >= 1"));
        }
        Ok(())
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            alpha_crp: self.alpha_crp,
            sigma_z_sq: self.sigma_z_sq,
            sigma_w_sq: self.sigma_w_sq,
            alpha_dcm: self.alpha_dcm,
            d_gaussian: self.dim.unwrap_or(1),
            mc_new_class_samples: self.mc_samples,
        }
    }

    fn chain_config(&self, seed: u64) -> ChainConfig {
        let mut cfg = ChainConfig::new(self.model, self.n_samples, seed);
        cfg.burn_in = self.burn_in;
        cfg.thin = self.thin;
        cfg.init = InitSchedule {
            batch_size_max: self.batch_size,
            iterations_per_batch: self.init_iters,
            rescale_factor: self.rescale_factor,
            initial_nodes: 2,
        };
        cfg
    }
}

/// Paths of everything one chain wrote.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub data_path: PathBuf,
    pub train_path: PathBuf,
    pub test_path: Option<PathBuf>,
    pub samples_path: PathBuf,
    pub report_path: PathBuf,
    pub trace_path: PathBuf,
    pub predicted_path: PathBuf,
    pub report: ReportDoc,
}

/// Removes everything this run created if a later stage fails.
struct PartialOutputs {
    created: Vec<PathBuf>,
    keep: bool,
}

impl PartialOutputs {
    fn new() -> Self {
        Self {
            created: Vec::new(),
            keep: false,
        }
    }

    fn track(&mut self, path: &Path) -> PathBuf {
        self.created.push(path.to_path_buf());
        path.to_path_buf()
    }
}

impl Drop for PartialOutputs {
    fn drop(&mut self) {
        if !self.keep {
            for path in &self.created {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}

/// Runs `fit` for every requested chain. Chain `i` samples with seed
/// `seed + i` in `out/chain-<i>`; a single chain writes directly to `out`.
pub fn run(config: &RunConfig) -> Result<Vec<RunArtifacts>> {
    config.validate()?;
    if config.chains == 1 {
        return Ok(vec![run_single(config, config.seed, &config.out_dir)?]);
    }
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chain in 0..config.chains {
            let out_dir = config.out_dir.join(format!("chain-{chain}"));
            let seed = config.seed + chain as u64;
            handles.push(scope.spawn(move || run_single(config, seed, &out_dir)));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

fn run_single(config: &RunConfig, chain_seed: u64, out_dir: &Path) -> Result<RunArtifacts> {
    // ingest
    let (data, labels) = load_counts(&config.input, config.format, config.symmetric)?;

    // split (the split itself always derives from the config seed so every
    // chain of a multi-chain run scores against the same holdout)
    let split = match config.holdout {
        Some(HoldoutScheme::Interactions) => {
            Some(split_interactions(&data, config.train_fraction, config.seed).at_stage("split")?)
        }
        Some(HoldoutScheme::NodePairs) => {
            Some(split_pairs(&data, config.train_fraction, config.seed).at_stage("split")?)
        }
        None => None,
    };
    let train = split.as_ref().map_or(&data, |s| &s.train);
    let fingerprint = split_fingerprint(
        &data,
        config.holdout,
        config.holdout.map(|_| config.train_fraction),
        config.seed,
    );

    // chain
    let hyper = config.hyperparams();
    let chain_cfg = config.chain_config(chain_seed);
    let samples = run_chain(train, &hyper, &chain_cfg).at_stage("chain")?;
    let smoothing = SmoothingScheme::from_train(hyper.alpha_dcm, train).at_stage("chain")?;

    // evaluate
    let eval = match &split {
        Some(split) => Some(evaluate(&samples, split, &smoothing).at_stage("evaluate")?),
        None => None,
    };
    let per_sample_test_ll = match &split {
        Some(split) => samples
            .iter()
            .map(|s| {
                test_log_likelihood(std::slice::from_ref(s), &split.test, &smoothing)
                    .at_stage("evaluate")
                    .map(Some)
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![None; samples.len()],
    };

    // persist
    std::fs::create_dir_all(out_dir).at_stage("persist")?;
    let mut outputs = PartialOutputs::new();
    let meta = RunMeta {
        model: config.model,
        n_nodes: data.n_nodes(),
        symmetric: data.is_symmetric(),
        hyper: hyper.clone(),
        k_seen: smoothing.k_seen(),
        seed: chain_seed,
        holdout: config.holdout,
        train_fraction: config.holdout.map(|_| config.train_fraction),
        fingerprint: fingerprint.clone(),
    };

    let data_path = outputs.track(&out_dir.join("data.matrix"));
    write_matrix(&data_path, &data, &labels)?;
    let train_path = outputs.track(&out_dir.join("train.matrix"));
    write_matrix(&train_path, train, &labels)?;
    let test_path = match &split {
        Some(split) => {
            let p = outputs.track(&out_dir.join("test.matrix"));
            write_matrix(&p, &split.test, &labels)?;
            Some(p)
        }
        None => None,
    };

    let samples_path = outputs.track(&out_dir.join("samples.txt"));
    write_samples(&samples_path, &meta, &samples)?;

    let trace_rows: Vec<TraceRow> = samples
        .iter()
        .zip(&per_sample_test_ll)
        .enumerate()
        .map(|(idx, (s, test_ll))| TraceRow {
            sample_index: idx,
            train_ll: s.train_log_lik,
            test_ll: *test_ll,
            dims: s.dims,
            seconds: s.seconds_elapsed,
        })
        .collect();
    let trace_path = outputs.track(&out_dir.join("trace.txt"));
    write_trace(&trace_path, &trace_rows)?;

    let predicted_path = outputs.track(&out_dir.join("predicted.txt"));
    let grid = predicted_grid(&samples, &smoothing, train).at_stage("persist")?;
    write_predicted(&predicted_path, data.n_nodes(), &grid)?;

    let n = samples.len() as f64;
    let doc = ReportDoc {
        meta,
        n_samples: samples.len(),
        train_ll_mean: samples.iter().map(|s| s.train_log_lik).sum::<f64>() / n,
        mean_dims: samples.iter().map(|s| s.dims as f64).sum::<f64>() / n,
        sec_per_sample: samples.iter().map(|s| s.seconds_elapsed).sum::<f64>() / n,
        eval,
    };
    let report_path = outputs.track(&out_dir.join("report.txt"));
    write_report(&report_path, &doc)?;

    outputs.keep = true;
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        data_path,
        train_path,
        test_path,
        samples_path,
        report_path,
        trace_path,
        predicted_path,
        report: doc,
    })
}

/// Posterior-predictive probability for every ordered cell; symmetric data
/// mirrors the canonical upper-triangle value onto `(j, i)`.
pub fn predicted_grid(
    samples: &[Sample],
    smoothing: &SmoothingScheme,
    train: &CountMatrix,
) -> countnet_core::Result<Vec<f64>> {
    let n = train.n_nodes();
    let universe: Vec<_> = train.universe().collect();
    let probs = countnet_core::predictive_probs(samples, smoothing, &universe, &universe)?;
    let mut grid = vec![0.0; n * n];
    for (&(i, j), &p) in universe.iter().zip(&probs) {
        grid[i * n + j] = p;
        if train.is_symmetric() {
            grid[j * n + i] = p;
        }
    }
    Ok(grid)
}

/// Re-derives the evaluation report from persisted artifacts.
pub fn evaluate_artifacts(dir: &Path) -> Result<ReportDoc> {
    let (meta, mut samples) = read_samples(&dir.join("samples.txt"))?;
    if samples.is_empty() {
        return Err(CliError::stage("evaluate", "samples file holds no samples"));
    }
    let (train, _) = read_matrix(&dir.join("train.matrix"))?;
    let seconds = read_trace_seconds(&dir.join("trace.txt")).unwrap_or_default();
    for (sample, sec) in samples.iter_mut().zip(&seconds) {
        sample.seconds_elapsed = *sec;
    }
    let smoothing =
        SmoothingScheme::new(meta.hyper.alpha_dcm, meta.k_seen).at_stage("evaluate")?;
    let eval = match meta.holdout {
        Some(scheme) => {
            let (test, _) = read_matrix(&dir.join("test.matrix"))?;
            let split = HoldoutSplit {
                train: train.clone(),
                test,
                scheme,
                train_fraction: meta.train_fraction.unwrap_or(0.8),
            };
            Some(evaluate(&samples, &split, &smoothing).at_stage("evaluate")?)
        }
        None => None,
    };
    let n = samples.len() as f64;
    Ok(ReportDoc {
        n_samples: samples.len(),
        train_ll_mean: samples.iter().map(|s| s.train_log_lik).sum::<f64>() / n,
        mean_dims: samples.iter().map(|s| s.dims as f64).sum::<f64>() / n,
        sec_per_sample: samples.iter().map(|s| s.seconds_elapsed).sum::<f64>() / n,
        meta,
        eval,
    })
}

/// Recomputes the dense predictive grid from persisted samples and writes
/// it to `out` (defaults to `predicted.txt` in the artifact directory).
pub fn predict_artifacts(dir: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let (meta, samples) = read_samples(&dir.join("samples.txt"))?;
    if samples.is_empty() {
        return Err(CliError::stage("predict", "samples file holds no samples"));
    }
    let (train, _) = read_matrix(&dir.join("train.matrix"))?;
    let smoothing =
        SmoothingScheme::new(meta.hyper.alpha_dcm, meta.k_seen).at_stage("predict")?;
    let grid = predicted_grid(&samples, &smoothing, &train).at_stage("predict")?;
    let target = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join("predicted.txt"));
    write_predicted(&target, train.n_nodes(), &grid)?;
    Ok(target)
}

/// Writes train/test matrices for a standalone `split` invocation.
pub fn split_to_dir(
    input: &Path,
    format: InputFormat,
    symmetric: bool,
    scheme: HoldoutScheme,
    train_fraction: f64,
    seed: u64,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let (data, labels) = load_counts(input, format, symmetric)?;
    let split = match scheme {
        HoldoutScheme::Interactions => {
            split_interactions(&data, train_fraction, seed).at_stage("split")?
        }
        HoldoutScheme::NodePairs => split_pairs(&data, train_fraction, seed).at_stage("split")?,
    };
    std::fs::create_dir_all(out_dir).at_stage("persist")?;
    let mut outputs = PartialOutputs::new();
    let train_path = outputs.track(&out_dir.join("train.matrix"));
    write_matrix(&train_path, &split.train, &labels)?;
    let test_path = outputs.track(&out_dir.join("test.matrix"));
    write_matrix(&test_path, &split.test, &labels)?;
    outputs.keep = true;
    Ok((train_path, test_path))
}

/// Formats two persisted reports side by side, in the order
/// dimensions, seconds per sample, rank correlation (p), distance
/// correlation, held-out log-likelihood. Refuses reports from different
/// splits.
pub fn compare(path_a: &Path, path_b: &Path) -> Result<String> {
    let a = formats::read_report(path_a)?;
    let b = formats::read_report(path_b)?;
    if a.meta.fingerprint != b.meta.fingerprint {
        return Err(CliError::stage(
            "compare",
            format!(
                "reports come from different splits ({} vs {})",
                a.meta.fingerprint, b.meta.fingerprint
            ),
        ));
    }
    let mut out = String::new();
    let header = [
        "Held out",
        "Model",
        "Dimens.",
        "sec/sample",
        "Kendall's tau (p value)",
        "dcor",
        "test ll",
    ];
    let rows: Vec<[String; 7]> = [&a, &b].iter().map(|doc| compare_row(doc)).collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut push_row = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    push_row(&header.map(str::to_string));
    for row in &rows {
        push_row(row);
    }
    Ok(out)
}

fn compare_row(doc: &ReportDoc) -> [String; 7] {
    let held_out = match doc.meta.holdout {
        Some(HoldoutScheme::Interactions) => "Interactions",
        Some(HoldoutScheme::NodePairs) => "Pairings",
        None => "none",
    };
    match &doc.eval {
        Some(eval) => [
            held_out.to_string(),
            formats::model_name(doc.meta.model).to_string(),
            format!("{:.1}", doc.mean_dims),
            format!("{:.3}", doc.sec_per_sample),
            format!("{:.4} ({:.3e})", eval.kendall_tau, eval.tau_p_value),
            format!("{:.4}", eval.dcor),
            format!("{:.2}", eval.test_log_lik),
        ],
        None => [
            held_out.to_string(),
            formats::model_name(doc.meta.model).to_string(),
            format!("{:.1}", doc.mean_dims),
            format!("{:.3}", doc.sec_per_sample),
            "-".to_string(),
            "-".to_string(),
            "-".to_string(),
        ],
    }
}
