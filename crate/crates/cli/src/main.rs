use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use countnet_cli::runtime::{compare, evaluate_artifacts, predict_artifacts, run, split_to_dir};
use countnet_cli::{formats, InputFormat, RunConfig};
use countnet_core::{HoldoutScheme, PriorKind};

#[derive(Parser)]
#[command(
    name = "countnet",
    about = "Latent-variable models of weighted network interactions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Crp,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum HoldoutArg {
    Interactions,
    Pairs,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    EdgeList,
    PairCounts,
}

impl From<FormatArg> for InputFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::EdgeList => InputFormat::EdgeList,
            FormatArg::PairCounts => InputFormat::PairCounts,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Tab-separated count file
    #[arg(long)]
    input: PathBuf,
    /// Artifact directory
    #[arg(long)]
    out: PathBuf,
    /// Prior on node representations
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Representation dimension (gaussian model only)
    #[arg(long)]
    dim: Option<usize>,
    /// CRP concentration
    #[arg(long, default_value_t = 1.0)]
    alpha_crp: f64,
    /// Variance of the Gaussian prior on representation components
    #[arg(long, default_value_t = 1.0)]
    sigma_z: f64,
    /// Variance of the Gaussian prior on weight entries
    #[arg(long, default_value_t = 1.0)]
    sigma_w: f64,
    /// Total smoothing mass spread over seen node pairings
    #[arg(long, default_value_t = 1.0)]
    alpha_dcm: f64,
    /// Monte Carlo draws for the new-class likelihood estimate
    #[arg(long, default_value_t = 10)]
    mc_samples: usize,
    /// Retained posterior samples
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Discarded warm-up iterations
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    /// Keep every T-th iteration
    #[arg(long, default_value_t = 1)]
    thin: usize,
    /// Seed for all randomness in the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Holdout scheme
    #[arg(long, value_enum, default_value_t = HoldoutArg::None)]
    holdout: HoldoutArg,
    /// Fraction of data kept for training
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Treat the network as undirected
    #[arg(long)]
    symmetric: bool,
    /// Count multiplier per annealing stage during initialization
    #[arg(long, default_value_t = 2.0)]
    rescale_factor: f64,
    /// Nodes added per activation wave during initialization
    #[arg(long, default_value_t = 4)]
    batch_size: usize,
    /// MCMC iterations per activation wave and annealing stage
    #[arg(long, default_value_t = 2)]
    init_iters: usize,
    /// Input file layout
    #[arg(long, value_enum, default_value_t = FormatArg::EdgeList)]
    format: FormatArg,
    /// Independent seeded chains run concurrently
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run MCMC on a count file and persist samples, traces, and reports
    Fit(Box<FitArgs>),
    /// Split a count file into train/test matrices
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Holdout scheme (interactions or pairs)
        #[arg(long, value_enum)]
        holdout: HoldoutArg,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        symmetric: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::EdgeList)]
        format: FormatArg,
    },
    /// Recompute the evaluation report from persisted artifacts
    Evaluate {
        /// Artifact directory written by `fit`
        #[arg(long)]
        artifacts: PathBuf,
        /// Where to write the report (defaults to stdout only)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the dense predictive-probability grid from persisted samples
    Predict {
        /// Artifact directory written by `fit`
        #[arg(long)]
        artifacts: PathBuf,
        /// Output file (defaults to predicted.txt in the artifact dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print two reports side by side (requires matching splits)
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> countnet_cli::Result<()> {
    match command {
        Command::Fit(args) => {
            let model = match args.model {
                ModelArg::Crp => PriorKind::Crp,
                ModelArg::Gaussian => PriorKind::Gaussian,
            };
            let holdout = match args.holdout {
                HoldoutArg::Interactions => Some(HoldoutScheme::Interactions),
                HoldoutArg::Pairs => Some(HoldoutScheme::NodePairs),
                HoldoutArg::None => None,
            };
            let config = RunConfig {
                model,
                dim: args.dim,
                alpha_crp: args.alpha_crp,
                sigma_z_sq: args.sigma_z,
                sigma_w_sq: args.sigma_w,
                alpha_dcm: args.alpha_dcm,
                mc_samples: args.mc_samples,
                n_samples: args.samples,
                burn_in: args.burn_in,
                thin: args.thin,
                seed: args.seed,
                holdout,
                train_fraction: args.train_fraction,
                symmetric: args.symmetric,
                rescale_factor: args.rescale_factor,
                batch_size: args.batch_size,
                init_iters: args.init_iters,
                format: args.format.into(),
                input: args.input,
                out_dir: args.out,
                chains: args.chains,
            };
            for artifacts in run(&config)? {
                println!("wrote {}", artifacts.out_dir.display());
            }
            Ok(())
        }
        Command::Split {
            input,
            out,
            holdout,
            train_fraction,
            seed,
            symmetric,
            format,
        } => {
            let scheme = match holdout {
                HoldoutArg::Interactions => HoldoutScheme::Interactions,
                HoldoutArg::Pairs => HoldoutScheme::NodePairs,
                HoldoutArg::None => {
                    return Err(countnet_cli::CliError::stage(
                        "split",
                        "choose --holdout interactions or --holdout pairs",
                    ))
                }
            };
            let (train, test) = split_to_dir(
                &input,
                format.into(),
                symmetric,
                scheme,
                train_fraction,
                seed,
                &out,
            )?;
            println!("wrote {}", train.display());
            println!("wrote {}", test.display());
            Ok(())
        }
        Command::Evaluate { artifacts, out } => {
            let doc = evaluate_artifacts(&artifacts)?;
            if let Some(path) = &out {
                formats::write_report(path, &doc)?;
            }
            print!("{}", render_report(&doc));
            Ok(())
        }
        Command::Predict { artifacts, out } => {
            let path = predict_artifacts(&artifacts, out.as_deref())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Compare { report_a, report_b } => {
            print!("{}", compare(&report_a, &report_b)?);
            Ok(())
        }
    }
}

fn render_report(doc: &formats::ReportDoc) -> String {
    let mut out = String::new();
    out.push_str(&format!("model\t{}\n", formats::model_name(doc.meta.model)));
    out.push_str(&format!("n_samples\t{}\n", doc.n_samples));
    out.push_str(&format!("mean_dims\t{:.3}\n", doc.mean_dims));
    out.push_str(&format!("sec_per_sample\t{:.6}\n", doc.sec_per_sample));
    out.push_str(&format!("train_ll_mean\t{:.4}\n", doc.train_ll_mean));
    if let Some(eval) = &doc.eval {
        out.push_str(&format!("kendall_tau\t{:.4}\n", eval.kendall_tau));
        out.push_str(&format!("tau_p_value\t{:.4e}\n", eval.tau_p_value));
        out.push_str(&format!("dcor\t{:.4}\n", eval.dcor));
        out.push_str(&format!("test_log_lik\t{:.4}\n", eval.test_log_lik));
    }
    out
}
