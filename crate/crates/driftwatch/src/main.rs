//! Command-line shell over the `driftwatch` library.
//!
//! Exit codes for `detect` and `fuse detect`: 0 when no drift is flagged,
//! 10 when drift is flagged, 1 on any error. The other subcommands use the
//! usual 0/1.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use driftwatch::config::{load_config_file, select_approaches};
use driftwatch::harness::{
    bench_to_text, default_ratio_grid, null_feature_sample, run_budget_bench,
    run_problem1_experiment, run_problem2_experiment, run_ratio_sweep, train_fusion_model,
    FusionLayout,
};
use driftwatch::model_store::{load_model, save_model};
use driftwatch::report::{emit_accuracy, emit_report};
use driftwatch::{load_dataset, ExperimentConfig, OutputFormat};
use driftwatch_core::detectors::{detect, FeatureOutput, FeaturePipeline};
use driftwatch_core::fusion::{calibrate_threshold, classifier_detect};
use driftwatch_core::scenario::RngSeed;
use driftwatch_core::{DetectionTriplet, DetectorConfig, DistanceMetric, FusionKind};

const EXIT_DRIFT: u8 = 10;

#[derive(Parser)]
#[command(name = "driftwatch", version, about = "Distribution drift detection on unlabeled data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one detector over three CSV windows and print a JSON report.
    Detect(DetectArgs),
    /// Monte-Carlo scenario grids with synthetic Gaussian data.
    Simulate(SimulateArgs),
    /// Detection rates across k-by-n splits of a fixed row budget.
    SweepRatio(SweepRatioArgs),
    /// Timing probes and fitted scaling exponents for the batched detectors.
    Bench(BenchArgs),
    /// Train or apply detector-fusion models.
    #[command(subcommand)]
    Fuse(FuseCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Batched distances with a paired test.
    Bd,
    /// Pooled distance with a permutation test.
    Pt,
    /// Per-dimension two-sample screen with a corrected threshold.
    Ksbc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Emd,
    Mmd,
    Kl,
}

#[derive(Args)]
struct DetectArgs {
    /// Training window CSV.
    #[arg(long)]
    train: PathBuf,
    /// Reference window CSV.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Detection window CSV.
    #[arg(long)]
    det: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Distance metric; required for bd and pt.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Number of batches per window; required for bd and pt.
    #[arg(long)]
    n: Option<usize>,
    /// Rows per batch; required for bd and pt.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Kernel bandwidth override (default: median heuristic on train+ref).
    #[arg(long)]
    sigma: Option<f64>,
    /// Neighbour order of the divergence estimator.
    #[arg(long, default_value_t = 1)]
    kl_order: usize,
    /// Shuffle rounds for the permutation test.
    #[arg(long, default_value_t = 100)]
    permutations: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args, Default)]
struct SimulateArgs {
    /// TOML experiment file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment selector: 1 = detector grid, 2 = fusion comparison.
    #[arg(long)]
    problem: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid cell.
    #[arg(long)]
    simulations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Data dimensionality.
    #[arg(long)]
    dims: Option<usize>,
    /// Shrink the corrected-screen row budget and its mean grid.
    #[arg(long)]
    fast: bool,
    /// Add mean wall-clock columns (omitted by default so reruns are
    /// byte-identical).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Output formats: csv, json, plotdata. Repeatable.
    #[arg(long = "format")]
    formats: Vec<String>,
    /// Comma-separated approach names for the detector grid.
    #[arg(long, value_delimiter = ',')]
    approaches: Vec<String>,
}

#[derive(Args)]
struct SweepRatioArgs {
    /// Fixed per-window row budget split as k x n.
    #[arg(long, default_value_t = 5000)]
    total: usize,
    /// Splits as k:n pairs, e.g. 50:100. Defaults to the standard grid.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<String>,
    #[command(flatten)]
    common: SimulateArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum FuseCommand {
    /// Fit a fusion model on a synthetic prior mix and save it.
    Train(FuseTrainArgs),
    /// Load a model and run it on three CSV windows.
    Detect(FuseDetectArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Avg,
    Pl,
    Lr,
    Knn,
    Mlp,
}

impl KindArg {
    fn fusion_kind(self) -> FusionKind {
        match self {
            KindArg::Avg => FusionKind::Avg,
            KindArg::Pl => FusionKind::Pl,
            KindArg::Lr => FusionKind::Lr,
            KindArg::Knn => FusionKind::Knn,
            KindArg::Mlp => FusionKind::Mlp,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    /// Detector p-values (all five kinds).
    PValues,
    /// Raw detector statistics (lr, knn, mlp only).
    Statistics,
}

#[derive(Args)]
struct FuseTrainArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "p-values")]
    output: OutputArg,
    /// Where to write the model file.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    dims: usize,
    /// Batches per window during feature extraction.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Rows per batch.
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Decision threshold override (defaults to the per-kind standard).
    #[arg(long)]
    threshold: Option<f64>,
    /// Calibrate the threshold to this null rejection rate on fresh null
    /// features; overrides --threshold. Classifier kinds only.
    #[arg(long)]
    calibrate_fpr: Option<f64>,
    /// Null examples drawn for calibration.
    #[arg(long, default_value_t = 100)]
    calibrate_trials: usize,
}

#[derive(Args)]
struct FuseDetectArgs {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Training window CSV.
    #[arg(long)]
    train: PathBuf,
    /// Reference window CSV.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Detection window CSV.
    #[arg(long)]
    det: PathBuf,
    /// Batches per window during feature extraction.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Rows per batch.
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Detect(args) => run_detect(args),
        Command::Simulate(args) => run_simulate(args).map(|_| 0),
        Command::SweepRatio(args) => run_sweep_ratio(args).map(|_| 0),
        Command::Bench(args) => {
            let report = run_budget_bench(RngSeed(args.seed))?;
            print!("{}", bench_to_text(&report));
            Ok(0)
        }
        Command::Fuse(FuseCommand::Train(args)) => run_fuse_train(args).map(|_| 0),
        Command::Fuse(FuseCommand::Detect(args)) => run_fuse_detect(args),
    }
}

fn load_triplet(train: &PathBuf, reference: &PathBuf, det: &PathBuf) -> anyhow::Result<DetectionTriplet> {
    let training = load_dataset(train)?;
    let reference = load_dataset(reference)?;
    let detection = load_dataset(det)?;
    Ok(DetectionTriplet::new(training, reference, detection)?)
}

fn run_detect(args: DetectArgs) -> anyhow::Result<u8> {
    let detector = match args.method {
        MethodArg::Ksbc => DetectorConfig::ks_bc(args.alpha),
        method => {
            let metric = match args.metric {
                Some(MetricArg::Emd) => DistanceMetric::emd(),
                Some(MetricArg::Mmd) => match args.sigma {
                    Some(sigma) => DistanceMetric::mmd_with_sigma(sigma),
                    None => DistanceMetric::mmd(),
                },
                Some(MetricArg::Kl) => DistanceMetric::kl_with_order(args.kl_order),
                None => bail!("--metric is required for this method"),
            };
            let (Some(n), Some(k)) = (args.n, args.k) else {
                bail!("--n and --k are required for this method");
            };
            match method {
                MethodArg::Bd => DetectorConfig::bd(metric, n, k, args.alpha),
                _ => DetectorConfig::pt(metric, n, k, args.alpha)
                    .with_permutations(args.permutations),
            }
        }
    };
    let triplet = load_triplet(&args.train, &args.reference, &args.det)?;
    let report = detect(&triplet, &detector, RngSeed(args.seed))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.drift_detected { EXIT_DRIFT } else { 0 })
}

/// Defaults, then the config file, then explicit flags — later layers win.
fn build_config(args: &SimulateArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let file = load_config_file(path)?;
        cfg.apply_file(&file)?;
    }
    if let Some(problem) = args.problem {
        cfg.problem = problem;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(simulations) = args.simulations {
        cfg.simulations = simulations;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(dims) = args.dims {
        cfg.dims = dims;
    }
    if args.fast {
        cfg.fast = true;
    }
    if args.timings {
        cfg.timings = true;
    }
    if let Some(dir) = &args.output_dir {
        cfg.output_dir = dir.clone();
    }
    if !args.formats.is_empty() {
        cfg.formats = args
            .formats
            .iter()
            .map(|f| OutputFormat::parse(f))
            .collect::<driftwatch::Result<Vec<_>>>()?;
    }
    if !args.approaches.is_empty() {
        cfg.approaches = select_approaches(&args.approaches)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_written(paths: &[PathBuf]) {
    for path in paths {
        println!("{}", path.display());
    }
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let cfg = build_config(&args)?;
    match cfg.problem {
        1 => {
            let table = run_problem1_experiment(&cfg)?;
            let written = emit_report(&table, &cfg.formats, &cfg.output_dir, "problem1", cfg.timings)?;
            print_written(&written);
        }
        2 => {
            let (table, accuracy) = run_problem2_experiment(&cfg)?;
            let mut written =
                emit_report(&table, &cfg.formats, &cfg.output_dir, "problem2", cfg.timings)?;
            written.extend(emit_accuracy(
                &accuracy,
                &cfg.formats,
                &cfg.output_dir,
                "problem2-accuracy",
            )?);
            print_written(&written);
        }
        other => bail!("unknown problem selector {other}; expected 1 or 2"),
    }
    Ok(())
}

fn parse_ratios(specs: &[String]) -> anyhow::Result<Vec<(usize, usize)>> {
    specs
        .iter()
        .map(|s| {
            let (k, n) = s
                .split_once(':')
                .with_context(|| format!("ratio `{s}` is not of the form k:n"))?;
            Ok((
                k.trim().parse().with_context(|| format!("bad k in `{s}`"))?,
                n.trim().parse().with_context(|| format!("bad n in `{s}`"))?,
            ))
        })
        .collect()
}

fn run_sweep_ratio(args: SweepRatioArgs) -> anyhow::Result<()> {
    let cfg = build_config(&args.common)?;
    let ratios = if args.ratios.is_empty() {
        default_ratio_grid()
    } else {
        parse_ratios(&args.ratios)?
    };
    let table = run_ratio_sweep(args.total, &ratios, &cfg)?;
    let written = emit_report(&table, &cfg.formats, &cfg.output_dir, "ratio-sweep", cfg.timings)?;
    print_written(&written);
    Ok(())
}

fn run_fuse_train(args: FuseTrainArgs) -> anyhow::Result<()> {
    let kind = args.kind.fusion_kind();
    let output = match args.output {
        OutputArg::PValues => FeatureOutput::PValues,
        OutputArg::Statistics => FeatureOutput::Statistics,
    };
    if output == FeatureOutput::Statistics && matches!(kind, FusionKind::Avg | FusionKind::Pl) {
        bail!("avg and pl consume p-values; use --output p-values");
    }
    if args.calibrate_fpr.is_some() && matches!(kind, FusionKind::Avg | FusionKind::Pl) {
        bail!("--calibrate-fpr applies to lr, knn, and mlp models only");
    }
    let cfg = ExperimentConfig {
        seed: args.seed,
        alpha: args.alpha,
        dims: args.dims,
        ..ExperimentConfig::default()
    };
    let layout = FusionLayout {
        n: args.n,
        k: args.k,
        ..FusionLayout::default()
    };
    let mut model = train_fusion_model(&cfg, layout, kind, output, args.threshold)?;
    if let Some(target) = args.calibrate_fpr {
        let nulls = null_feature_sample(&cfg, layout, output, args.calibrate_trials)?;
        model.threshold = calibrate_threshold(&model, &nulls, target)?;
    }
    save_model(&model, &args.model)?;
    println!(
        "saved {} model ({:?} features, threshold {}) to {}",
        kind,
        model.output_type,
        model.threshold,
        args.model.display()
    );
    Ok(())
}

fn run_fuse_detect(args: FuseDetectArgs) -> anyhow::Result<u8> {
    let model = load_model(&args.model)?;
    let triplet = load_triplet(&args.train, &args.reference, &args.det)?;
    let pipe = FeaturePipeline::new(args.n, args.k, args.alpha);
    let report = classifier_detect(&model, &triplet, &pipe, RngSeed(args.seed))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.drift_detected { EXIT_DRIFT } else { 0 })
}
