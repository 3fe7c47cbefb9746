use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use har_core::dataset::{
    filter_activities, generate_synthetic, load_pamap2_dir, read_dataset, write_dataset, ActivitySet,
    LabeledSignal,
};
use har_core::experiment::{
    run_sweep, train_single, Normalization, SingleRunConfig, SweepConfig, SweepReport,
};
use har_core::nn::{save_model, TrainConfig};
use har_core::preprocess::{
    compute_stats_segments, normalize_segments, segment, write_samples, WindowSpec,
};
use har_core::report::{write_boxplot_svg, write_report_csv, Metric};
use har_core::{HarError, Result};

const DATA_DIR_ENV: &str = "HAR_DATA_DIR";

#[derive(Parser)]
#[command(name = "har", version, about = "Observation-window study for inertial activity recognition")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and repair PAMAP2 protocol files into a dataset file
    Ingest(IngestArgs),
    /// Generate the seeded synthetic dataset
    Synth(SynthArgs),
    /// Train one model on a single held-out split
    Train(TrainArgs),
    /// Cross-validate every window size and write the report
    Sweep(SweepArgs),
    /// Re-render CSV and SVG files from a stored report
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file written by `ingest` or `synth`
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Directory of PAMAP2 subjectNNN.dat files (falls back to $HAR_DATA_DIR)
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Restrict to these subject ids
    #[arg(long, value_delimiter = ',')]
    subjects: Option<Vec<i64>>,
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    lr: f64,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    batch: u64,
    #[arg(long, default_value_t = 100)]
    patience: usize,
    #[arg(long, default_value_t = 3000, value_parser = clap::value_parser!(u64).range(1..))]
    max_epochs: u64,
    /// Normalize with statistics from each training split only
    #[arg(long)]
    per_fold_norm: bool,
}

impl HyperArgs {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch as usize,
            max_epochs: self.max_epochs as usize,
            patience: self.patience,
            seed: self.seed,
            lr: self.lr,
        }
    }

    fn normalization(&self) -> Normalization {
        if self.per_fold_norm {
            Normalization::PerFold
        } else {
            Normalization::Global
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Output dataset file
    #[arg(long)]
    out: PathBuf,
    /// Also write normalized windows of this duration (seconds) here
    #[arg(long, requires = "window")]
    samples_out: Option<PathBuf>,
    #[arg(long, value_parser = positive_f64)]
    window: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    per_class: u64,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(2..))]
    segment_len: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Window duration in seconds
    #[arg(long, default_value_t = 0.5, value_parser = positive_f64)]
    window: f64,
    /// Override the kernel sizes, e.g. 7,11
    #[arg(long, value_delimiter = ',', num_args = 2)]
    kernels: Option<Vec<usize>>,
    /// Hold out one of this many stratified folds
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    holdout_folds: u64,
    /// Write a JSON summary here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save the best model here
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Window durations in seconds
    #[arg(long, value_delimiter = ',', value_parser = positive_f64,
          default_value = "0.1,0.25,0.5,1,2,4")]
    windows: Vec<f64>,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    /// Early-stop on 10% of the training folds instead of the test fold
    #[arg(long)]
    honest_split: bool,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = "sweep-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// report.json written by `sweep`
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} must be a positive number"))
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ValueValidation, msg)
        .exit()
}

fn check_hyper(h: &HyperArgs) {
    if h.patience as u64 > h.max_epochs {
        usage_error(format!(
            "--patience ({}) must not exceed --max-epochs ({})",
            h.patience, h.max_epochs
        ));
    }
}

fn load_data(args: &DataArgs) -> Result<Vec<LabeledSignal>> {
    if let Some(path) = &args.dataset {
        let mut data = read_dataset(path)?;
        if let Some(subjects) = &args.subjects {
            data.retain(|s| subjects.contains(&s.subject_id));
        }
        return Ok(data);
    }
    let dir = args
        .data_dir
        .clone()
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| {
            HarError::InvalidArgument(format!(
                "no data: pass --dataset or --data-dir, or set {DATA_DIR_ENV}"
            ))
        })?;
    load_pamap2_dir(&dir, args.subjects.as_deref())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| HarError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarError::io(dir, e))
}

fn ingest(args: &IngestArgs) -> Result<()> {
    let data = load_data(&args.data)?;
    write_dataset(&args.out, &data)?;
    log::info!("wrote {} signals to {}", data.len(), args.out.display());
    if let (Some(path), Some(window)) = (&args.samples_out, args.window) {
        let acts = ActivitySet::locomotion();
        let mut segments: Vec<_> = data.iter().flat_map(|s| filter_activities(s, &acts)).collect();
        let stats = compute_stats_segments(&segments)?;
        normalize_segments(&mut segments, &stats);
        let samples = segment(&segments, &WindowSpec::from_seconds(window)?);
        write_samples(path, &samples)?;
        log::info!("wrote {} windows to {}", samples.len(), path.display());
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let sig = generate_synthetic(args.seed, args.per_class as usize, args.segment_len as usize)?;
    write_dataset(&args.out, std::slice::from_ref(&sig))?;
    log::info!("wrote {} synthetic timesteps to {}", sig.len(), args.out.display());
    Ok(())
}

fn train_cmd(args: &TrainArgs) -> Result<()> {
    check_hyper(&args.hyper);
    let data = load_data(&args.data)?;
    let cfg = SingleRunConfig {
        window_sec: args.window,
        kernels: args.kernels.as_ref().map(|k| [k[0], k[1]]),
        holdout_folds: args.holdout_folds as usize,
        seed: args.hyper.seed,
        train: args.hyper.train_config(),
        normalization: args.hyper.normalization(),
    };
    let run = train_single(&data, &cfg)?;
    log::info!(
        "best epoch {} of {}: held-out accuracy {:.4}, loss {:.4}",
        run.epochs_to_best,
        run.epochs_run,
        run.holdout_accuracy,
        run.holdout_loss
    );
    if let Some(path) = &args.out {
        write_json(path, &run)?;
    }
    if let (Some(path), Some(model)) = (&args.checkpoint, &run.model) {
        save_model(path, model)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    version: &'a str,
    seed: u64,
    fingerprint: &'a str,
    config: &'a SweepConfig,
    elapsed_sec: f64,
}

fn render_outputs(report: &SweepReport, out_dir: &Path) -> Result<()> {
    create_dir(out_dir)?;
    write_report_csv(report, &out_dir.join("sweep.csv"))?;
    for metric in [Metric::Accuracy, Metric::Loss, Metric::Epochs] {
        let path = out_dir.join(format!("{}.svg", metric.file_stem()));
        write_boxplot_svg(&metric.distributions(report), metric.label(), &path)?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    check_hyper(&args.hyper);
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| HarError::InvalidArgument(e.to_string()))?;
    }
    let data = load_data(&args.data)?;
    let cfg = SweepConfig {
        windows: args.windows.clone(),
        folds: args.folds as usize,
        seed: args.hyper.seed,
        train: args.hyper.train_config(),
        honest_split: args.honest_split,
        normalization: args.hyper.normalization(),
        parallel: args.threads != 1,
    };
    let started = Instant::now();
    let report = run_sweep(&data, &cfg)?;
    let elapsed_sec = started.elapsed().as_secs_f64();

    create_dir(&args.out_dir)?;
    let json_path = args.out_dir.join("report.json");
    std::fs::write(&json_path, report.to_json()? + "\n").map_err(|e| HarError::io(&json_path, e))?;
    write_json(
        &args.out_dir.join("report.meta.json"),
        &SweepMeta {
            version: env!("CARGO_PKG_VERSION"),
            seed: report.seed,
            fingerprint: &report.fingerprint,
            config: &report.config,
            elapsed_sec,
        },
    )?;
    render_outputs(&report, &args.out_dir)?;
    for row in &report.rows {
        match (&row.metrics, &row.failure) {
            (Some(m), _) => log::info!(
                "{} s: accuracy {:.2}% (sd {:.2}), loss {:.3}, epochs {:.1}",
                row.window_sec,
                m.acc_mean * 100.0,
                m.acc_std * 100.0,
                m.loss_mean,
                m.epochs_mean
            ),
            (None, Some(why)) => log::warn!("{} s: failed: {why}", row.window_sec),
            (None, None) => {}
        }
    }
    Ok(())
}

fn report_cmd(args: &ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.report).map_err(|e| HarError::io(&args.report, e))?;
    let report = SweepReport::from_json(&text)?;
    render_outputs(&report, &args.out_dir)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::Train(a) => train_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
