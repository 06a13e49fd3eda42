//! Command-line front door: generate streams, oversample them, run the full
//! prediction pipeline, or export a trained tree.
//!
//! Exit codes: 0 ok, 1 usage error, 2 data error. Every flag can also be
//! set through a `BUILDCAST_`-prefixed environment variable.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDateTime;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use buildcast::datagen::{self, DistributionShift, GenSpec};
use buildcast::error::Error;
use buildcast::evaluation::DriftAction;
use buildcast::hoeffding::SplitConfig;
use buildcast::pipeline;
use buildcast::smote::{double_smote, Normalization, SmoteConfig};
use buildcast::stream::{parse_stream, serialize_csv, StreamSchema, DATE_FORMAT};
use buildcast::evaluation::RunConfig;

#[derive(Parser)]
#[command(
    name = "buildcast",
    version,
    about = "Stream mining for software build outcomes",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic build-metric stream CSV.
    Gen(GenArgs),
    /// Oversample a stream with two-pass SMOTE and write the augmented CSV.
    Smote(SmoteArgs),
    /// Full run: sort, oversample, evaluate prequentially, export artifacts.
    Pipeline(PipelineArgs),
    /// Train on a stream and export the decision tree (DOT + stats JSON).
    ExportTree(ExportTreeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Minmax,
    None,
}

impl From<NormalizationArg> for Normalization {
    fn from(arg: NormalizationArg) -> Self {
        match arg {
            NormalizationArg::Minmax => Normalization::MinMax,
            NormalizationArg::None => Normalization::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DriftActionArg {
    Record,
    ResetTree,
}

impl From<DriftActionArg> for DriftAction {
    fn from(arg: DriftActionArg) -> Self {
        match arg {
            DriftActionArg::Record => DriftAction::Record,
            DriftActionArg::ResetTree => DriftAction::ResetTree,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Output CSV path.
    #[arg(long, env = "BUILDCAST_OUT")]
    out: PathBuf,
    /// Total instances.
    #[arg(long, default_value_t = 199, env = "BUILDCAST_INSTANCES")]
    instances: usize,
    /// Successful builds among them.
    #[arg(long, default_value_t = 127, env = "BUILDCAST_SUCCESS")]
    success: usize,
    /// Failed builds among them.
    #[arg(long, default_value_t = 72, env = "BUILDCAST_FAILURE")]
    failure: usize,
    /// Class-mean separation in pooled standard deviations.
    #[arg(long, default_value_t = 1.0, env = "BUILDCAST_OVERLAP")]
    overlap: f64,
    /// Number of informative features (the rest are noise).
    #[arg(long, default_value_t = 5, env = "BUILDCAST_INFORMATIVE")]
    informative: usize,
    /// Index where the class distribution shifts.
    #[arg(long, env = "BUILDCAST_SHIFT_AT")]
    shift_at: Option<usize>,
    /// Post-shift success probability.
    #[arg(long, default_value_t = 0.75, env = "BUILDCAST_SHIFT_SUCCESS_PROB")]
    shift_success_prob: f64,
    #[arg(long, default_value_t = 0, env = "BUILDCAST_SEED")]
    seed: u64,
    /// First instance date, YYYY-MM-DDTHH:MM:SS.
    #[arg(long, default_value = "2013-01-01T00:00:00", env = "BUILDCAST_DATE_START")]
    date_start: String,
    /// Seconds between consecutive instances.
    #[arg(long, default_value_t = 3600, env = "BUILDCAST_DATE_STEP_SECS")]
    date_step_secs: i64,
}

#[derive(Args)]
struct SmoteArgs {
    /// Input CSV path.
    #[arg(long, env = "BUILDCAST_INPUT")]
    input: PathBuf,
    /// Output CSV path (includes provenance columns).
    #[arg(long, env = "BUILDCAST_OUT")]
    out: PathBuf,
    /// Oversampling amount per pass; multiple of 100. 0 is a no-op.
    #[arg(long, default_value_t = 900, env = "BUILDCAST_SMOTE_PERCENT")]
    smote_percent: u32,
    /// Neighbors considered per seed instance.
    #[arg(long, default_value_t = 5, env = "BUILDCAST_K")]
    k: usize,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Minmax, env = "BUILDCAST_NORMALIZATION")]
    normalization: NormalizationArg,
    #[arg(long, default_value_t = 0, env = "BUILDCAST_SEED")]
    seed: u64,
}

#[derive(Args)]
struct MiningArgs {
    /// Oversampling amount per pass; multiple of 100. 0 disables SMOTE.
    /// Defaults to 900 for `pipeline` and 0 for `export-tree`.
    #[arg(long, env = "BUILDCAST_SMOTE_PERCENT")]
    smote_percent: Option<u32>,
    /// Neighbors considered per seed instance.
    #[arg(long, default_value_t = 5, env = "BUILDCAST_K")]
    k: usize,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Minmax, env = "BUILDCAST_NORMALIZATION")]
    normalization: NormalizationArg,
    /// Split confidence complement of the Hoeffding bound.
    #[arg(long, default_value_t = 1e-7, env = "BUILDCAST_DELTA")]
    delta: f64,
    /// Tie threshold.
    #[arg(long, default_value_t = 0.05, env = "BUILDCAST_TAU")]
    tau: f64,
    /// Instances between split checks at a leaf.
    #[arg(long, default_value_t = 200, env = "BUILDCAST_GRACE")]
    grace: u64,
    /// Candidate thresholds per attribute.
    #[arg(long, default_value_t = 10, env = "BUILDCAST_CANDIDATES")]
    candidates: usize,
    /// Window for windowed accuracy and class-distribution fractions.
    #[arg(long, default_value_t = 100, env = "BUILDCAST_WINDOW")]
    window: usize,
    /// Drift detector confidence.
    #[arg(long, default_value_t = 0.002, env = "BUILDCAST_ADWIN_DELTA")]
    adwin_delta: f64,
    /// What to do when drift is detected.
    #[arg(long, value_enum, default_value_t = DriftActionArg::Record, env = "BUILDCAST_DRIFT_ACTION")]
    drift_action: DriftActionArg,
    #[arg(long, default_value_t = 0, env = "BUILDCAST_SEED")]
    seed: u64,
}

impl MiningArgs {
    fn run_config(&self, default_percent: u32) -> RunConfig {
        RunConfig {
            window_size: self.window,
            drift_action: self.drift_action.into(),
            seed: self.seed,
            split: SplitConfig {
                delta: self.delta,
                tau: self.tau,
                grace_period: self.grace,
                range_r: 1.0,
                candidate_thresholds: self.candidates,
            },
            smote: SmoteConfig {
                k: self.k,
                percent: self.smote_percent.unwrap_or(default_percent),
                seed: self.seed,
                normalization: self.normalization.into(),
            },
            adwin_delta: self.adwin_delta,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Input CSV path.
    #[arg(long, required_unless_present = "replay", env = "BUILDCAST_INPUT")]
    input: Option<PathBuf>,
    /// Directory for the output files.
    #[arg(long, default_value = ".", env = "BUILDCAST_OUT_DIR")]
    out_dir: PathBuf,
    /// Output file prefix.
    #[arg(long, default_value = "run", env = "BUILDCAST_PREFIX")]
    prefix: String,
    #[command(flatten)]
    mining: MiningArgs,
    /// Re-run a recorded manifest instead of taking flags.
    #[arg(long, conflicts_with = "input", env = "BUILDCAST_REPLAY")]
    replay: Option<PathBuf>,
    /// Run this many seed-varied repetitions (seed, seed+1, ...).
    #[arg(long, default_value_t = 1, env = "BUILDCAST_REPEAT")]
    repeat: usize,
    /// Concurrent repetitions.
    #[arg(long, default_value_t = 1, env = "BUILDCAST_JOBS")]
    jobs: usize,
}

#[derive(Args)]
struct ExportTreeArgs {
    /// Input CSV path.
    #[arg(long, env = "BUILDCAST_INPUT")]
    input: PathBuf,
    /// DOT output path.
    #[arg(long, env = "BUILDCAST_OUT")]
    out: PathBuf,
    /// Tree-stats JSON output path (defaults to <out>.json).
    #[arg(long, env = "BUILDCAST_STATS_OUT")]
    stats_out: Option<PathBuf>,
    #[command(flatten)]
    mining: MiningArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::InvalidParameter(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Smote(args) => cmd_smote(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::ExportTree(args) => cmd_export_tree(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let date_start = NaiveDateTime::parse_from_str(&args.date_start, DATE_FORMAT)
        .map_err(|_| {
            Error::InvalidParameter(format!(
                "date start `{}` must be YYYY-MM-DDTHH:MM:SS",
                args.date_start
            ))
        })?;
    let spec = GenSpec {
        n_instances: args.instances,
        success_count: args.success,
        failure_count: args.failure,
        overlap: args.overlap,
        informative_features: args.informative,
        shift: args.shift_at.map(|at_index| DistributionShift {
            at_index,
            post_success_probability: args.shift_success_prob,
        }),
        seed: args.seed,
        date_start,
        date_step_seconds: args.date_step_secs,
    };
    let stream = datagen::generate_stream(&spec)?;
    let mut bytes = Vec::new();
    serialize_csv(&stream, &mut bytes, false)?;
    fs::write(&args.out, bytes)?;
    eprintln!(
        "wrote {} instances ({} success / {} failure) to {}",
        stream.len(),
        stream.class_counts().0,
        stream.class_counts().1,
        args.out.display()
    );
    Ok(())
}

fn cmd_smote(args: SmoteArgs) -> Result<(), Error> {
    let config = SmoteConfig::new(
        args.k,
        args.smote_percent,
        args.seed,
        args.normalization.into(),
    )?;
    let schema = StreamSchema::canonical();
    let bytes = fs::read(&args.input)?;
    let stream = parse_stream(bytes.as_slice(), &schema)?.sort_by_date();
    let augmented = if config.percent > 0 {
        double_smote(&stream, &config)?
    } else {
        stream
    };
    let mut out = Vec::new();
    serialize_csv(&augmented, &mut out, true)?;
    fs::write(&args.out, out)?;
    let (success, failure) = augmented.class_counts();
    eprintln!(
        "wrote {} instances ({success} success / {failure} failure) to {}",
        augmented.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<(), Error> {
    let schema = StreamSchema::canonical();

    if let Some(manifest_path) = &args.replay {
        let written = pipeline::replay(manifest_path, &schema)?;
        for path in written {
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }

    let input = args.input.as_ref().expect("clap enforces input xor replay");
    let base_config = args.mining.run_config(900);

    if args.repeat <= 1 {
        let (result, mut manifest) = pipeline::run_csv_file(input, &schema, &base_config)?;
        let written = pipeline::write_outputs(&args.out_dir, &args.prefix, &result, &mut manifest)?;
        for path in written {
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }

    // Seed-varied repetitions, at most `jobs` at a time, each with isolated
    // state and its own output prefix.
    let jobs = args.jobs.max(1);
    let mut errors: Vec<Error> = Vec::new();
    for chunk_start in (0..args.repeat).step_by(jobs) {
        let chunk_end = (chunk_start + jobs).min(args.repeat);
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = (chunk_start..chunk_end)
                .map(|rep| {
                    let schema = &schema;
                    let out_dir = &args.out_dir;
                    let prefix = &args.prefix;
                    let mut config = base_config;
                    scope.spawn(move || {
                        config.seed = base_config.seed + rep as u64;
                        config.smote.seed = config.seed;
                        let (result, mut manifest) =
                            pipeline::run_csv_file(input, schema, &config)?;
                        let rep_prefix = format!("{prefix}-r{rep}");
                        pipeline::write_outputs(out_dir, &rep_prefix, &result, &mut manifest)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread must not panic"))
                .collect::<Vec<_>>()
        });
        for outcome in results {
            match outcome {
                Ok(written) => {
                    for path in written {
                        eprintln!("wrote {}", path.display());
                    }
                }
                Err(err) => errors.push(err),
            }
        }
    }
    match errors.into_iter().next() {
        None => Ok(()),
        Some(err) => Err(err),
    }
}

fn cmd_export_tree(args: ExportTreeArgs) -> Result<(), Error> {
    // Tree export defaults to the raw input; oversampling stays opt-in.
    let config = args.mining.run_config(0);
    let schema = StreamSchema::canonical();
    let (result, _manifest) = pipeline::run_csv_file(&args.input, &schema, &config)?;
    fs::write(&args.out, result.tree_dot.as_bytes())?;
    let stats_path = args
        .stats_out
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", args.out.display())));
    fs::write(&stats_path, result.tree_stats_json.as_bytes())?;
    eprintln!(
        "wrote {} and {} (depth {}, {} leaves)",
        args.out.display(),
        stats_path.display(),
        result.tree_stats.depth,
        result.tree_stats.leaves
    );
    Ok(())
}
