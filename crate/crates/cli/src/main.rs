use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use synthcheck_core::harness::{write_tradeoff_csv, CandidateStatus, MANIFEST_FILE};
use synthcheck_core::{
    copy_identity, load_schema_override, load_table, perturb, run_benchmark, sample_independent, split_train_holdout,
    tradeoff_points, write_reports, write_table, ColumnSchema, DiscretizationConfig, EvaluationSettings, Evaluator,
    IngestOptions, PerturbationConfig, RunConfig, RunManifest, Table,
};

#[derive(Parser)]
#[command(
    name = "synthcheck",
    version,
    about = "Fidelity and privacy checks for synthetic tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a dataset into equally sized training and holdout files.
    Split(SplitArgs),
    /// Evaluate one synthetic table against training and holdout.
    Evaluate(EvaluateArgs),
    /// Run every candidate listed in a run config.
    Benchmark(BenchmarkArgs),
    /// Generate a baseline table from training data.
    Baseline(BaselineArgs),
    /// Emit privacy/fidelity trade-off points from a run manifest.
    Tradeoff(TradeoffArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Schema override file (TOML, column name -> kind).
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Tokens read as missing; repeat the flag for several.
    #[arg(long = "missing-token")]
    missing_tokens: Vec<String>,
}

impl InputArgs {
    fn options(&self) -> Result<IngestOptions> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        let mut opts = IngestOptions {
            delimiter: self.delimiter as u8,
            ..IngestOptions::default()
        };
        if !self.missing_tokens.is_empty() {
            opts.missing_tokens = self.missing_tokens.clone();
        }
        Ok(opts)
    }

    fn schema(&self) -> Result<Option<Vec<ColumnSchema>>> {
        self.schema
            .as_ref()
            .map(|p| load_schema_override(p).with_context(|| format!("loading schema {}", p.display())))
            .transpose()
    }
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    holdout_out: PathBuf,
    #[command(flatten)]
    input_args: InputArgs,
}

#[derive(Args)]
struct MetricArgs {
    /// Interaction depths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    c_univariate: usize,
    #[arg(long, default_value_t = 10)]
    c_bivariate: usize,
    #[arg(long, default_value_t = 5)]
    c_threeway: usize,
    #[arg(long, default_value_t = 10)]
    c_privacy: usize,
    /// Seed for equalizing training and holdout sizes in the privacy metric.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MetricArgs {
    fn settings(&self) -> EvaluationSettings {
        EvaluationSettings {
            depths: self.depths.clone(),
            discretization: DiscretizationConfig {
                c_univariate: self.c_univariate,
                c_bivariate: self.c_bivariate,
                c_threeway: self.c_threeway,
                c_privacy: self.c_privacy,
            },
            split_seed: None,
            privacy_seed: self.seed,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    holdout: PathBuf,
    #[arg(long)]
    synthetic: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Report file prefix; defaults to the synthetic file's stem.
    #[arg(long)]
    label: Option<String>,
    /// Also write the fitted discretization models.
    #[arg(long)]
    write_models: bool,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    input_args: InputArgs,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's worker budget.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Perturb,
    Independent,
    Identity,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long, value_enum)]
    kind: BaselineKind,
    /// Cell replacement probability (perturb only).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 50_000)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input_args: InputArgs,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Run manifest, or the run directory holding it.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn load_like(path: &Path, reference: &Table, opts: &IngestOptions) -> Result<Table> {
    let table =
        load_table(path, Some(reference.schema()), opts).with_context(|| format!("loading {}", path.display()))?;
    reference
        .align_columns(&table)
        .with_context(|| format!("{} does not match the training schema", path.display()))
}

fn split(args: SplitArgs) -> Result<ExitCode> {
    let opts = args.input_args.options()?;
    let schema = args.input_args.schema()?;
    let table = load_table(&args.input, schema.as_deref(), &opts)
        .with_context(|| format!("loading {}", args.input.display()))?;
    let (train, holdout) = split_train_holdout(&table, args.seed)?;
    write_table(&train, &args.train_out, opts.delimiter)?;
    write_table(&holdout, &args.holdout_out, opts.delimiter)?;
    println!(
        "{} rows -> {} training, {} holdout (seed {})",
        table.row_count(),
        train.row_count(),
        holdout.row_count(),
        args.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let opts = args.input_args.options()?;
    let schema = args.input_args.schema()?;
    let train = load_table(&args.train, schema.as_deref(), &opts)
        .with_context(|| format!("loading {}", args.train.display()))?;
    let holdout = load_like(&args.holdout, &train, &opts)?;
    let synth = load_like(&args.synthetic, &train, &opts)?;
    let evaluator = Evaluator::new(&train, &holdout, &args.metrics.settings())?;
    let eval = evaluator.evaluate(&synth)?;
    let label = args.label.unwrap_or_else(|| {
        args.synthetic
            .file_stem()
            .map_or_else(|| "synthetic".to_string(), |s| s.to_string_lossy().into_owned())
    });
    write_reports(&args.out_dir, &label, &eval)?;
    if args.write_models {
        evaluator.write_models(&args.out_dir)?;
    }
    for depth in &eval.fidelity.depths {
        let ratio = depth.ratio.map_or_else(|| "n/a".to_string(), |r| format!("{r:.3}"));
        println!(
            "F{}  synthetic {:.4}  holdout {:.4}  ratio {ratio}  ({} interactions, c={})",
            depth.k, depth.f_ts, depth.f_th, depth.interaction_count, depth.c
        );
    }
    let p = &eval.privacy.summary;
    println!(
        "DCR  share closer to training {:.4}  mean train {:.3}  mean holdout {:.3}  identical matches {}",
        p.share_closer_to_train, p.mean_dcr_train, p.mean_dcr_holdout, p.identical_match_count_train
    );
    Ok(ExitCode::SUCCESS)
}

fn benchmark(args: BenchmarkArgs) -> Result<ExitCode> {
    let mut cfg = RunConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(dir) = args.out_dir {
        cfg.output_dir = std::env::current_dir()?.join(dir);
    }
    let manifest = run_benchmark(&cfg)?;
    for c in &manifest.candidates {
        match c.status {
            CandidateStatus::Succeeded => println!("ok      {}", c.label),
            CandidateStatus::Failed => println!("FAILED  {}: {}", c.label, c.error.as_deref().unwrap_or("")),
        }
    }
    println!("manifest: {}", manifest.output_dir.join(MANIFEST_FILE).display());
    Ok(if manifest.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn baseline(args: BaselineArgs) -> Result<ExitCode> {
    let opts = args.input_args.options()?;
    let schema = args.input_args.schema()?;
    let train = load_table(&args.train, schema.as_deref(), &opts)
        .with_context(|| format!("loading {}", args.train.display()))?;
    if args.noise.is_some() && !matches!(args.kind, BaselineKind::Perturb) {
        bail!("--noise only applies to --kind perturb");
    }
    let table = match args.kind {
        BaselineKind::Perturb => {
            let noise = args.noise.context("--kind perturb needs --noise")?;
            perturb(&train, &PerturbationConfig::new(noise, args.rows, args.seed))?
        }
        BaselineKind::Independent => sample_independent(&train, args.rows, args.seed)?,
        BaselineKind::Identity => copy_identity(&train, args.rows, args.seed)?,
    };
    write_table(&table, &args.out, opts.delimiter)?;
    println!("wrote {} rows to {}", table.row_count(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn tradeoff(args: TradeoffArgs) -> Result<ExitCode> {
    let path = if args.manifest.is_dir() {
        args.manifest.join(MANIFEST_FILE)
    } else {
        args.manifest
    };
    let manifest = RunManifest::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let points = tradeoff_points(&manifest)?;
    if let Some(csv) = &args.csv {
        write_tradeoff_csv(
            &points,
            fs::File::create(csv).with_context(|| format!("creating {}", csv.display()))?,
        )?;
    }
    if let Some(json) = &args.json {
        fs::write(json, serde_json::to_string_pretty(&points)?)
            .with_context(|| format!("writing {}", json.display()))?;
    }
    if args.csv.is_none() && args.json.is_none() {
        write_tradeoff_csv(&points, std::io::stdout().lock())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Split(a) => split(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Baseline(a) => baseline(a),
        Command::Tradeoff(a) => tradeoff(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
