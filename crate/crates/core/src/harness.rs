//! End-to-end benchmark runs: split, generate or load candidates, evaluate,
//! write reports and a manifest tying them together.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{copy_identity, perturb, sample_independent, PerturbationConfig, DEFAULT_SYNTHETIC_ROWS};
use crate::discretize::DiscretizationConfig;
use crate::error::{Error, Result};
use crate::fidelity::{FidelityReference, FidelityReport};
use crate::ingest::{
    load_schema_override, load_table, split_train_holdout, write_table, ColumnKind, IngestOptions, Table,
};
use crate::privacy::{holdout_control_report, PrivacyReference, PrivacyReport};
use crate::REPORT_SCHEMA_VERSION;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    External,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineName {
    Perturb,
    Independent,
    Identity,
    /// The holdout itself, evaluated as if synthetic.
    Holdout,
}

/// One candidate entry as written in the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateConfig {
    #[serde(default)]
    pub label: Option<String>,
    pub kind: CandidateKind,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub baseline: Option<BaselineName>,
    #[serde(default)]
    pub noise: Option<f64>,
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSource {
    External(PathBuf),
    Perturb(PerturbationConfig),
    Independent { rows: usize, seed: u64 },
    Identity { rows: usize, seed: u64 },
    Holdout,
}

impl CandidateSource {
    fn default_label(&self) -> String {
        match self {
            CandidateSource::External(path) => path
                .file_stem()
                .map_or_else(|| "external".to_string(), |s| s.to_string_lossy().into_owned()),
            CandidateSource::Perturb(cfg) => format!("perturb-{}", cfg.noise),
            CandidateSource::Independent { .. } => "independent".to_string(),
            CandidateSource::Identity { .. } => "identity".to_string(),
            CandidateSource::Holdout => "holdout".to_string(),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            CandidateSource::Perturb(cfg) => Some(cfg.seed),
            CandidateSource::Independent { seed, .. } | CandidateSource::Identity { seed, .. } => Some(*seed),
            CandidateSource::External(_) | CandidateSource::Holdout => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            CandidateSource::External(path) => format!("external file {}", path.display()),
            CandidateSource::Perturb(cfg) => {
                format!(
                    "perturbation baseline (noise {}, {} rows, seed {})",
                    cfg.noise, cfg.rows, cfg.seed
                )
            }
            CandidateSource::Independent { rows, seed } => {
                format!("independent-marginal baseline ({rows} rows, seed {seed})")
            }
            CandidateSource::Identity { rows, seed } => format!("identity copy baseline ({rows} rows, seed {seed})"),
            CandidateSource::Holdout => "holdout control".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub source: CandidateSource,
}

impl CandidateConfig {
    pub fn resolve(&self, base_dir: &Path, default_seed: u64) -> Result<Candidate> {
        let rows = self.rows.unwrap_or(DEFAULT_SYNTHETIC_ROWS);
        let seed = self.seed.unwrap_or(default_seed);
        let source = match self.kind {
            CandidateKind::External => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("external candidate needs a `path`".into()))?;
                if self.baseline.is_some() || self.noise.is_some() {
                    return Err(Error::Config("external candidates take no baseline parameters".into()));
                }
                CandidateSource::External(base_dir.join(path))
            }
            CandidateKind::Baseline => {
                let name = self
                    .baseline
                    .ok_or_else(|| Error::Config("baseline candidate needs a `baseline` name".into()))?;
                if self.path.is_some() {
                    return Err(Error::Config("baseline candidates take no `path`".into()));
                }
                if self.noise.is_some() && name != BaselineName::Perturb {
                    return Err(Error::Config("`noise` only applies to the perturb baseline".into()));
                }
                match name {
                    BaselineName::Perturb => {
                        let noise = self
                            .noise
                            .ok_or_else(|| Error::Config("perturb baseline needs `noise`".into()))?;
                        let cfg = PerturbationConfig::new(noise, rows, seed);
                        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
                        CandidateSource::Perturb(cfg)
                    }
                    BaselineName::Independent => CandidateSource::Independent { rows, seed },
                    BaselineName::Identity => CandidateSource::Identity { rows, seed },
                    BaselineName::Holdout => CandidateSource::Holdout,
                }
            }
        };
        let label = self.label.clone().unwrap_or_else(|| source.default_label());
        Ok(Candidate { label, source })
    }
}

fn default_depths() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_workers() -> usize {
    1
}

fn default_delimiter() -> String {
    ",".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub schema: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub split_seed: u64,
    /// Seed for size equalization in the privacy metric; defaults to `split_seed`.
    #[serde(default)]
    pub privacy_seed: Option<u64>,
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default)]
    pub missing_tokens: Option<Vec<String>>,
    /// Also write generated baseline tables next to the reports.
    #[serde(default)]
    pub write_synthetic: bool,
    #[serde(default)]
    pub candidates: Vec<CandidateConfig>,
    /// Directory relative paths resolve against; the config file's directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn privacy_seed(&self) -> u64 {
        self.privacy_seed.unwrap_or(self.split_seed)
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        self.base_dir.join(relative)
    }

    pub fn ingest_options(&self) -> Result<IngestOptions> {
        let delimiter = match self.delimiter.as_bytes() {
            [b] => *b,
            b"\\t" => b'\t',
            _ => {
                return Err(Error::Config(format!(
                    "delimiter must be one byte, got `{}`",
                    self.delimiter
                )))
            }
        };
        let mut opts = IngestOptions {
            delimiter,
            ..IngestOptions::default()
        };
        if let Some(tokens) = &self.missing_tokens {
            opts.missing_tokens = tokens.clone();
        }
        Ok(opts)
    }

    pub fn validate(&self) -> Result<Vec<Candidate>> {
        if self.candidates.is_empty() {
            return Err(Error::Config("at least one candidate is required".into()));
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::Config(format!(
                "depths must be non-empty and positive, got {:?}",
                self.depths
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.discretization
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.ingest_options()?;
        let candidates = self
            .candidates
            .iter()
            .map(|c| c.resolve(&self.base_dir, self.split_seed))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        for c in &candidates {
            if !seen.insert(file_stem(&c.label)) {
                return Err(Error::Config(format!("duplicate candidate label `{}`", c.label)));
            }
        }
        Ok(candidates)
    }
}

/// Settings shared by every candidate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSettings {
    pub depths: Vec<usize>,
    pub discretization: DiscretizationConfig,
    pub split_seed: Option<u64>,
    pub privacy_seed: u64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        EvaluationSettings {
            depths: default_depths(),
            discretization: DiscretizationConfig::default(),
            split_seed: None,
            privacy_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub fidelity: FidelityReport,
    pub privacy: PrivacyReport,
}

/// Training-side state built once and shared by all candidates of a run.
pub struct Evaluator {
    train: Table,
    holdout: Table,
    settings: EvaluationSettings,
    fidelity: FidelityReference,
    privacy: PrivacyReference,
}

impl Evaluator {
    pub fn new(train: &Table, holdout: &Table, settings: &EvaluationSettings) -> Result<Self> {
        let fidelity = FidelityReference::new(train, holdout, &settings.discretization, &settings.depths)?;
        let privacy = PrivacyReference::new(train, holdout, &settings.discretization, settings.privacy_seed)?;
        Ok(Evaluator {
            train: train.clone(),
            holdout: holdout.clone(),
            settings: settings.clone(),
            fidelity,
            privacy,
        })
    }

    pub fn train(&self) -> &Table {
        &self.train
    }

    pub fn holdout(&self) -> &Table {
        &self.holdout
    }

    pub fn evaluate(&self, synth: &Table) -> Result<Evaluation> {
        let mut fidelity = self.fidelity.evaluate(synth)?;
        fidelity.seed = self.settings.split_seed;
        let privacy = self.privacy.evaluate(synth)?;
        Ok(Evaluation { fidelity, privacy })
    }

    /// The holdout as candidate: fidelity against the holdout itself (ratio
    /// one by construction), privacy from a further split of the holdout.
    pub fn evaluate_holdout_control(&self) -> Result<Evaluation> {
        let mut fidelity = self.fidelity.evaluate(&self.holdout)?;
        fidelity.seed = self.settings.split_seed;
        let privacy = holdout_control_report(
            &self.train,
            &self.holdout,
            &self.settings.discretization,
            self.settings.privacy_seed,
        )?;
        Ok(Evaluation { fidelity, privacy })
    }

    pub fn write_models(&self, dir: &Path) -> Result<Vec<String>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::new();
        for (k, model) in self.fidelity.models() {
            let name = format!("discretization.k{k}.json");
            model.save(dir.join(&name))?;
            files.push(name);
        }
        let name = "discretization.privacy.json".to_string();
        self.privacy.model().save(dir.join(&name))?;
        files.push(name);
        Ok(files)
    }
}

/// Evaluates a single synthetic table.
pub fn evaluate_candidate(
    train: &Table,
    holdout: &Table,
    synth: &Table,
    settings: &EvaluationSettings,
) -> Result<Evaluation> {
    Evaluator::new(train, holdout, settings)?.evaluate(synth)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFiles {
    pub fidelity_json: String,
    pub fidelity_csv: String,
    pub privacy_json: String,
    pub histogram_csv: String,
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Writes the four report files for one candidate into `dir`.
pub fn write_reports(dir: &Path, label: &str, eval: &Evaluation) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = file_stem(label);
    let files = ReportFiles {
        fidelity_json: format!("{stem}.fidelity.json"),
        fidelity_csv: format!("{stem}.fidelity.csv"),
        privacy_json: format!("{stem}.privacy.json"),
        histogram_csv: format!("{stem}.dcr_histogram.csv"),
    };
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    write(&files.fidelity_json, eval.fidelity.to_json()?)?;
    write(&files.privacy_json, eval.privacy.to_json()?)?;
    eval.fidelity
        .write_interactions_csv(create(&dir.join(&files.fidelity_csv))?)?;
    eval.privacy
        .write_histogram_csv(create(&dir.join(&files.histogram_csv))?)?;
    Ok(files)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateStatus {
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub label: String,
    pub source: String,
    pub seed: Option<u64>,
    pub status: CandidateStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reports: Option<ReportFiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_file: Option<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub path: String,
    pub rows: usize,
    pub columns: usize,
    pub column_kinds: Vec<(String, ColumnKind)>,
    pub numeric_columns: usize,
    pub categorical_columns: usize,
    pub datetime_columns: usize,
    pub train_rows: usize,
    pub holdout_rows: usize,
}

impl DatasetFingerprint {
    fn new(path: &Path, table: &Table, train: &Table, holdout: &Table) -> Self {
        let count = |kind| table.schema().iter().filter(|c| c.kind == kind).count();
        DatasetFingerprint {
            path: path.display().to_string(),
            rows: table.row_count(),
            columns: table.column_count(),
            column_kinds: table.schema().iter().map(|c| (c.name.clone(), c.kind)).collect(),
            numeric_columns: count(ColumnKind::Numeric),
            categorical_columns: count(ColumnKind::Categorical),
            datetime_columns: count(ColumnKind::Datetime),
            train_rows: train.row_count(),
            holdout_rows: holdout.row_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub split: u64,
    pub privacy: u64,
    pub candidates: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub output_dir: PathBuf,
    pub dataset: DatasetFingerprint,
    pub seeds: RunSeeds,
    pub depths: Vec<usize>,
    pub discretization: DiscretizationConfig,
    pub models: Vec<String>,
    pub candidates: Vec<CandidateOutcome>,
    pub timings_ms: BTreeMap<String, f64>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn all_succeeded(&self) -> bool {
        self.candidates.iter().all(|c| c.status == CandidateStatus::Succeeded)
    }

    pub fn succeeded(&self) -> impl Iterator<Item = &CandidateOutcome> {
        self.candidates
            .iter()
            .filter(|c| c.status == CandidateStatus::Succeeded)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Loads a manifest. `output_dir` is replaced by the manifest's own
    /// directory so a moved run directory still resolves.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: RunManifest = serde_json::from_str(&text)?;
        if manifest.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Report(format!(
                "manifest schema v{} is not supported (expected v{REPORT_SCHEMA_VERSION})",
                manifest.schema_version
            )));
        }
        manifest.output_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn load_fidelity(&self, outcome: &CandidateOutcome) -> Result<FidelityReport> {
        let files = self.report_files(outcome)?;
        let path = self.output_dir.join(&files.fidelity_json);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(path, e))?;
        FidelityReport::from_json(&text)
    }

    pub fn load_privacy(&self, outcome: &CandidateOutcome) -> Result<PrivacyReport> {
        let files = self.report_files(outcome)?;
        let path = self.output_dir.join(&files.privacy_json);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(path, e))?;
        PrivacyReport::from_json(&text)
    }

    fn report_files<'a>(&self, outcome: &'a CandidateOutcome) -> Result<&'a ReportFiles> {
        outcome
            .reports
            .as_ref()
            .ok_or_else(|| Error::Report(format!("candidate `{}` has no reports", outcome.label)))
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3
}

fn load_external(path: &Path, dataset: &Table, opts: &IngestOptions) -> Result<Table> {
    let table = load_table(path, Some(dataset.schema()), opts).map_err(|e| match e {
        Error::UnknownColumn(name) => Error::SchemaMismatch(format!("synthetic table lacks column `{name}`")),
        other => other,
    })?;
    dataset.align_columns(&table)
}

struct RunContext<'a> {
    evaluator: &'a Evaluator,
    dataset: &'a Table,
    opts: &'a IngestOptions,
    out_dir: &'a Path,
    write_synthetic: bool,
}

fn run_candidate(ctx: &RunContext<'_>, candidate: &Candidate) -> CandidateOutcome {
    let mut timings = BTreeMap::new();
    let mut outcome = CandidateOutcome {
        label: candidate.label.clone(),
        source: candidate.source.describe(),
        seed: candidate.source.seed(),
        status: CandidateStatus::Failed,
        error: None,
        synthetic_rows: None,
        reports: None,
        synthetic_file: None,
        timings_ms: BTreeMap::new(),
    };
    let result = catch_unwind(AssertUnwindSafe(
        || -> Result<(Evaluation, ReportFiles, Option<String>, usize)> {
            let start = Instant::now();
            let train = ctx.evaluator.train();
            let synth = match &candidate.source {
                CandidateSource::External(path) => Some(load_external(path, ctx.dataset, ctx.opts)?),
                CandidateSource::Perturb(cfg) => Some(perturb(train, cfg)?),
                CandidateSource::Independent { rows, seed } => Some(sample_independent(train, *rows, *seed)?),
                CandidateSource::Identity { rows, seed } => Some(copy_identity(train, *rows, *seed)?),
                CandidateSource::Holdout => None,
            };
            timings.insert("generate".to_string(), elapsed_ms(start));

            let mut synthetic_file = None;
            if let (Some(table), true, false) = (
                &synth,
                ctx.write_synthetic,
                matches!(candidate.source, CandidateSource::External(_)),
            ) {
                let name = format!("{}.synthetic.csv", file_stem(&candidate.label));
                write_table(table, ctx.out_dir.join(&name), ctx.opts.delimiter)?;
                synthetic_file = Some(name);
            }

            let start = Instant::now();
            let (eval, rows) = match &synth {
                Some(table) => (ctx.evaluator.evaluate(table)?, table.row_count()),
                None => (
                    ctx.evaluator.evaluate_holdout_control()?,
                    ctx.evaluator.holdout().row_count(),
                ),
            };
            timings.insert("evaluate".to_string(), elapsed_ms(start));

            let start = Instant::now();
            let files = write_reports(ctx.out_dir, &candidate.label, &eval)?;
            timings.insert("write".to_string(), elapsed_ms(start));
            Ok((eval, files, synthetic_file, rows))
        },
    ));
    outcome.timings_ms = timings;
    match result {
        Ok(Ok((_, files, synthetic_file, rows))) => {
            outcome.status = CandidateStatus::Succeeded;
            outcome.reports = Some(files);
            outcome.synthetic_file = synthetic_file;
            outcome.synthetic_rows = Some(rows);
        }
        Ok(Err(e)) => {
            log::error!("candidate `{}` failed: {e}", candidate.label);
            outcome.error = Some(e.to_string());
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            log::error!("candidate `{}` panicked: {msg}", candidate.label);
            outcome.error = Some(format!("panic: {msg}"));
        }
    }
    outcome
}

/// Runs every candidate of `cfg` and writes `manifest.json` into the output
/// directory. A failing candidate is recorded and does not stop the others;
/// the run itself fails only when nothing succeeded.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunManifest> {
    let candidates = cfg.validate()?;
    let opts = cfg.ingest_options()?;
    let out_dir = cfg.resolve(&cfg.output_dir);
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut timings = BTreeMap::new();

    let start = Instant::now();
    let dataset_path = cfg.resolve(&cfg.dataset);
    let schema = cfg
        .schema
        .as_ref()
        .map(|p| load_schema_override(cfg.resolve(p)))
        .transpose()?;
    let dataset = load_table(&dataset_path, schema.as_deref(), &opts)?;
    timings.insert("load".to_string(), elapsed_ms(start));

    let start = Instant::now();
    let (train, holdout) = split_train_holdout(&dataset, cfg.split_seed)?;
    timings.insert("split".to_string(), elapsed_ms(start));

    let settings = EvaluationSettings {
        depths: cfg.depths.clone(),
        discretization: cfg.discretization,
        split_seed: Some(cfg.split_seed),
        privacy_seed: cfg.privacy_seed(),
    };
    let start = Instant::now();
    let evaluator = Evaluator::new(&train, &holdout, &settings)?;
    let models = evaluator.write_models(&out_dir)?;
    timings.insert("prepare".to_string(), elapsed_ms(start));

    let ctx = RunContext {
        evaluator: &evaluator,
        dataset: &dataset,
        opts: &opts,
        out_dir: &out_dir,
        write_synthetic: cfg.write_synthetic,
    };
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<CandidateOutcome> =
        pool.install(|| candidates.par_iter().map(|c| run_candidate(&ctx, c)).collect());
    timings.insert("candidates".to_string(), elapsed_ms(start));

    let manifest = RunManifest {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        output_dir: out_dir.clone(),
        dataset: DatasetFingerprint::new(&dataset_path, &dataset, &train, &holdout),
        seeds: RunSeeds {
            split: cfg.split_seed,
            privacy: cfg.privacy_seed(),
            candidates: candidates
                .iter()
                .filter_map(|c| c.source.seed().map(|s| (c.label.clone(), s)))
                .collect(),
        },
        depths: cfg.depths.clone(),
        discretization: cfg.discretization,
        models,
        candidates: outcomes,
        timings_ms: timings,
    };
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()?).map_err(|e| Error::io(path, e))?;
    if manifest.succeeded().next().is_none() {
        return Err(Error::AllCandidatesFailed(manifest.candidates.len()));
    }
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Candidate,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub label: String,
    pub kind: PointKind,
    /// `F3(T,S) / F3(T,H)`; absent when the holdout distance is zero.
    pub x: Option<f64>,
    /// Share of synthetic records closer to training than to holdout.
    pub y: f64,
}

/// One point per successful candidate, plus the holdout reference point
/// (ratio 1, share 0.5).
pub fn tradeoff_points(manifest: &RunManifest) -> Result<Vec<TradeoffPoint>> {
    let mut points = Vec::new();
    for outcome in manifest.succeeded() {
        let fidelity = manifest.load_fidelity(outcome)?;
        let depth = fidelity
            .depth(3)
            .ok_or_else(|| Error::Report(format!("candidate `{}` has no three-way fidelity", outcome.label)))?;
        let privacy = manifest.load_privacy(outcome)?;
        points.push(TradeoffPoint {
            label: outcome.label.clone(),
            kind: PointKind::Candidate,
            x: depth.ratio,
            y: privacy.share_closer_to_train(),
        });
    }
    points.push(TradeoffPoint {
        label: "holdout (reference)".to_string(),
        kind: PointKind::Reference,
        x: Some(1.0),
        y: 0.5,
    });
    Ok(points)
}

pub fn write_tradeoff_csv<W: std::io::Write>(points: &[TradeoffPoint], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["label", "kind", "x", "y"])?;
    for p in points {
        let kind = match p.kind {
            PointKind::Candidate => "candidate",
            PointKind::Reference => "reference",
        };
        wtr.write_record([
            p.label.clone(),
            kind.to_string(),
            p.x.map_or_else(String::new, |x| x.to_string()),
            p.y.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
