//! Holdout-based fidelity and privacy metrics for synthetic tabular data.
//!
//! Fidelity compares discretized k-way marginals of a synthetic table `S`
//! with those of the training table `T` (total variation distance, averaged
//! over all column combinations), next to the same measure for a holdout
//! table `H` drawn from the same source. Privacy compares each synthetic
//! record's distance to its closest training record with its distance to the
//! closest holdout record; a share near one half means the generator is no
//! closer to the records it saw than to records it never saw.
//!
//! ```no_run
//! use synthcheck_core::{load_table, split_train_holdout, evaluate_candidate, perturb};
//! use synthcheck_core::{EvaluationSettings, IngestOptions, PerturbationConfig};
//!
//! let data = load_table("adult.csv", None, &IngestOptions::default())?;
//! let (train, holdout) = split_train_holdout(&data, 7)?;
//! let synth = perturb(&train, &PerturbationConfig::new(0.3, 50_000, 1))?;
//! let eval = evaluate_candidate(&train, &holdout, &synth, &EvaluationSettings::default())?;
//! println!("F3 ratio {:?}", eval.fidelity.depth(3).and_then(|d| d.ratio));
//! println!("share closer to training {}", eval.privacy.share_closer_to_train());
//! # Ok::<(), synthcheck_core::Error>(())
//! ```

pub mod baselines;
pub mod discretize;
mod error;
pub mod fidelity;
pub mod harness;
pub mod ingest;
pub mod privacy;

/// Version tag carried by every emitted report and manifest.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub use baselines::{copy_identity, perturb, sample_independent, PerturbationConfig};
pub use discretize::{
    apply_discretizer, fit_discretizer, ColumnEncoding, ColumnRule, DiscretizationConfig, DiscretizationModel,
    DiscretizedTable,
};
pub use error::{Error, Result};
pub use fidelity::{
    enumerate_combinations, fidelity_report, marginal, tvd, FidelityReference, FidelityReport, MarginalDistribution,
    MarginalSpec,
};
pub use harness::{
    evaluate_candidate, run_benchmark, tradeoff_points, write_reports, Evaluation, EvaluationSettings, Evaluator,
    RunConfig, RunManifest, TradeoffPoint,
};
pub use ingest::{
    load_schema_override, load_table, read_table, split_train_holdout, subsample, write_table, ColumnData, ColumnKind,
    ColumnSchema, IngestOptions, Table, Value,
};
pub use privacy::{
    dcr_all, holdout_control_report, identical_match_count, privacy_report, DcrIndex, DcrRecord, DcrSummary,
    PrivacyReference, PrivacyReport,
};
