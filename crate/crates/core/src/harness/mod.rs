//! Repeated-split experiment harness with statistical reporting.
//!
//! [`run_experiment`] executes the full protocol: for each of `n_splits`
//! seeded stratified splits, select hyperparameters by cross-validation,
//! train under every configured mitigation, predict on the held-out test
//! rows, and audit at subgroup and aggregate level. Results accumulate in a
//! long-form [`ResultsTable`]; [`boxplot_stats`] condenses them into
//! box-plot-ready cells and [`emit_report`] writes byte-stable CSV/JSON
//! artifacts plus a manifest sufficient to reproduce the run.

mod report;
mod runner;
mod stats;

pub use report::{
    emit_report, read_results_csv, write_boxstats, write_results_csv, ReportFormat, ReportPaths,
    RESULTS_CSV_HEADER,
};
pub use runner::{run_experiment, ExperimentRun};
pub use stats::{boxplot_stats, BoxStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetError;
use crate::metrics::Notion;
use crate::mitigation::MitigationKind;
use crate::models::{Hyperparams, ModelKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {reason}")]
    InvalidConfig { reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Dataset(#[from] DatasetError),

    #[error("results table is empty")]
    EmptyResults,

    #[error("malformed results row {row}: {reason}")]
    MalformedResults { row: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// One model family to evaluate, with an optional explicit grid (the
/// default grid of the family is used otherwise). A single-entry grid
/// skips cross-validation entirely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Hyperparams>>,
}

/// Full experiment protocol configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_n_splits")]
    pub n_splits: u32,
    #[serde(default = "default_split_ratio")]
    pub split_ratio: f64,
    pub models: Vec<ModelSpec>,
    pub mitigations: Vec<MitigationKind>,
    /// Group names forming the privileged pool for binarized mitigation
    /// and the aggregate audit.
    #[serde(default = "default_privileged")]
    pub privileged: Vec<String>,
    #[serde(default)]
    pub base_seed: u64,
    /// Re-select hyperparameters on every split (the safer reading of the
    /// protocol); when false, CV runs once on the first split's training
    /// data and the choice is reused.
    #[serde(default = "default_true")]
    pub cv_per_split: bool,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
}

fn default_n_splits() -> u32 {
    30
}
fn default_split_ratio() -> f64 {
    0.8
}
fn default_privileged() -> Vec<String> {
    vec!["White".into(), "Asian".into()]
}
fn default_true() -> bool {
    true
}
fn default_cv_folds() -> usize {
    5
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| HarnessError::InvalidConfig {
            reason: reason.into(),
        };
        if self.n_splits < 1 {
            return Err(invalid("n_splits must be at least 1"));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(invalid("split_ratio must lie in (0, 1)"));
        }
        if self.models.is_empty() {
            return Err(invalid("at least one model is required"));
        }
        if self.mitigations.is_empty() {
            return Err(invalid("at least one mitigation (e.g. Baseline) is required"));
        }
        if self.privileged.is_empty() {
            return Err(invalid("privileged group set is empty"));
        }
        if self.cv_folds < 2 {
            return Err(invalid("cv_folds must be at least 2"));
        }
        for m in &self.models {
            if let Some(grid) = &m.grid {
                if grid.is_empty() {
                    return Err(invalid("model grid must not be empty"));
                }
                if grid.iter().any(|hp| hp.kind() != m.kind) {
                    return Err(invalid("grid entry kind does not match its model"));
                }
            }
        }
        Ok(())
    }
}

/// Audit scope of a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// One group versus the pooled rest.
    Subgroup,
    /// Privileged pool versus unprivileged pool.
    Aggregate,
    /// Whole test set (accuracy rows).
    Overall,
}

impl Scope {
    pub fn token(self) -> &'static str {
        match self {
            Scope::Subgroup => "subgroup",
            Scope::Aggregate => "aggregate",
            Scope::Overall => "overall",
        }
    }
}

/// One fairness-gap observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub split: u32,
    pub model: String,
    pub mitigation: String,
    pub scope: Scope,
    pub group: String,
    pub notion: Notion,
    /// `None` when a constituent rate was undefined on this split.
    pub value: Option<f64>,
}

/// Test accuracy of one (split, model, mitigation) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub split: u32,
    pub model: String,
    pub mitigation: String,
    pub accuracy: f64,
}

/// Explicit failure record: the cell was configured but could not be
/// evaluated (for example, a degenerate split emptied a reweighting cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub split: u32,
    pub model: String,
    pub mitigation: String,
    pub error: String,
}

/// Long-form experiment results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub gaps: Vec<GapRecord>,
    pub accuracies: Vec<AccuracyRecord>,
    pub failures: Vec<FailureRecord>,
}

impl ResultsTable {
    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty() && self.accuracies.is_empty() && self.failures.is_empty()
    }
}

/// Hyperparameters chosen for one model on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenHyperparams {
    pub split: u32,
    pub model: String,
    pub hyperparams: Hyperparams,
}
