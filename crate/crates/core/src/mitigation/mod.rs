//! Bias mitigation: two preprocessing and two in-processing techniques.
//!
//! Every technique operates on a binarized sensitive attribute
//! (1 = privileged, 0 = unprivileged) derived from a [`BinaryGroupMap`],
//! mirroring the common constraint that mitigation methods handle only
//! binary group structure. Audits of mitigated models can and should still
//! be run at the subgroup level.

mod dir;
mod exgr;
mod metac;
mod reweigh;

pub use dir::{dir_repair, dir_repair_with_options, DirOptions};
pub use exgr::{exgr_fit, ExGrConstraint, ExGrParams, RandomizedClassifier};
pub use metac::{metac_fit, GroupThresholdClassifier, MetaCParams, RatioMetric};
pub use reweigh::reweigh;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum MitigationError {
    #[error("privileged set `{name}` is not a group in the dataset")]
    UnknownGroupName { name: String },

    #[error("binary group map must leave both a privileged and an unprivileged side")]
    UncoveredGroup,

    #[error("cell (s={s}, y={y}) has no rows")]
    EmptyCell { s: u8, y: u8 },

    #[error("group side s={s} has no rows")]
    EmptySide { s: u8 },

    #[error("column {column} is not a numeric feature")]
    NonNumericColumn { column: usize },

    #[error("repair amount {lambda} outside [0, 1]")]
    InvalidLambda { lambda: f64 },

    #[error("constraint slack {eps} must be positive")]
    InvalidEps { eps: f64 },

    #[error("fairness floor {tau} outside [0, 1]")]
    InvalidTau { tau: f64 },

    #[error("grid resolution {0} too small; need at least 2 threshold points")]
    InvalidGridResolution(usize),

    #[error("iteration budget must be at least 1")]
    InvalidIterations,

    #[error("s vector length {got} does not match dataset rows {expected}")]
    MisalignedIndicator { expected: usize, got: usize },

    #[error("indicator value {0} is not binary")]
    InvalidIndicator(u8),

    #[error("base scores are constant; thresholds are inoperative")]
    DegenerateScores,

    #[error(transparent)]
    Dataset(#[from] DatasetError),

    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, MitigationError>;

/// Partition of the group table into privileged and unprivileged sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryGroupMap {
    pub privileged: Vec<String>,
}

impl Default for BinaryGroupMap {
    /// White and Asian in the privileged category, everyone else in the
    /// unprivileged category.
    fn default() -> Self {
        BinaryGroupMap {
            privileged: vec!["White".into(), "Asian".into()],
        }
    }
}

impl BinaryGroupMap {
    pub fn new(privileged: Vec<String>) -> Self {
        BinaryGroupMap { privileged }
    }

    /// Group codes of the privileged side, validated against the dataset.
    pub fn privileged_codes(&self, data: &Dataset) -> Result<BTreeSet<u16>> {
        if self.privileged.is_empty() {
            return Err(MitigationError::UncoveredGroup);
        }
        let mut codes = BTreeSet::new();
        for name in &self.privileged {
            let code = data
                .group_code(name)
                .ok_or_else(|| MitigationError::UnknownGroupName { name: name.clone() })?;
            codes.insert(code);
        }
        if codes.len() >= data.n_groups() {
            return Err(MitigationError::UncoveredGroup);
        }
        Ok(codes)
    }

    /// Per-row indicator: 1 iff the row's group is privileged.
    pub fn binarize(&self, data: &Dataset) -> Result<Vec<u8>> {
        let codes = self.privileged_codes(data)?;
        Ok(data
            .group()
            .iter()
            .map(|g| u8::from(codes.contains(g)))
            .collect())
    }
}

/// A mitigation technique plus its parameters, as it appears in experiment
/// configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MitigationKind {
    /// No mitigation; the reference scenario.
    Baseline,
    /// Reweighting of (group, label) cells.
    #[serde(rename = "ReW")]
    Reweigh,
    /// Disparate impact removal by quantile repair, `lambda` in [0, 1].
    #[serde(rename = "DIR")]
    DirRepair {
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    /// Exponentiated gradient reduction.
    #[serde(rename = "ExGR")]
    ExGr(ExGrParams),
    /// Group-threshold meta classifier.
    #[serde(rename = "MetaC")]
    MetaC(MetaCParams),
}

fn default_lambda() -> f64 {
    1.0
}

impl MitigationKind {
    pub fn token(&self) -> &'static str {
        match self {
            MitigationKind::Baseline => "Baseline",
            MitigationKind::Reweigh => "ReW",
            MitigationKind::DirRepair { .. } => "DIR",
            MitigationKind::ExGr(_) => "ExGR",
            MitigationKind::MetaC(_) => "MetaC",
        }
    }
}

pub(crate) fn check_indicator(data: &Dataset, s: &[u8]) -> Result<()> {
    if s.len() != data.n_rows() {
        return Err(MitigationError::MisalignedIndicator {
            expected: data.n_rows(),
            got: s.len(),
        });
    }
    if let Some(&bad) = s.iter().find(|&&v| v > 1) {
        return Err(MitigationError::InvalidIndicator(bad));
    }
    Ok(())
}
