//! Tabular datasets with a designated sensitive attribute and binary outcome.
//!
//! The pipeline mirrors a typical observational study: [`load_csv`] reads a
//! schema-validated CSV into a [`RawDataset`] that may still contain missing
//! cells, [`RawDataset::drop_missing`] applies listwise deletion, and
//! [`RawDataset::one_hot_encode`] produces the numeric [`Dataset`] consumed
//! by models and audits. [`SynthSpec`] generates calibrated synthetic data
//! with the same shape when real microdata are unavailable.

mod encode;
mod error;
mod load;
mod schema;
mod split;
mod summary;
mod synth;

pub use error::{DatasetError, Result};
pub use load::{load_csv, RawDataset};
pub use schema::{ColumnSpec, Kind, Role, Schema};
pub use summary::{DistributionTable, SummaryRow};
pub use synth::{GroupSpec, SynthSpec};

use std::fs;
use std::path::Path;

/// Where an encoded feature column came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureOrigin {
    /// Pass-through numeric source column.
    Numeric { source: String },
    /// One-hot indicator for a single level of a categorical source column.
    Indicator { source: String, level: String },
}

impl FeatureOrigin {
    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureOrigin::Numeric { .. })
    }
}

/// Immutable numeric dataset: feature matrix, group codes, binary outcomes,
/// and strictly positive per-row weights.
///
/// Group codes index into [`Dataset::group_names`]; outcome 1 is the
/// favorable label. All operations are pure, so a `Dataset` can be shared
/// freely across threads.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f64>,
    n_rows: usize,
    n_features: usize,
    feature_names: Vec<String>,
    feature_origins: Vec<FeatureOrigin>,
    group: Vec<u16>,
    group_names: Vec<String>,
    outcome: Vec<u8>,
    weights: Vec<f64>,
    schema: Schema,
}

impl Dataset {
    /// Assembles a dataset from parts, checking every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        features: Vec<f64>,
        n_features: usize,
        feature_names: Vec<String>,
        feature_origins: Vec<FeatureOrigin>,
        group: Vec<u16>,
        group_names: Vec<String>,
        outcome: Vec<u8>,
        weights: Option<Vec<f64>>,
        schema: Schema,
    ) -> Result<Self> {
        let invalid = |reason: String| DatasetError::Invalid { reason };
        let n_rows = group.len();
        if outcome.len() != n_rows {
            return Err(invalid("group/outcome length mismatch".into()));
        }
        if n_features == 0 && n_rows > 0 {
            return Err(invalid("dataset has no feature columns".into()));
        }
        if features.len() != n_rows * n_features {
            return Err(invalid(format!(
                "feature matrix has {} cells, expected {}",
                features.len(),
                n_rows * n_features
            )));
        }
        if feature_names.len() != n_features || feature_origins.len() != n_features {
            return Err(invalid("feature name/origin count mismatch".into()));
        }
        if group_names.is_empty() {
            return Err(invalid("empty group name table".into()));
        }
        for (i, v) in features.iter().enumerate() {
            if !v.is_finite() {
                return Err(invalid(format!(
                    "non-finite feature value at row {}, column {}",
                    i / n_features,
                    i % n_features
                )));
            }
        }
        for (i, &g) in group.iter().enumerate() {
            if usize::from(g) >= group_names.len() {
                return Err(invalid(format!("row {i}: group code {g} out of range")));
            }
        }
        for (i, &y) in outcome.iter().enumerate() {
            if y > 1 {
                return Err(invalid(format!("row {i}: outcome {y} is not binary")));
            }
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; n_rows]);
        if weights.len() != n_rows {
            return Err(invalid("weight vector length mismatch".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid(format!("row {i}: weight {w} not strictly positive")));
            }
        }
        schema.validate()?;
        Ok(Dataset {
            features,
            n_rows,
            n_features,
            feature_names,
            feature_origins,
            group,
            group_names,
            outcome,
            weights,
            schema,
        })
    }

    /// Convenience constructor for purely numeric data; builds a minimal
    /// schema with feature columns `x0..`, sensitive column `group`, and
    /// outcome column `outcome` with levels `["0", "1"]`.
    pub fn from_numeric_parts(
        rows: Vec<Vec<f64>>,
        group: Vec<u16>,
        group_names: Vec<String>,
        outcome: Vec<u8>,
    ) -> Result<Self> {
        let n_features = rows.first().map_or(1, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_features {
                return Err(DatasetError::Invalid {
                    reason: format!("row {i} has {} features, expected {n_features}", r.len()),
                });
            }
        }
        let feature_names: Vec<String> = (0..n_features).map(|j| format!("x{j}")).collect();
        let feature_origins: Vec<FeatureOrigin> = feature_names
            .iter()
            .map(|n| FeatureOrigin::Numeric { source: n.clone() })
            .collect();
        let mut columns: Vec<ColumnSpec> = feature_names
            .iter()
            .map(|n| ColumnSpec::numeric_feature(n.clone()))
            .collect();
        columns.push(ColumnSpec::categorical(
            "group",
            Role::Sensitive,
            group_names.clone(),
        ));
        columns.push(ColumnSpec::categorical(
            "outcome",
            Role::Outcome,
            vec!["0".into(), "1".into()],
        ));
        let schema = Schema::new(columns, "")?;
        let features: Vec<f64> = rows.into_iter().flatten().collect();
        Dataset::from_parts(
            features,
            n_features,
            feature_names,
            feature_origins,
            group,
            group_names,
            outcome,
            None,
            schema,
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    /// Feature row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn feature(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_features + col]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_origins(&self) -> &[FeatureOrigin] {
        &self.feature_origins
    }

    /// Indices of feature columns that came from numeric source columns.
    pub fn numeric_feature_indices(&self) -> Vec<usize> {
        self.feature_origins
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_numeric())
            .map(|(j, _)| j)
            .collect()
    }

    pub fn group(&self) -> &[u16] {
        &self.group
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_code(&self, name: &str) -> Option<u16> {
        self.group_names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u16)
    }

    pub fn outcome(&self) -> &[u8] {
        &self.outcome
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Copy of this dataset with the given weight vector.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let mut out = self.clone();
        if weights.len() != self.n_rows {
            return Err(DatasetError::Invalid {
                reason: "weight vector length mismatch".into(),
            });
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(DatasetError::Invalid {
                    reason: format!("row {i}: weight {w} not strictly positive"),
                });
            }
        }
        out.weights = weights;
        Ok(out)
    }

    /// Copy of this dataset with a replaced outcome vector.
    pub fn with_outcome(&self, outcome: Vec<u8>) -> Result<Self> {
        if outcome.len() != self.n_rows {
            return Err(DatasetError::Invalid {
                reason: "outcome vector length mismatch".into(),
            });
        }
        if let Some(i) = outcome.iter().position(|&y| y > 1) {
            return Err(DatasetError::Invalid {
                reason: format!("row {i}: outcome is not binary"),
            });
        }
        let mut out = self.clone();
        out.outcome = outcome;
        Ok(out)
    }

    /// Copy of this dataset with a replaced feature matrix (same shape).
    pub fn with_features(&self, features: Vec<f64>) -> Result<Self> {
        if features.len() != self.features.len() {
            return Err(DatasetError::Invalid {
                reason: "feature matrix shape mismatch".into(),
            });
        }
        for v in &features {
            if !v.is_finite() {
                return Err(DatasetError::Invalid {
                    reason: "non-finite feature value".into(),
                });
            }
        }
        let mut out = self.clone();
        out.features = features;
        Ok(out)
    }

    /// New dataset containing the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut group = Vec::with_capacity(rows.len());
        let mut outcome = Vec::with_capacity(rows.len());
        let mut weights = Vec::with_capacity(rows.len());
        for &i in rows {
            features.extend_from_slice(self.row(i));
            group.push(self.group[i]);
            outcome.push(self.outcome[i]);
            weights.push(self.weights[i]);
        }
        Dataset {
            features,
            n_rows: rows.len(),
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
            feature_origins: self.feature_origins.clone(),
            group,
            group_names: self.group_names.clone(),
            outcome,
            weights,
            schema: self.schema.clone(),
        }
    }

    /// Writes the dataset as a schema-conformant CSV: feature columns in
    /// order, then the sensitive column (group name), then the outcome
    /// column (level name). Byte-stable for fixed input.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let sens = self.schema.sensitive().name.clone();
        let out_col = self.schema.outcome().clone();
        let mut header: Vec<String> = self.feature_names.clone();
        header.push(sens);
        header.push(out_col.name.clone());
        w.write_record(&header)?;
        let out_levels = out_col.levels();
        for i in 0..self.n_rows {
            let mut record: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            record.push(self.group_names[usize::from(self.group[i])].clone());
            record.push(out_levels[usize::from(self.outcome[i])].clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Deterministic train/test partition produced by [`Dataset::stratified_split`].
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratio: f64,
}

/// Reads a JSON synthesis spec from disk.
pub fn synth_spec_from_json_file(path: impl AsRef<Path>) -> Result<SynthSpec> {
    let text = fs::read_to_string(path)?;
    let spec: SynthSpec =
        serde_json::from_str(&text).map_err(|e| DatasetError::InvalidSynthSpec {
            reason: format!("spec parse error: {e}"),
        })?;
    spec.validate()?;
    Ok(spec)
}
