//! One-hot encoding of categorical features.

use super::error::{DatasetError, Result};
use super::load::{RawColumn, RawDataset};
use super::{Dataset, FeatureOrigin};

impl RawDataset {
    /// Encodes the dataset into a numeric feature matrix.
    ///
    /// Every categorical feature column with L levels becomes L indicator
    /// columns (full one-hot, one column per level); numeric columns pass
    /// through unchanged. The sensitive and outcome columns are never
    /// encoded into features. The input must be free of missing cells —
    /// run [`RawDataset::drop_missing`] first.
    pub fn one_hot_encode(&self) -> Result<Dataset> {
        for i in 0..self.n_rows {
            if self.group[i].is_none() || self.outcome[i].is_none() {
                return Err(DatasetError::MissingValue {
                    row: i + 1,
                    column: if self.group[i].is_none() {
                        self.schema.sensitive().name.clone()
                    } else {
                        self.schema.outcome().name.clone()
                    },
                });
            }
        }

        let mut feature_names = Vec::new();
        let mut feature_origins = Vec::new();
        for col in &self.feature_columns {
            match col {
                RawColumn::Numeric { name, .. } => {
                    feature_names.push(name.clone());
                    feature_origins.push(FeatureOrigin::Numeric {
                        source: name.clone(),
                    });
                }
                RawColumn::Categorical { name, levels, .. } => {
                    for level in levels {
                        feature_names.push(format!("{name}={level}"));
                        feature_origins.push(FeatureOrigin::Indicator {
                            source: name.clone(),
                            level: level.clone(),
                        });
                    }
                }
            }
        }
        let n_features = feature_names.len();

        let mut features = Vec::with_capacity(self.n_rows * n_features);
        for i in 0..self.n_rows {
            for col in &self.feature_columns {
                match col {
                    RawColumn::Numeric { name, values } => match values[i] {
                        Some(v) => features.push(v),
                        None => {
                            return Err(DatasetError::MissingValue {
                                row: i + 1,
                                column: name.clone(),
                            })
                        }
                    },
                    RawColumn::Categorical {
                        name,
                        levels,
                        codes,
                    } => match codes[i] {
                        Some(code) => {
                            for l in 0..levels.len() {
                                features.push(if l as u32 == code { 1.0 } else { 0.0 });
                            }
                        }
                        None => {
                            return Err(DatasetError::MissingValue {
                                row: i + 1,
                                column: name.clone(),
                            })
                        }
                    },
                }
            }
        }

        let group: Vec<u16> = self.group.iter().map(|g| g.unwrap()).collect();
        let outcome: Vec<u8> = self.outcome.iter().map(|y| y.unwrap()).collect();
        Dataset::from_parts(
            features,
            n_features,
            feature_names,
            feature_origins,
            group,
            self.schema.group_names(),
            outcome,
            None,
            self.schema.clone(),
        )
    }
}
