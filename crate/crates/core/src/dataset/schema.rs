//! Column schema for tabular datasets.
//!
//! A schema declares every column of a CSV source: its role (model feature,
//! sensitive attribute, or outcome), its kind, and the closed set of levels
//! for categorical columns. Schemas are serialized as JSON manifests with
//! exactly the field names used here.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::error::{DatasetError, Result};

/// What a column contributes to the learning problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Predictor column, included in the encoded feature matrix.
    Feature,
    /// Group-membership column audits condition on; never encoded as a feature.
    Sensitive,
    /// Binary target column; level index 1 is the favorable outcome.
    Outcome,
}

/// Value kind of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Numeric,
    Categorical,
}

/// Declaration of a single CSV column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
    pub kind: Kind,
    /// Closed set of admissible values for categorical columns, in code order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

impl ColumnSpec {
    pub fn numeric_feature(name: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            role: Role::Feature,
            kind: Kind::Numeric,
            levels: None,
        }
    }

    pub fn categorical(name: impl Into<String>, role: Role, levels: Vec<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            role,
            kind: Kind::Categorical,
            levels: Some(levels),
        }
    }

    pub fn levels(&self) -> &[String] {
        self.levels.as_deref().unwrap_or(&[])
    }
}

/// Ordered column declarations plus the token that marks a missing cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub missing_sentinel: String,
}

impl Schema {
    /// Builds a schema and checks its invariants.
    pub fn new(columns: Vec<ColumnSpec>, missing_sentinel: impl Into<String>) -> Result<Self> {
        let schema = Schema {
            columns,
            missing_sentinel: missing_sentinel.into(),
        };
        schema.validate()?;
        Ok(schema)
    }

    /// Checks structural invariants: unique names, exactly one sensitive and
    /// one outcome column, well-formed level lists, binary outcome.
    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| DatasetError::SchemaInvalid { reason };
        if self.columns.is_empty() {
            return Err(invalid("schema declares no columns".into()));
        }
        for (i, a) in self.columns.iter().enumerate() {
            for b in &self.columns[i + 1..] {
                if a.name == b.name {
                    return Err(invalid(format!("duplicate column name `{}`", a.name)));
                }
            }
        }
        let sensitive: Vec<_> = self.by_role(Role::Sensitive).collect();
        if sensitive.len() != 1 {
            return Err(invalid(format!(
                "expected exactly one sensitive column, found {}",
                sensitive.len()
            )));
        }
        let outcome: Vec<_> = self.by_role(Role::Outcome).collect();
        if outcome.len() != 1 {
            return Err(invalid(format!(
                "expected exactly one outcome column, found {}",
                outcome.len()
            )));
        }
        for col in &self.columns {
            match col.kind {
                Kind::Categorical => {
                    let levels = col
                        .levels
                        .as_ref()
                        .ok_or_else(|| {
                            invalid(format!("categorical column `{}` lists no levels", col.name))
                        })?;
                    if levels.is_empty() {
                        return Err(invalid(format!(
                            "categorical column `{}` lists no levels",
                            col.name
                        )));
                    }
                    for (i, a) in levels.iter().enumerate() {
                        if levels[i + 1..].contains(a) {
                            return Err(invalid(format!(
                                "column `{}` has duplicate level `{a}`",
                                col.name
                            )));
                        }
                        if *a == self.missing_sentinel {
                            return Err(invalid(format!(
                                "column `{}` level `{a}` collides with the missing sentinel",
                                col.name
                            )));
                        }
                    }
                }
                Kind::Numeric => {
                    if col.levels.is_some() {
                        return Err(invalid(format!(
                            "numeric column `{}` must not list levels",
                            col.name
                        )));
                    }
                }
            }
        }
        let out = outcome[0];
        if out.kind != Kind::Categorical || out.levels().len() != 2 {
            return Err(invalid(format!(
                "outcome column `{}` must be categorical with exactly 2 levels",
                out.name
            )));
        }
        let sens = sensitive[0];
        if sens.kind != Kind::Categorical {
            return Err(invalid(format!(
                "sensitive column `{}` must be categorical",
                sens.name
            )));
        }
        Ok(())
    }

    pub fn by_role(&self, role: Role) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(move |c| c.role == role)
    }

    pub fn sensitive(&self) -> &ColumnSpec {
        self.by_role(Role::Sensitive).next().expect("validated")
    }

    pub fn outcome(&self) -> &ColumnSpec {
        self.by_role(Role::Outcome).next().expect("validated")
    }

    /// Group names, in code order (sensitive column levels).
    pub fn group_names(&self) -> Vec<String> {
        self.sensitive().levels().to_vec()
    }

    /// Reads and validates a JSON schema manifest.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let schema: Schema = serde_json::from_str(&text).map_err(|e| {
            DatasetError::SchemaInvalid {
                reason: format!("manifest parse error: {e}"),
            }
        })?;
        schema.validate()?;
        Ok(schema)
    }

    /// Writes the schema as a JSON manifest.
    pub fn to_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("schema serializes");
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_schema() -> Schema {
        Schema::new(
            vec![
                ColumnSpec::numeric_feature("gpa"),
                ColumnSpec::categorical(
                    "lang",
                    Role::Feature,
                    vec!["English".into(), "Spanish".into()],
                ),
                ColumnSpec::categorical(
                    "race",
                    Role::Sensitive,
                    vec!["White".into(), "Black".into()],
                ),
                ColumnSpec::categorical("attain", Role::Outcome, vec!["0".into(), "1".into()]),
            ],
            "",
        )
        .unwrap()
    }

    #[test]
    fn valid_schema_passes() {
        demo_schema();
    }

    #[test]
    fn rejects_two_sensitive_columns() {
        let err = Schema::new(
            vec![
                ColumnSpec::categorical("a", Role::Sensitive, vec!["x".into()]),
                ColumnSpec::categorical("b", Role::Sensitive, vec!["y".into()]),
                ColumnSpec::categorical("y", Role::Outcome, vec!["0".into(), "1".into()]),
            ],
            "",
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::SchemaInvalid { .. }));
    }

    #[test]
    fn rejects_nonbinary_outcome() {
        let err = Schema::new(
            vec![
                ColumnSpec::categorical("s", Role::Sensitive, vec!["x".into()]),
                ColumnSpec::categorical(
                    "y",
                    Role::Outcome,
                    vec!["0".into(), "1".into(), "2".into()],
                ),
            ],
            "",
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::SchemaInvalid { .. }));
    }

    #[test]
    fn rejects_duplicate_levels() {
        let err = Schema::new(
            vec![
                ColumnSpec::categorical("s", Role::Sensitive, vec!["x".into(), "x".into()]),
                ColumnSpec::categorical("y", Role::Outcome, vec!["0".into(), "1".into()]),
            ],
            "",
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::SchemaInvalid { .. }));
    }

    #[test]
    fn manifest_round_trips() {
        let schema = demo_schema();
        let dir = std::env::temp_dir().join("fairlens_schema_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("schema.json");
        schema.to_json_file(&path).unwrap();
        let back = Schema::from_json_file(&path).unwrap();
        assert_eq!(back.columns.len(), schema.columns.len());
        assert_eq!(back.sensitive().name, "race");
        assert_eq!(back.outcome().levels(), schema.outcome().levels());
    }
}
