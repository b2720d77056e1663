//! CSV ingestion and listwise deletion.

use std::path::Path;

use super::error::{DatasetError, Result};
use super::schema::{Kind, Role, Schema};

/// Feature column of a loaded-but-not-yet-encoded dataset. `None` marks a
/// missing cell.
#[derive(Debug, Clone)]
pub enum RawColumn {
    Numeric {
        name: String,
        values: Vec<Option<f64>>,
    },
    Categorical {
        name: String,
        levels: Vec<String>,
        codes: Vec<Option<u32>>,
    },
}

impl RawColumn {
    fn is_missing(&self, row: usize) -> bool {
        match self {
            RawColumn::Numeric { values, .. } => values[row].is_none(),
            RawColumn::Categorical { codes, .. } => codes[row].is_none(),
        }
    }

    fn keep_rows(&self, keep: &[usize]) -> RawColumn {
        match self {
            RawColumn::Numeric { name, values } => RawColumn::Numeric {
                name: name.clone(),
                values: keep.iter().map(|&i| values[i]).collect(),
            },
            RawColumn::Categorical {
                name,
                levels,
                codes,
            } => RawColumn::Categorical {
                name: name.clone(),
                levels: levels.clone(),
                codes: keep.iter().map(|&i| codes[i]).collect(),
            },
        }
    }
}

/// Loaded dataset that may still contain missing cells. Produced by
/// [`load_csv`]; consumed by [`RawDataset::drop_missing`] and
/// [`RawDataset::one_hot_encode`].
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub(super) schema: Schema,
    pub(super) feature_columns: Vec<RawColumn>,
    pub(super) group: Vec<Option<u16>>,
    pub(super) outcome: Vec<Option<u8>>,
    pub(super) n_rows: usize,
}

impl RawDataset {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// True if any cell of the row (feature, sensitive, or outcome) is missing.
    pub fn row_has_missing(&self, row: usize) -> bool {
        self.group[row].is_none()
            || self.outcome[row].is_none()
            || self.feature_columns.iter().any(|c| c.is_missing(row))
    }

    /// Listwise deletion: removes every row containing any missing cell.
    ///
    /// Missing sensitive or outcome values always cause removal; those
    /// columns are never imputed.
    pub fn drop_missing(&self) -> Result<RawDataset> {
        let keep: Vec<usize> = (0..self.n_rows)
            .filter(|&i| !self.row_has_missing(i))
            .collect();
        if keep.is_empty() {
            return Err(DatasetError::EmptyAfterCleaning);
        }
        Ok(RawDataset {
            schema: self.schema.clone(),
            feature_columns: self
                .feature_columns
                .iter()
                .map(|c| c.keep_rows(&keep))
                .collect(),
            group: keep.iter().map(|&i| self.group[i]).collect(),
            outcome: keep.iter().map(|&i| self.outcome[i]).collect(),
            n_rows: keep.len(),
        })
    }
}

/// Loads a CSV file against a schema. Cells equal to the missing sentinel
/// are flagged, not dropped; categorical cells must match a declared level.
///
/// The header must contain exactly the schema's column names, in any order.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<RawDataset> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    for h in &headers {
        if !schema.columns.iter().any(|c| &c.name == h) {
            return Err(DatasetError::UnexpectedColumn { column: h.clone() });
        }
    }
    let mut positions = Vec::with_capacity(schema.columns.len());
    for col in &schema.columns {
        let pos = headers
            .iter()
            .position(|h| h == &col.name)
            .ok_or_else(|| DatasetError::MissingColumn {
                column: col.name.clone(),
            })?;
        positions.push(pos);
    }

    let mut feature_columns: Vec<RawColumn> = schema
        .by_role(Role::Feature)
        .map(|c| match c.kind {
            Kind::Numeric => RawColumn::Numeric {
                name: c.name.clone(),
                values: Vec::new(),
            },
            Kind::Categorical => RawColumn::Categorical {
                name: c.name.clone(),
                levels: c.levels().to_vec(),
                codes: Vec::new(),
            },
        })
        .collect();
    let mut group: Vec<Option<u16>> = Vec::new();
    let mut outcome: Vec<Option<u8>> = Vec::new();

    let sentinel = schema.missing_sentinel.clone();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1; // 1-based data row for error messages
        let mut feature_slot = 0;
        for (col, &pos) in schema.columns.iter().zip(&positions) {
            let cell = record.get(pos).unwrap_or("");
            match col.role {
                Role::Feature => {
                    match &mut feature_columns[feature_slot] {
                        RawColumn::Numeric { values, .. } => {
                            values.push(parse_numeric(cell, &sentinel, row, &col.name)?);
                        }
                        RawColumn::Categorical { levels, codes, .. } => {
                            codes.push(parse_level(cell, levels, &sentinel, row, &col.name)?);
                        }
                    }
                    feature_slot += 1;
                }
                Role::Sensitive => {
                    let code = parse_level(cell, col.levels(), &sentinel, row, &col.name)?;
                    group.push(code.map(|c| c as u16));
                }
                Role::Outcome => {
                    let code = parse_level(cell, col.levels(), &sentinel, row, &col.name)?;
                    outcome.push(code.map(|c| c as u8));
                }
            }
        }
    }

    Ok(RawDataset {
        schema: schema.clone(),
        feature_columns,
        n_rows: group.len(),
        group,
        outcome,
    })
}

fn parse_numeric(cell: &str, sentinel: &str, row: usize, column: &str) -> Result<Option<f64>> {
    if cell == sentinel {
        return Ok(None);
    }
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(DatasetError::UnparseableNumeric {
            row,
            column: column.to_owned(),
            value: cell.to_owned(),
        }),
    }
}

fn parse_level(
    cell: &str,
    levels: &[String],
    sentinel: &str,
    row: usize,
    column: &str,
) -> Result<Option<u32>> {
    if cell == sentinel {
        return Ok(None);
    }
    levels
        .iter()
        .position(|l| l == cell)
        .map(|i| Some(i as u32))
        .ok_or_else(|| DatasetError::UnknownLevel {
            row,
            column: column.to_owned(),
            value: cell.to_owned(),
        })
}

#[cfg(test)]
mod tests {
    use super::super::schema::{ColumnSpec, Role, Schema};
    use super::*;
    use std::io::Write;

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

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_valid_rows() {
        let f = write_csv("gpa,lang,race,attain\n3.5,English,White,1\n2.0,Spanish,Black,0\n3.9,English,White,1\n");
        let raw = load_csv(f.path(), &demo_schema()).unwrap();
        assert_eq!(raw.n_rows(), 3);
        assert_eq!(raw.group, vec![Some(0), Some(1), Some(0)]);
        assert_eq!(raw.outcome, vec![Some(1), Some(0), Some(1)]);
    }

    #[test]
    fn header_order_is_insensitive() {
        let f = write_csv("attain,race,lang,gpa\n1,White,English,3.5\n");
        let raw = load_csv(f.path(), &demo_schema()).unwrap();
        assert_eq!(raw.n_rows(), 1);
        assert_eq!(raw.outcome, vec![Some(1)]);
        match &raw.feature_columns[0] {
            RawColumn::Numeric { values, .. } => assert_eq!(values[0], Some(3.5)),
            _ => panic!("expected numeric column"),
        }
    }

    #[test]
    fn missing_header_column_errors() {
        let f = write_csv("gpa,lang,race\n3.5,English,White\n");
        let err = load_csv(f.path(), &demo_schema()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingColumn { column } if column == "attain"));
    }

    #[test]
    fn undeclared_header_column_errors() {
        let f = write_csv("gpa,lang,race,attain,extra\n3.5,English,White,1,x\n");
        let err = load_csv(f.path(), &demo_schema()).unwrap_err();
        assert!(matches!(err, DatasetError::UnexpectedColumn { column } if column == "extra"));
    }

    #[test]
    fn unknown_level_errors() {
        let f = write_csv("gpa,lang,race,attain\n3.5,English,Othr,1\n");
        let err = load_csv(f.path(), &demo_schema()).unwrap_err();
        match err {
            DatasetError::UnknownLevel { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "race", "Othr"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unparseable_numeric_errors() {
        let f = write_csv("gpa,lang,race,attain\nabc,English,White,1\n");
        let err = load_csv(f.path(), &demo_schema()).unwrap_err();
        assert!(matches!(err, DatasetError::UnparseableNumeric { .. }));
    }

    #[test]
    fn nonfinite_numeric_is_rejected() {
        let f = write_csv("gpa,lang,race,attain\nNaN,English,White,1\n");
        assert!(matches!(
            load_csv(f.path(), &demo_schema()).unwrap_err(),
            DatasetError::UnparseableNumeric { .. }
        ));
    }

    #[test]
    fn rfc4180_quoting_is_supported() {
        let schema = Schema::new(
            vec![
                ColumnSpec::numeric_feature("gpa"),
                ColumnSpec::categorical(
                    "home",
                    Role::Feature,
                    vec!["Two parents, married".into(), "Other".into()],
                ),
                ColumnSpec::categorical("race", Role::Sensitive, vec!["White".into()]),
                ColumnSpec::categorical("attain", Role::Outcome, vec!["0".into(), "1".into()]),
            ],
            "",
        )
        .unwrap();
        let f = write_csv("gpa,home,race,attain\n3.5,\"Two parents, married\",White,1\n");
        let raw = load_csv(f.path(), &schema).unwrap();
        assert_eq!(raw.n_rows(), 1);
        match &raw.feature_columns[1] {
            RawColumn::Categorical { codes, .. } => assert_eq!(codes[0], Some(0)),
            _ => panic!("expected categorical column"),
        }
    }

    #[test]
    fn drop_missing_removes_flagged_rows() {
        let f = write_csv(
            "gpa,lang,race,attain\n3.5,English,White,1\n,Spanish,Black,0\n2.5,English,Black,1\n3.0,Spanish,White,0\n",
        );
        let raw = load_csv(f.path(), &demo_schema()).unwrap();
        assert_eq!(raw.n_rows(), 4);
        let clean = raw.drop_missing().unwrap();
        assert_eq!(clean.n_rows(), 3);
    }

    #[test]
    fn drop_missing_is_identity_on_complete_data() {
        let f = write_csv("gpa,lang,race,attain\n3.5,English,White,1\n2.0,Spanish,Black,0\n");
        let raw = load_csv(f.path(), &demo_schema()).unwrap();
        let clean = raw.drop_missing().unwrap();
        assert_eq!(clean.n_rows(), raw.n_rows());
        assert_eq!(clean.group, raw.group);
        assert_eq!(clean.outcome, raw.outcome);
    }

    #[test]
    fn all_rows_missing_outcome_is_empty_after_cleaning() {
        let f = write_csv("gpa,lang,race,attain\n3.5,English,White,\n2.0,Spanish,Black,\n");
        let raw = load_csv(f.path(), &demo_schema()).unwrap();
        assert!(matches!(
            raw.drop_missing().unwrap_err(),
            DatasetError::EmptyAfterCleaning
        ));
    }

    #[test]
    fn missing_sensitive_always_drops_row() {
        let f = write_csv("gpa,lang,race,attain\n3.5,English,,1\n2.0,Spanish,Black,0\n");
        let raw = load_csv(f.path(), &demo_schema()).unwrap();
        let clean = raw.drop_missing().unwrap();
        assert_eq!(clean.n_rows(), 1);
        assert_eq!(clean.group, vec![Some(1)]);
    }
}
