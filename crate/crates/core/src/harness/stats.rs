//! Box-plot statistics over result cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result, ResultsTable, Scope};

/// Five-number summary plus moments for one result cell.
///
/// Quartiles use linear interpolation of order statistics (type-7), the
/// convention is recorded in the run manifest. Undefined gaps are counted
/// separately and excluded from the statistics; a cell with no defined
/// values reports counts only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n_defined: usize,
    pub n_undefined: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
}

/// Type-7 quantile: linear interpolation at h = (n-1)p over sorted values.
fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
    }
}

fn summarize(values: &[Option<f64>]) -> BoxStats {
    let mut defined: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    let n_undefined = values.len() - defined.len();
    if defined.is_empty() {
        return BoxStats {
            n_defined: 0,
            n_undefined,
            min: None,
            q1: None,
            median: None,
            q3: None,
            max: None,
            mean: None,
            variance: None,
        };
    }
    defined.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = defined.len();
    let mean = defined.iter().sum::<f64>() / n as f64;
    let variance = if n < 2 {
        0.0
    } else {
        defined.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    };
    BoxStats {
        n_defined: n,
        n_undefined,
        min: Some(defined[0]),
        q1: Some(quantile_type7(&defined, 0.25)),
        median: Some(quantile_type7(&defined, 0.5)),
        q3: Some(quantile_type7(&defined, 0.75)),
        max: Some(defined[n - 1]),
        mean: Some(mean),
        variance: Some(variance),
    }
}

/// Per-cell box statistics keyed `model/mitigation/scope/group/notion`.
/// Accuracy rows are keyed `model/mitigation/overall/all/accuracy`.
pub fn boxplot_stats(results: &ResultsTable) -> Result<BTreeMap<String, BoxStats>> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut cells: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for r in &results.gaps {
        let key = format!(
            "{}/{}/{}/{}/{}",
            r.model,
            r.mitigation,
            r.scope.token(),
            r.group,
            r.notion.token()
        );
        cells.entry(key).or_default().push(r.value);
    }
    for r in &results.accuracies {
        let key = format!(
            "{}/{}/{}/all/accuracy",
            r.model,
            r.mitigation,
            Scope::Overall.token()
        );
        cells.entry(key).or_default().push(Some(r.accuracy));
    }
    Ok(cells
        .into_iter()
        .map(|(key, values)| (key, summarize(&values)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::GapRecord;
    use super::*;
    use crate::metrics::Notion;

    fn table_with_values(values: &[Option<f64>]) -> ResultsTable {
        let gaps = values
            .iter()
            .enumerate()
            .map(|(i, &value)| GapRecord {
                split: i as u32,
                model: "LR".into(),
                mitigation: "Baseline".into(),
                scope: Scope::Subgroup,
                group: "Black".into(),
                notion: Notion::StatisticalParity,
                value,
            })
            .collect();
        ResultsTable {
            gaps,
            accuracies: Vec::new(),
            failures: Vec::new(),
        }
    }

    #[test]
    fn quartiles_of_one_to_five() {
        let table = table_with_values(&[
            Some(1.0),
            Some(2.0),
            Some(3.0),
            Some(4.0),
            Some(5.0),
        ]);
        let stats = boxplot_stats(&table).unwrap();
        let cell = &stats["LR/Baseline/subgroup/Black/SP"];
        assert_eq!(cell.q1, Some(2.0));
        assert_eq!(cell.median, Some(3.0));
        assert_eq!(cell.q3, Some(4.0));
        assert_eq!(cell.min, Some(1.0));
        assert_eq!(cell.max, Some(5.0));
        assert_eq!(cell.mean, Some(3.0));
        assert_eq!(cell.variance, Some(2.5));
    }

    #[test]
    fn single_value_collapses_the_box() {
        let table = table_with_values(&[Some(0.7)]);
        let stats = boxplot_stats(&table).unwrap();
        let cell = &stats["LR/Baseline/subgroup/Black/SP"];
        for v in [cell.min, cell.q1, cell.median, cell.q3, cell.max] {
            assert_eq!(v, Some(0.7));
        }
        assert_eq!(cell.variance, Some(0.0));
    }

    #[test]
    fn all_undefined_cell_reports_counts_only() {
        let table = table_with_values(&[None, None, None]);
        let stats = boxplot_stats(&table).unwrap();
        let cell = &stats["LR/Baseline/subgroup/Black/SP"];
        assert_eq!(cell.n_defined, 0);
        assert_eq!(cell.n_undefined, 3);
        assert_eq!(cell.median, None);
    }

    #[test]
    fn box_ordering_invariant_holds() {
        let table = table_with_values(&[
            Some(0.3),
            Some(-0.2),
            Some(0.9),
            None,
            Some(0.1),
            Some(0.0),
        ]);
        let stats = boxplot_stats(&table).unwrap();
        let c = &stats["LR/Baseline/subgroup/Black/SP"];
        assert!(c.min <= c.q1 && c.q1 <= c.median && c.median <= c.q3 && c.q3 <= c.max);
        assert_eq!(c.n_undefined, 1);
    }

    #[test]
    fn empty_results_error() {
        let table = ResultsTable::default();
        assert!(matches!(
            boxplot_stats(&table).unwrap_err(),
            HarnessError::EmptyResults
        ));
    }
}
