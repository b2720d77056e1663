//! Disparate impact removal by rank-preserving quantile repair.
//!
//! Each selected column is repaired toward the cross-group median quantile
//! function: a value at within-group rank u moves toward
//! Q_med(u) = ½(Q₀(u) + Q₁(u)), interpolating the two group-conditional
//! empirical quantile functions. `lambda` = 0 leaves the data untouched;
//! `lambda` = 1 makes the group-conditional distributions coincide on
//! shared ranks. Ranks are averaged over ties, so the repair is a
//! nondecreasing transform within each group.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, FeatureOrigin};
use crate::exec;

use super::{check_indicator, MitigationError, Result};

/// Options for [`dir_repair_with_options`].
#[derive(Debug, Clone)]
pub struct DirOptions {
    /// Repair amount in [0, 1].
    pub lambda: f64,
    /// Columns to repair; `None` selects every numeric (non-indicator)
    /// feature column.
    pub columns: Option<Vec<usize>>,
    /// Also repair one-hot indicator groups by probabilistic relabeling
    /// toward the cross-group level distribution. Off by default; the
    /// relabeling preserves the 1-of-L structure but randomizes categories.
    pub repair_indicators: bool,
    /// Seed for the indicator relabeling draw (unused otherwise).
    pub seed: u64,
}

impl DirOptions {
    pub fn full_repair() -> Self {
        DirOptions {
            lambda: 1.0,
            columns: None,
            repair_indicators: false,
            seed: 0,
        }
    }
}

/// Quantile repair of numeric feature columns. `columns` defaults to all
/// numeric (non-indicator) features.
pub fn dir_repair(
    data: &Dataset,
    s: &[u8],
    lambda: f64,
    columns: Option<&[usize]>,
) -> Result<Dataset> {
    dir_repair_with_options(
        data,
        s,
        &DirOptions {
            lambda,
            columns: columns.map(<[usize]>::to_vec),
            repair_indicators: false,
            seed: 0,
        },
    )
}

pub fn dir_repair_with_options(data: &Dataset, s: &[u8], opts: &DirOptions) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&opts.lambda) {
        return Err(MitigationError::InvalidLambda { lambda: opts.lambda });
    }
    check_indicator(data, s)?;
    let columns: Vec<usize> = match &opts.columns {
        Some(cols) => {
            for &c in cols {
                let numeric = data
                    .feature_origins()
                    .get(c)
                    .is_some_and(FeatureOrigin::is_numeric);
                if !numeric {
                    return Err(MitigationError::NonNumericColumn { column: c });
                }
            }
            cols.clone()
        }
        None => data.numeric_feature_indices(),
    };
    if opts.lambda == 0.0 && !opts.repair_indicators {
        return Ok(data.clone());
    }
    for side in [0u8, 1u8] {
        if !s.contains(&side) {
            return Err(MitigationError::EmptySide { s: side });
        }
    }

    let n = data.n_rows();
    let p = data.n_features();
    let mut features: Vec<f64> = (0..n).flat_map(|i| data.row(i).to_vec()).collect();

    let repaired = exec::par_map(&columns, |&col| repair_column(data, s, col, opts.lambda));
    for (&col, column_values) in columns.iter().zip(&repaired) {
        for (i, &v) in column_values.iter().enumerate() {
            features[i * p + col] = v;
        }
    }

    if opts.repair_indicators {
        relabel_indicator_groups(data, s, opts, &mut features)?;
    }

    Ok(data.with_features(features)?)
}

/// Per-row within-group ranks in [0, 1], averaging over ties.
fn group_ranks(values: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let m = values.len();
    if m == 1 {
        return vec![(values[0].0, 0.5)];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut ranks = Vec::with_capacity(m);
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && sorted[j + 1].1 == sorted[i].1 {
            j += 1;
        }
        let avg_pos = (i + j) as f64 / 2.0;
        let rank = avg_pos / (m - 1) as f64;
        for item in &sorted[i..=j] {
            ranks.push((item.0, rank));
        }
        i = j + 1;
    }
    ranks
}

/// Empirical quantile by linear interpolation of order statistics.
fn quantile(sorted: &[f64], u: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let t = u * (m - 1) as f64;
    let lo = t.floor() as usize;
    let hi = t.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (t - lo as f64)
    }
}

fn repair_column(data: &Dataset, s: &[u8], col: usize, lambda: f64) -> Vec<f64> {
    let n = data.n_rows();
    let mut by_side: [Vec<(usize, f64)>; 2] = [Vec::new(), Vec::new()];
    for i in 0..n {
        by_side[usize::from(s[i])].push((i, data.feature(i, col)));
    }
    let sorted: [Vec<f64>; 2] = [
        sorted_values(&by_side[0]),
        sorted_values(&by_side[1]),
    ];

    let mut out: Vec<f64> = (0..n).map(|i| data.feature(i, col)).collect();
    for side in 0..2 {
        for (row, rank) in group_ranks(&by_side[side]) {
            let median_q = 0.5 * (quantile(&sorted[0], rank) + quantile(&sorted[1], rank));
            out[row] = (1.0 - lambda) * out[row] + lambda * median_q;
        }
    }
    out
}

fn sorted_values(entries: &[(usize, f64)]) -> Vec<f64> {
    let mut v: Vec<f64> = entries.iter().map(|&(_, x)| x).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Moves each one-hot indicator group's level distribution toward the
/// cross-group mean by probabilistic relabeling. Preserves exactly one
/// active indicator per row.
fn relabel_indicator_groups(
    data: &Dataset,
    s: &[u8],
    opts: &DirOptions,
    features: &mut [f64],
) -> Result<()> {
    let p = data.n_features();
    // collect indicator column groups by source column, in encounter order
    let mut sources: Vec<(String, Vec<usize>)> = Vec::new();
    for (j, origin) in data.feature_origins().iter().enumerate() {
        if let FeatureOrigin::Indicator { source, .. } = origin {
            match sources.iter_mut().find(|(name, _)| name == source) {
                Some((_, cols)) => cols.push(j),
                None => sources.push((source.clone(), vec![j])),
            }
        }
    }

    for (source_idx, (_, cols)) in sources.iter().enumerate() {
        let levels = cols.len();
        let mut side_rows: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for i in 0..data.n_rows() {
            side_rows[usize::from(s[i])].push(i);
        }
        let level_of = |features: &[f64], row: usize| -> usize {
            cols.iter()
                .position(|&c| features[row * p + c] == 1.0)
                .unwrap_or(0)
        };
        let mut dist = [vec![0.0; levels], vec![0.0; levels]];
        for side in 0..2 {
            for &row in &side_rows[side] {
                dist[side][level_of(features, row)] += 1.0;
            }
            let total = side_rows[side].len() as f64;
            dist[side].iter_mut().for_each(|d| *d /= total);
        }
        let mean: Vec<f64> = (0..levels)
            .map(|l| 0.5 * (dist[0][l] + dist[1][l]))
            .collect();

        for side in 0..2 {
            let target: Vec<f64> = (0..levels)
                .map(|l| (1.0 - opts.lambda) * dist[side][l] + opts.lambda * mean[l])
                .collect();
            let deficit: Vec<f64> = (0..levels)
                .map(|l| (target[l] - dist[side][l]).max(0.0))
                .collect();
            let deficit_total: f64 = deficit.iter().sum();
            if deficit_total <= 0.0 {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(
                opts.seed,
                (source_idx * 2 + side) as u64,
            ));
            for &row in &side_rows[side] {
                let l = level_of(features, row);
                let keep = if dist[side][l] > 0.0 {
                    (target[l] / dist[side][l]).min(1.0)
                } else {
                    1.0
                };
                if rng.random::<f64>() >= keep {
                    // reassign to a deficit level proportional to unmet mass
                    let draw: f64 = rng.random::<f64>() * deficit_total;
                    let mut acc = 0.0;
                    let mut new_level = levels - 1;
                    for (cand, &d) in deficit.iter().enumerate() {
                        acc += d;
                        if draw < acc {
                            new_level = cand;
                            break;
                        }
                    }
                    features[row * p + cols[l]] = 0.0;
                    features[row * p + cols[new_level]] = 1.0;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_dataset(side0: &[f64], side1: &[f64]) -> (Dataset, Vec<u8>) {
        let mut rows = Vec::new();
        let mut group = Vec::new();
        let mut s = Vec::new();
        for &v in side0 {
            rows.push(vec![v]);
            group.push(0u16);
            s.push(0u8);
        }
        for &v in side1 {
            rows.push(vec![v]);
            group.push(1u16);
            s.push(1u8);
        }
        let outcome: Vec<u8> = (0..rows.len()).map(|i| (i % 2) as u8).collect();
        let data = Dataset::from_numeric_parts(
            rows,
            group,
            vec!["unpriv".into(), "priv".into()],
            outcome,
        )
        .unwrap();
        (data, s)
    }

    fn column(data: &Dataset) -> Vec<f64> {
        (0..data.n_rows()).map(|i| data.feature(i, 0)).collect()
    }

    #[test]
    fn lambda_zero_is_bit_identical() {
        let (data, s) = column_dataset(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        let repaired = dir_repair(&data, &s, 0.0, None).unwrap();
        assert_eq!(column(&repaired), column(&data));
    }

    #[test]
    fn full_repair_meets_at_the_median_quantiles() {
        let (data, s) = column_dataset(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        let repaired = dir_repair(&data, &s, 1.0, None).unwrap();
        assert_eq!(column(&repaired), vec![2.5, 3.5, 4.5, 2.5, 3.5, 4.5]);
    }

    #[test]
    fn identical_distributions_are_a_fixed_point() {
        let vals = [0.3, 1.7, 2.2, 5.0];
        let (data, s) = column_dataset(&vals, &vals);
        for lambda in [0.25, 0.5, 1.0] {
            let repaired = dir_repair(&data, &s, lambda, None).unwrap();
            assert_eq!(column(&repaired), column(&data), "lambda {lambda}");
        }
    }

    #[test]
    fn within_group_rank_order_is_preserved() {
        let (data, s) = column_dataset(&[9.0, 1.0, 4.0, 4.0, 7.0], &[0.0, 10.0, 20.0]);
        let repaired = dir_repair(&data, &s, 0.7, None).unwrap();
        let before = column(&data);
        let after = column(&repaired);
        for side in [0u8, 1u8] {
            let rows: Vec<usize> = (0..data.n_rows()).filter(|&i| s[i] == side).collect();
            for &a in &rows {
                for &b in &rows {
                    if before[a] < before[b] {
                        assert!(after[a] <= after[b]);
                    }
                    if before[a] == before[b] {
                        assert_eq!(after[a], after[b]);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_lambda_is_rejected() {
        let (data, s) = column_dataset(&[1.0], &[2.0]);
        assert!(matches!(
            dir_repair(&data, &s, 1.5, None).unwrap_err(),
            MitigationError::InvalidLambda { .. }
        ));
    }

    #[test]
    fn indicator_column_is_rejected_without_flag() {
        // build a dataset with an indicator origin via one-hot encoding
        use crate::dataset::{load_csv, ColumnSpec, Role, Schema};
        use std::io::Write;
        let schema = Schema::new(
            vec![
                ColumnSpec::categorical("c", Role::Feature, vec!["a".into(), "b".into()]),
                ColumnSpec::categorical("race", Role::Sensitive, vec!["W".into(), "B".into()]),
                ColumnSpec::categorical("y", Role::Outcome, vec!["0".into(), "1".into()]),
            ],
            "",
        )
        .unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"c,race,y\na,W,1\nb,B,0\n").unwrap();
        let data = load_csv(f.path(), &schema)
            .unwrap()
            .one_hot_encode()
            .unwrap();
        let s = vec![1u8, 0];
        assert!(matches!(
            dir_repair(&data, &s, 1.0, Some(&[0])).unwrap_err(),
            MitigationError::NonNumericColumn { column: 0 }
        ));
        // default column selection skips indicators entirely
        let repaired = dir_repair(&data, &s, 1.0, None).unwrap();
        assert_eq!(repaired.row(0), data.row(0));
    }

    #[test]
    fn indicator_relabeling_preserves_one_hot() {
        use crate::dataset::{load_csv, ColumnSpec, Role, Schema};
        use std::io::Write;
        let schema = Schema::new(
            vec![
                ColumnSpec::categorical(
                    "c",
                    Role::Feature,
                    vec!["a".into(), "b".into(), "z".into()],
                ),
                ColumnSpec::categorical("race", Role::Sensitive, vec!["W".into(), "B".into()]),
                ColumnSpec::categorical("y", Role::Outcome, vec!["0".into(), "1".into()]),
            ],
            "",
        )
        .unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let mut text = String::from("c,race,y\n");
        for i in 0..40 {
            let level = if i % 2 == 0 { "a" } else { "b" };
            let race = if i < 20 { "W" } else { "B" };
            text.push_str(&format!("{level},{race},{}\n", i % 2));
        }
        f.write_all(text.as_bytes()).unwrap();
        let data = load_csv(f.path(), &schema)
            .unwrap()
            .one_hot_encode()
            .unwrap();
        let s: Vec<u8> = (0..40).map(|i| u8::from(i < 20)).collect();
        let opts = DirOptions {
            lambda: 1.0,
            columns: Some(vec![]),
            repair_indicators: true,
            seed: 3,
        };
        let repaired = dir_repair_with_options(&data, &s, &opts).unwrap();
        for i in 0..repaired.n_rows() {
            let active: f64 = repaired.row(i).iter().sum();
            assert_eq!(active, 1.0);
        }
    }
}
