//! Reweighting: expected-over-observed cell weights.

use crate::dataset::Dataset;

use super::{check_indicator, MitigationError, Result};

/// Computes per-row weights w(s, y) = N(s)·N(y) / (N·N(s, y)) from the
/// joint distribution of the binarized group indicator and the outcome.
///
/// Under these weights group and label become statistically independent:
/// the weighted positive rate is identical on both sides, and the total
/// weight still sums to N. Requires all four (s, y) cells to be populated.
pub fn reweigh(data: &Dataset, s: &[u8]) -> Result<Vec<f64>> {
    check_indicator(data, s)?;
    let n = data.n_rows();
    let mut cells = [[0u64; 2]; 2];
    for i in 0..n {
        cells[usize::from(s[i])][usize::from(data.outcome()[i])] += 1;
    }
    for (si, row) in cells.iter().enumerate() {
        for (yi, &count) in row.iter().enumerate() {
            if count == 0 {
                return Err(MitigationError::EmptyCell {
                    s: si as u8,
                    y: yi as u8,
                });
            }
        }
    }
    let n_s = [cells[0][0] + cells[0][1], cells[1][0] + cells[1][1]];
    let n_y = [cells[0][0] + cells[1][0], cells[0][1] + cells[1][1]];
    let mut w = [[0.0; 2]; 2];
    for si in 0..2 {
        for yi in 0..2 {
            w[si][yi] = (n_s[si] * n_y[yi]) as f64 / (n as u64 * cells[si][yi]) as f64;
        }
    }
    Ok((0..n)
        .map(|i| w[usize::from(s[i])][usize::from(data.outcome()[i])])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(s: &[u8], y: &[u8]) -> (Dataset, Vec<u8>) {
        let rows: Vec<Vec<f64>> = (0..s.len()).map(|i| vec![i as f64]).collect();
        let data = Dataset::from_numeric_parts(
            rows,
            s.iter().map(|&v| u16::from(v)).collect(),
            vec!["unpriv".into(), "priv".into()],
            y.to_vec(),
        )
        .unwrap();
        (data, s.to_vec())
    }

    fn weighted_positive_rate(weights: &[f64], s: &[u8], y: &[u8], side: u8) -> f64 {
        let mut pos = 0.0;
        let mut tot = 0.0;
        for i in 0..s.len() {
            if s[i] == side {
                tot += weights[i];
                if y[i] == 1 {
                    pos += weights[i];
                }
            }
        }
        pos / tot
    }

    #[test]
    fn worked_example_matches_formula() {
        // N=10: (1,1)x4, (1,0)x2, (0,1)x1, (0,0)x3
        let s = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
        let y = [1, 1, 1, 1, 0, 0, 1, 0, 0, 0];
        let (data, s) = dataset(&s, &y);
        let w = reweigh(&data, &s).unwrap();
        assert!((w[0] - 0.75).abs() < 1e-12); // (1,1)
        assert!((w[4] - 1.5).abs() < 1e-12); // (1,0)
        assert!((w[6] - 2.0).abs() < 1e-12); // (0,1)
        assert!((w[7] - 2.0 / 3.0).abs() < 1e-12); // (0,0)

        let p1 = weighted_positive_rate(&w, &s, &y, 1);
        let p0 = weighted_positive_rate(&w, &s, &y, 0);
        assert!((p1 - 0.5).abs() < 1e-12);
        assert!((p0 - 0.5).abs() < 1e-12);
        let total: f64 = w.iter().sum();
        assert!((total - 10.0).abs() < 1e-9);
    }

    #[test]
    fn independent_cells_get_unit_weights() {
        // P(y=1) = 0.5 on both sides
        let s = [1, 1, 1, 1, 0, 0, 0, 0];
        let y = [1, 1, 0, 0, 1, 1, 0, 0];
        let (data, s) = dataset(&s, &y);
        let w = reweigh(&data, &s).unwrap();
        for v in w {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_cell_is_an_error() {
        let s = [1, 1, 0, 0];
        let y = [1, 1, 1, 0]; // no (s=1, y=0) rows
        let (data, s) = dataset(&s, &y);
        assert!(matches!(
            reweigh(&data, &s).unwrap_err(),
            MitigationError::EmptyCell { s: 1, y: 0 }
        ));
    }
}
