//! Per-group outcome distribution summaries.

use std::fmt;

use serde::Serialize;

use super::error::{DatasetError, Result};
use super::Dataset;

/// One (group, outcome) cell of the distribution table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub group: String,
    pub outcome: u8,
    pub proportion: f64,
    pub count: u64,
}

/// Outcome distribution by group: for each group, P(outcome | group) and
/// counts, favorable outcome first. The two proportions of a group sum to 1.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionTable {
    pub rows: Vec<SummaryRow>,
}

impl Dataset {
    /// Summarizes the outcome distribution per group. Groups with no rows
    /// are omitted.
    pub fn summarize(&self) -> Result<DistributionTable> {
        if self.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        let mut counts = vec![[0u64; 2]; self.n_groups()];
        for i in 0..self.n_rows() {
            counts[usize::from(self.group()[i])][usize::from(self.outcome()[i])] += 1;
        }
        let mut rows = Vec::new();
        for (g, cell) in counts.iter().enumerate() {
            let total = cell[0] + cell[1];
            if total == 0 {
                continue;
            }
            for outcome in [1u8, 0u8] {
                let count = cell[usize::from(outcome)];
                rows.push(SummaryRow {
                    group: self.group_names()[g].clone(),
                    outcome,
                    proportion: count as f64 / total as f64,
                    count,
                });
            }
        }
        Ok(DistributionTable { rows })
    }
}

impl fmt::Display for DistributionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>8} {:>12} {:>8}", "group", "outcome", "proportion", "count")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<28} {:>8} {:>12.5} {:>8}",
                row.group, row.outcome, row.proportion, row.count
            )?;
        }
        Ok(())
    }
}
