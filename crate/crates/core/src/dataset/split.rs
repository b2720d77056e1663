//! Seeded stratified train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::error::{DatasetError, Result};
use super::{Dataset, SplitPair};

impl Dataset {
    /// Splits into train/test partitions stratified on (group × outcome).
    ///
    /// Within each stratum of size m the train side receives round(ratio·m)
    /// rows (half-up), chosen by a seeded uniform shuffle, with the guard
    /// that a stratum of m ≥ 2 always keeps at least one test row. The
    /// result is deterministic for a fixed seed and identical regardless of
    /// thread count.
    pub fn stratified_split(&self, ratio: f64, seed: u64) -> Result<SplitPair> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(DatasetError::InvalidRatio { ratio });
        }
        if self.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }

        let n_groups = self.n_groups();
        let mut strata: Vec<Vec<usize>> = vec![Vec::new(); n_groups * 2];
        for i in 0..self.n_rows() {
            let key = usize::from(self.group()[i]) * 2 + usize::from(self.outcome()[i]);
            strata[key].push(i);
        }
        for (key, stratum) in strata.iter().enumerate() {
            if stratum.is_empty() {
                return Err(DatasetError::EmptyStratum {
                    group: self.group_names()[key / 2].clone(),
                    outcome: (key % 2) as u8,
                });
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train_rows = Vec::new();
        let mut test_rows = Vec::new();
        for stratum in &mut strata {
            stratum.shuffle(&mut rng);
            let m = stratum.len();
            let mut take = (ratio * m as f64).round() as usize;
            if take == m && m >= 2 {
                take = m - 1;
            }
            train_rows.extend_from_slice(&stratum[..take]);
            test_rows.extend_from_slice(&stratum[take..]);
        }
        train_rows.sort_unstable();
        test_rows.sort_unstable();

        Ok(SplitPair {
            train: self.subset(&train_rows),
            test: self.subset(&test_rows),
            seed,
            ratio,
        })
    }
}
