//! Stratified k-fold cross-validated grid search.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::exec;

use super::{fit, Hyperparams, ModelError, ModelKind, Result};

/// Partitions row indices into k folds stratified on (group × outcome).
///
/// Rows are dealt round-robin with a cursor that persists across strata, so
/// fold sizes differ by at most one globally and per stratum. Deterministic
/// for a fixed seed.
pub fn stratified_fold_indices(data: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(ModelError::InvalidFolds { k });
    }
    let n_groups = data.n_groups();
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); n_groups * 2];
    for i in 0..data.n_rows() {
        let key = usize::from(data.group()[i]) * 2 + usize::from(data.outcome()[i]);
        strata[key].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for stratum in &mut strata {
        stratum.shuffle(&mut rng);
        for &row in stratum.iter() {
            folds[cursor % k].push(row);
            cursor += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Selects the grid entry with the highest mean weighted validation
/// accuracy across k stratified folds. Ties break toward the earliest grid
/// entry; the whole search is deterministic for a fixed seed.
pub fn cross_validate(
    kind: ModelKind,
    grid: &[Hyperparams],
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<Hyperparams> {
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    for hp in grid {
        if hp.kind() != kind {
            return Err(ModelError::HyperparamsMismatch {
                expected: kind.token().into(),
                got: hp.kind().token().into(),
            });
        }
    }
    let folds = stratified_fold_indices(data, k, seed)?;

    // materialize each fold's train/validation datasets once
    let mut splits = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let in_fold = |i: &usize| fold.binary_search(i).is_ok();
        let train_rows: Vec<usize> = (0..data.n_rows()).filter(|i| !in_fold(i)).collect();
        let train = data.subset(&train_rows);
        let classes = train.outcome();
        if classes.is_empty() || classes.iter().all(|&y| y == classes[0]) {
            return Err(ModelError::FoldClassCollapse { fold: f });
        }
        splits.push((train, data.subset(fold)));
    }

    let mean_accuracy = |hp: &Hyperparams| -> Result<f64> {
        let mut total = 0.0;
        for (f, (train, val)) in splits.iter().enumerate() {
            let model = fit(kind, hp, train, exec::derive_seed(seed, f as u64))?;
            let pred = model.predict_all(val)?;
            let mut correct = 0.0;
            let mut weight = 0.0;
            for i in 0..val.n_rows() {
                weight += val.weights()[i];
                if pred[i] == val.outcome()[i] {
                    correct += val.weights()[i];
                }
            }
            total += correct / weight;
        }
        Ok(total / splits.len() as f64)
    };

    let scores = exec::par_map(grid, mean_accuracy);
    let mut best_idx = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, score) in scores.into_iter().enumerate() {
        let score = score?;
        if score > best_score {
            best_score = score;
            best_idx = i;
        }
    }
    Ok(grid[best_idx].clone())
}
