//! Bagged forests of weighted Gini trees.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::exec;

use super::tree::{grow_tree, GrowConfig, Tree};
use super::ForestParams;

/// Fits `n_trees` trees on bootstrap resamples with per-node feature
/// subsampling. Each tree derives its own RNG from (seed, tree index), so
/// the forest is identical whether trees are fit in parallel or serially.
pub(super) fn fit_forest(data: &Dataset, params: &ForestParams, seed: u64) -> Vec<Tree> {
    let n = data.n_rows();
    let mtry = params.features_per_split.resolve(data.n_features());
    exec::par_map_range(params.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(exec::derive_seed(seed, t as u64));
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let cfg = GrowConfig {
            max_depth: params.max_depth,
            min_leaf: 1,
            features_per_split: Some(mtry),
        };
        let mut rng_opt = Some(&mut rng);
        grow_tree(data, rows, &cfg, &mut rng_opt)
    })
}
