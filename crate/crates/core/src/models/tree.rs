//! CART-style decision trees with weighted Gini splits.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

use super::TreeParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) enum Node {
    Leaf {
        /// Weighted fraction of positive rows in the leaf.
        score: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(super) struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub(super) fn score(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { score } => return *score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

pub(super) struct GrowConfig {
    pub max_depth: Option<u32>,
    pub min_leaf: usize,
    /// Features examined per split; `None` means all (plain CART).
    pub features_per_split: Option<usize>,
}

/// Fits a single tree on the full dataset (no bootstrap, all features).
pub(super) fn fit_tree(data: &Dataset, params: &TreeParams) -> Tree {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let cfg = GrowConfig {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        features_per_split: None,
    };
    grow_tree(data, rows, &cfg, &mut None)
}

/// Grows a tree over the given row multiset (bootstrap rows may repeat).
/// `rng` is consulted only for per-node feature subsampling.
pub(super) fn grow_tree(
    data: &Dataset,
    rows: Vec<usize>,
    cfg: &GrowConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Tree {
    let mut nodes = Vec::new();
    grow(&mut nodes, data, rows, 0, cfg, rng);
    Tree { nodes }
}

fn leaf_score(data: &Dataset, rows: &[usize]) -> f64 {
    let mut w_pos = 0.0;
    let mut w_tot = 0.0;
    for &i in rows {
        let w = data.weights()[i];
        w_tot += w;
        if data.outcome()[i] == 1 {
            w_pos += w;
        }
    }
    w_pos / w_tot
}

fn grow(
    nodes: &mut Vec<Node>,
    data: &Dataset,
    rows: Vec<usize>,
    depth: u32,
    cfg: &GrowConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> usize {
    let score = leaf_score(data, &rows);
    let pure = score == 0.0 || score == 1.0;
    let depth_capped = cfg.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_capped || rows.len() < 2 * cfg.min_leaf {
        nodes.push(Node::Leaf { score });
        return nodes.len() - 1;
    }

    let best = find_best_split(data, &rows, cfg, rng);
    let Some((feature, threshold)) = best else {
        nodes.push(Node::Leaf { score });
        return nodes.len() - 1;
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| data.feature(i, feature) <= threshold);
    // reserve the split slot before recursing so child indices are stable
    let slot = nodes.len();
    nodes.push(Node::Leaf { score });
    let left = grow(nodes, data, left_rows, depth + 1, cfg, rng);
    let right = grow(nodes, data, right_rows, depth + 1, cfg, rng);
    nodes[slot] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    slot
}

/// Weighted Gini impurity mass of a child: w_total * 2p(1-p).
fn gini_mass(w_pos: f64, w_tot: f64) -> f64 {
    if w_tot <= 0.0 {
        return 0.0;
    }
    let p = w_pos / w_tot;
    w_tot * 2.0 * p * (1.0 - p)
}

/// Finds the (feature, threshold) with minimal total child impurity.
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// An impure node splits even at zero Gini gain so that consistent data can
/// always be driven to purity. Ties resolve to the first candidate in
/// (feature, threshold) order, keeping training deterministic.
fn find_best_split(
    data: &Dataset,
    rows: &[usize],
    cfg: &GrowConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Option<(usize, f64)> {
    let p = data.n_features();
    let features: Vec<usize> = match (cfg.features_per_split, rng.as_deref_mut()) {
        (Some(m), Some(rng)) if m < p => {
            let mut idx = sample(rng, p, m).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..p).collect(),
    };

    let total_w: f64 = rows.iter().map(|&i| data.weights()[i]).sum();
    let total_w_pos: f64 = rows
        .iter()
        .filter(|&&i| data.outcome()[i] == 1)
        .map(|&i| data.weights()[i])
        .sum();

    let mut best: Option<(f64, usize, f64)> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for &f in &features {
        order.sort_unstable_by(|&a, &b| {
            data.feature(a, f)
                .partial_cmp(&data.feature(b, f))
                .unwrap()
        });
        let mut left_w = 0.0;
        let mut left_w_pos = 0.0;
        for k in 0..order.len() - 1 {
            let i = order[k];
            left_w += data.weights()[i];
            if data.outcome()[i] == 1 {
                left_w_pos += data.weights()[i];
            }
            let v = data.feature(i, f);
            let v_next = data.feature(order[k + 1], f);
            if v == v_next {
                continue;
            }
            let left_count = k + 1;
            let right_count = order.len() - left_count;
            if left_count < cfg.min_leaf || right_count < cfg.min_leaf {
                continue;
            }
            let impurity = gini_mass(left_w_pos, left_w)
                + gini_mass(total_w_pos - left_w_pos, total_w - left_w);
            if best.is_none_or(|(b, _, _)| impurity < b) {
                best = Some((impurity, f, 0.5 * (v + v_next)));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

#[cfg(test)]
mod tests {
    use super::super::{fit, Hyperparams, ModelKind, TreeParams};
    use crate::dataset::Dataset;

    fn xor_dataset() -> Dataset {
        // four replicated XOR corners: no single split has positive gain
        let mut rows = Vec::new();
        let mut outcome = Vec::new();
        for _ in 0..3 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                rows.push(vec![a, b]);
                outcome.push(u8::from(a != b));
            }
        }
        let group = vec![0u16; rows.len()];
        Dataset::from_numeric_parts(rows, group, vec!["g".into()], outcome).unwrap()
    }

    #[test]
    fn unbounded_tree_is_pure_on_consistent_data() {
        let data = xor_dataset();
        let hp = Hyperparams::DecisionTree(TreeParams {
            max_depth: None,
            min_leaf: 1,
        });
        let model = fit(ModelKind::DecisionTree, &hp, &data, 0).unwrap();
        let pred = model.predict_all(&data).unwrap();
        assert_eq!(pred, data.outcome());
    }

    #[test]
    fn depth_zero_is_a_majority_leaf() {
        let data = xor_dataset();
        let hp = Hyperparams::DecisionTree(TreeParams {
            max_depth: Some(0),
            min_leaf: 1,
        });
        let model = fit(ModelKind::DecisionTree, &hp, &data, 0).unwrap();
        let scores = model.score_all(&data).unwrap();
        assert!(scores.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn weighting_moves_the_leaf_vote() {
        // one x value, conflicting labels, weight 3:1 toward the positive
        let rows = vec![vec![0.0], vec![0.0], vec![0.0], vec![0.0]];
        let data = Dataset::from_numeric_parts(
            rows,
            vec![0, 0, 0, 0],
            vec!["g".into()],
            vec![1, 1, 1, 0],
        )
        .unwrap()
        .with_weights(vec![1.0, 1.0, 1.0, 1.0])
        .unwrap();
        let hp = Hyperparams::DecisionTree(TreeParams {
            max_depth: None,
            min_leaf: 1,
        });
        let model = fit(ModelKind::DecisionTree, &hp, &data, 0).unwrap();
        assert_eq!(model.score_row(&[0.0]).unwrap(), 0.75);

        let reweighted = data.with_weights(vec![0.5, 0.5, 0.5, 4.5]).unwrap();
        let model = fit(ModelKind::DecisionTree, &hp, &reweighted, 0).unwrap();
        assert_eq!(model.score_row(&[0.0]).unwrap(), 0.25);
    }

    #[test]
    fn min_leaf_blocks_small_splits() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let outcome: Vec<u8> = (0..10).map(|i| u8::from(i == 0)).collect();
        let data =
            Dataset::from_numeric_parts(rows, vec![0; 10], vec!["g".into()], outcome).unwrap();
        let hp = Hyperparams::DecisionTree(TreeParams {
            max_depth: None,
            min_leaf: 5,
        });
        let model = fit(ModelKind::DecisionTree, &hp, &data, 0).unwrap();
        // the lone positive cannot be isolated; every leaf holds >= 5 rows
        let s = model.score_row(&[0.0]).unwrap();
        assert!(s < 0.5);
    }
}
