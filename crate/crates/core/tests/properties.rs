//! Property tests for structural invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use fairlens::dataset::Dataset;
use fairlens::metrics::{self, Notion};
use fairlens::mitigation::{dir_repair, reweigh};
use fairlens::models::{
    fit, FeatureSubset, ForestParams, Hyperparams, LogisticParams, ModelKind, SvmParams,
    TreeParams,
};

fn two_group_labels(n: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u16>)> {
    (
        proptest::collection::vec(0..2u8, n),
        proptest::collection::vec(0..2u8, n),
        proptest::collection::vec(0..2u16, n),
    )
        .prop_filter("both groups present", |(_, _, g)| {
            g.contains(&0) && g.contains(&1)
        })
}

fn set(codes: &[u16]) -> BTreeSet<u16> {
    codes.iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaps_are_bounded_and_antisymmetric((y_true, y_pred, group) in (2usize..40).prop_flat_map(two_group_labels)) {
        for notion in Notion::ALL {
            let ab = metrics::fairness_gap(notion, &y_true, &y_pred, &group, &set(&[0]), &set(&[1])).unwrap();
            let ba = metrics::fairness_gap(notion, &y_true, &y_pred, &group, &set(&[1]), &set(&[0])).unwrap();
            match (ab.value, ba.value) {
                (Some(x), Some(y)) => {
                    prop_assert!((-1.0..=1.0).contains(&x));
                    prop_assert!((x + y).abs() < 1e-12);
                }
                (None, None) => {}
                other => prop_assert!(false, "asymmetric definedness {other:?}"),
            }
        }
    }

    #[test]
    fn metrics_are_permutation_invariant(
        (y_true, y_pred, group) in (2usize..30).prop_flat_map(two_group_labels),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..y_true.len()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let yt: Vec<u8> = perm.iter().map(|&i| y_true[i]).collect();
        let yp: Vec<u8> = perm.iter().map(|&i| y_pred[i]).collect();
        let g: Vec<u16> = perm.iter().map(|&i| group[i]).collect();

        prop_assert_eq!(
            metrics::accuracy(&y_true, &y_pred).unwrap(),
            metrics::accuracy(&yt, &yp).unwrap()
        );
        for notion in Notion::ALL {
            let a = metrics::fairness_gap(notion, &y_true, &y_pred, &group, &set(&[0]), &set(&[1])).unwrap();
            let b = metrics::fairness_gap(notion, &yt, &yp, &g, &set(&[0]), &set(&[1])).unwrap();
            prop_assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn perfect_predictions_zero_the_error_gaps((y_true, _, group) in (2usize..40).prop_flat_map(two_group_labels)) {
        for notion in [Notion::EqualOpportunity, Notion::PredictiveEquality] {
            let gap = metrics::fairness_gap(notion, &y_true, &y_true, &group, &set(&[0]), &set(&[1])).unwrap();
            if let Some(v) = gap.value {
                prop_assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn split_conserves_rows_and_respects_bound(
        sizes in proptest::collection::vec(1usize..12, 4),
        ratio in 0.15f64..0.85,
        seed in any::<u64>(),
    ) {
        let mut rows = Vec::new();
        let mut group = Vec::new();
        let mut outcome = Vec::new();
        let mut id = 0.0f64;
        for (k, &m) in sizes.iter().enumerate() {
            for _ in 0..m {
                rows.push(vec![id]);
                group.push((k / 2) as u16);
                outcome.push((k % 2) as u8);
                id += 1.0;
            }
        }
        let n = rows.len();
        let data = Dataset::from_numeric_parts(rows, group, vec!["a".into(), "b".into()], outcome).unwrap();
        let pair = data.stratified_split(ratio, seed).unwrap();

        let mut ids: Vec<u64> = (0..pair.train.n_rows()).map(|i| pair.train.feature(i, 0) as u64).collect();
        ids.extend((0..pair.test.n_rows()).map(|i| pair.test.feature(i, 0) as u64));
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n as u64).collect::<Vec<_>>());

        for g in 0..2u16 {
            for y in 0..2u8 {
                let tr = (0..pair.train.n_rows())
                    .filter(|&i| pair.train.group()[i] == g && pair.train.outcome()[i] == y)
                    .count() as f64;
                let te = (0..pair.test.n_rows())
                    .filter(|&i| pair.test.group()[i] == g && pair.test.outcome()[i] == y)
                    .count() as f64;
                let m = tr + te;
                prop_assert!((tr / m - ratio).abs() <= 1.0 / m + 1e-12);
            }
        }
    }

    #[test]
    fn reweighting_enforces_independence(
        cells in proptest::collection::vec(1usize..25, 4),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        // one entry per (s, y) cell guaranteed nonempty
        let mut s = Vec::new();
        let mut y = Vec::new();
        for (k, &m) in cells.iter().enumerate() {
            for _ in 0..m {
                s.push((k / 2) as u8);
                y.push((k % 2) as u8);
            }
        }
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let s: Vec<u8> = order.iter().map(|&i| s[i]).collect();
        let y: Vec<u8> = order.iter().map(|&i| y[i]).collect();

        let rows: Vec<Vec<f64>> = (0..s.len()).map(|i| vec![i as f64]).collect();
        let data = Dataset::from_numeric_parts(
            rows,
            s.iter().map(|&v| u16::from(v)).collect(),
            vec!["u".into(), "p".into()],
            y.clone(),
        ).unwrap();
        let w = reweigh(&data, &s).unwrap();

        let mut mass = [[0.0f64; 2]; 2];
        for i in 0..s.len() {
            mass[usize::from(s[i])][usize::from(y[i])] += w[i];
        }
        let p1 = mass[1][1] / (mass[1][0] + mass[1][1]);
        let p0 = mass[0][1] / (mass[0][0] + mass[0][1]);
        prop_assert!((p1 - p0).abs() < 1e-9);
        let total: f64 = w.iter().sum();
        prop_assert!((total - s.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn dir_repair_preserves_within_group_order(
        values0 in proptest::collection::vec(-50.0f64..50.0, 3..40),
        values1 in proptest::collection::vec(-50.0f64..50.0, 3..40),
        lambda in 0.0f64..=1.0,
    ) {
        let mut rows = Vec::new();
        let mut group = Vec::new();
        let mut s = Vec::new();
        for &v in &values0 {
            rows.push(vec![v]);
            group.push(0u16);
            s.push(0u8);
        }
        for &v in &values1 {
            rows.push(vec![v]);
            group.push(1u16);
            s.push(1u8);
        }
        let outcome: Vec<u8> = (0..rows.len()).map(|i| (i % 2) as u8).collect();
        let data = Dataset::from_numeric_parts(rows, group, vec!["u".into(), "p".into()], outcome).unwrap();
        let repaired = dir_repair(&data, &s, lambda, None).unwrap();

        for side in [0u8, 1u8] {
            let idx: Vec<usize> = (0..data.n_rows()).filter(|&i| s[i] == side).collect();
            for &a in &idx {
                for &b in &idx {
                    let (xa, xb) = (data.feature(a, 0), data.feature(b, 0));
                    let (ra, rb) = (repaired.feature(a, 0), repaired.feature(b, 0));
                    if xa < xb {
                        prop_assert!(ra <= rb + 1e-12);
                    } else if xa == xb {
                        prop_assert_eq!(ra, rb);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn model_scores_stay_in_unit_interval(seed in any::<u64>(), query in proptest::collection::vec(-1e3f64..1e3, 3)) {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let outcome: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let group: Vec<u16> = (0..n).map(|i| (i / 2 % 2) as u16).collect();
        let data = Dataset::from_numeric_parts(rows, group, vec!["a".into(), "b".into()], outcome).unwrap();

        let hps = [
            Hyperparams::DecisionTree(TreeParams { max_depth: Some(4), min_leaf: 1 }),
            Hyperparams::RandomForest(ForestParams { n_trees: 5, max_depth: Some(4), features_per_split: FeatureSubset::Sqrt }),
            Hyperparams::LogisticRegression(LogisticParams { l2: 0.01, learning_rate: 0.5, iterations: 40 }),
            Hyperparams::LinearSvm(SvmParams { margin_penalty: 1.0, learning_rate: 0.1, iterations: 40 }),
        ];
        for hp in hps {
            let model = fit(hp.kind(), &hp, &data, seed).unwrap();
            for i in 0..n {
                let sc = model.score_row(data.row(i)).unwrap();
                prop_assert!((0.0..=1.0).contains(&sc), "{:?} train score {sc}", hp.kind());
            }
            let sq = model.score_row(&query).unwrap();
            prop_assert!((0.0..=1.0).contains(&sq), "query score {sq}");
        }
    }
}
