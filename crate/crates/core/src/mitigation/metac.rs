//! Group-threshold plugin classifier with a ratio-form fairness floor.
//!
//! A base score model estimates P(Y = 1 | x); a grid search then picks one
//! decision threshold per binarized group, maximizing weighted training
//! accuracy subject to a minimum metric ratio between the two sides. For a
//! single binary constraint the accuracy-optimal fair classifier is exactly
//! such a group-dependent threshold rule on the score.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::models::{fit, Hyperparams, ModelKind, TrainedModel};

use super::{check_indicator, MitigationError, Result};

/// The ratio-form metric the constraint floors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMetric {
    /// min/max of the two groups' positive-prediction rates.
    StatisticalRate,
    /// min/max of the two groups' false-discovery rates.
    FalseDiscovery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaCParams {
    #[serde(default = "default_metric")]
    pub metric: RatioMetric,
    /// Required metric ratio in [0, 1]; 0 disables the constraint.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Number of threshold points per group in [0, 1].
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
}

fn default_metric() -> RatioMetric {
    RatioMetric::StatisticalRate
}
fn default_tau() -> f64 {
    0.8
}
fn default_grid_resolution() -> usize {
    101
}

impl Default for MetaCParams {
    fn default() -> Self {
        MetaCParams {
            metric: default_metric(),
            tau: default_tau(),
            grid_resolution: default_grid_resolution(),
        }
    }
}

/// Fitted score model plus one decision threshold per binarized group.
#[derive(Debug, Clone)]
pub struct GroupThresholdClassifier {
    base: TrainedModel,
    thresholds: [f64; 2],
    feasible: bool,
    achieved_ratio: f64,
    train_accuracy: f64,
}

impl GroupThresholdClassifier {
    pub fn base(&self) -> &TrainedModel {
        &self.base
    }

    /// (unprivileged, privileged) decision thresholds.
    pub fn thresholds(&self) -> [f64; 2] {
        self.thresholds
    }

    /// False when no grid point satisfied the ratio floor; the returned
    /// thresholds then maximize the achievable ratio instead.
    pub fn feasible(&self) -> bool {
        self.feasible
    }

    /// Metric ratio of the chosen thresholds on the training data.
    pub fn achieved_ratio(&self) -> f64 {
        self.achieved_ratio
    }

    pub fn train_accuracy(&self) -> f64 {
        self.train_accuracy
    }

    pub fn score_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(self.base.score_all(data)?)
    }

    /// Labels using the row's group-side threshold.
    pub fn predict_all(&self, data: &Dataset, s: &[u8]) -> Result<Vec<u8>> {
        check_indicator(data, s)?;
        let scores = self.base.score_all(data)?;
        Ok(scores
            .into_iter()
            .zip(s)
            .map(|(score, &side)| u8::from(score >= self.thresholds[usize::from(side)]))
            .collect())
    }
}

/// Per-side cumulative statistics supporting O(1) threshold queries.
struct SideStats {
    /// Scores sorted ascending.
    scores: Vec<f64>,
    /// Suffix weight of rows with score >= scores[i].
    suffix_w: Vec<f64>,
    /// Suffix weight of positive rows.
    suffix_w_pos: Vec<f64>,
    total_w: f64,
    total_w_pos: f64,
}

impl SideStats {
    fn build(data: &Dataset, s: &[u8], side: u8, scores: &[f64]) -> Option<SideStats> {
        let mut rows: Vec<(f64, f64, u8)> = (0..data.n_rows())
            .filter(|&i| s[i] == side)
            .map(|i| (scores[i], data.weights()[i], data.outcome()[i]))
            .collect();
        if rows.is_empty() {
            return None;
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let m = rows.len();
        let mut suffix_w = vec![0.0; m + 1];
        let mut suffix_w_pos = vec![0.0; m + 1];
        for i in (0..m).rev() {
            suffix_w[i] = suffix_w[i + 1] + rows[i].1;
            suffix_w_pos[i] = suffix_w_pos[i + 1] + if rows[i].2 == 1 { rows[i].1 } else { 0.0 };
        }
        Some(SideStats {
            scores: rows.iter().map(|r| r.0).collect(),
            total_w: suffix_w[0],
            total_w_pos: suffix_w_pos[0],
            suffix_w,
            suffix_w_pos,
        })
    }

    /// Weighted (predicted-positive, true-positive-within-predicted,
    /// correct) masses at threshold t, predicting 1 iff score >= t.
    fn at(&self, t: f64) -> (f64, f64, f64) {
        let idx = self.scores.partition_point(|&v| v < t);
        let pred_pos = self.suffix_w[idx];
        let tp = self.suffix_w_pos[idx];
        // correct = TP + TN = tp + (negatives below threshold)
        let neg_total = self.total_w - self.total_w_pos;
        let fp = pred_pos - tp;
        let tn = neg_total - fp;
        (pred_pos, tp, tp + tn)
    }
}

/// Metric ratio for a candidate threshold pair; `None` when undefined.
fn metric_ratio(metric: RatioMetric, side0: (f64, f64, f64), side1: (f64, f64, f64), w0: f64, w1: f64) -> Option<f64> {
    match metric {
        RatioMetric::StatisticalRate => {
            let p0 = side0.0 / w0;
            let p1 = side1.0 / w1;
            let max = p0.max(p1);
            if max <= 0.0 {
                Some(1.0)
            } else {
                Some(p0.min(p1) / max)
            }
        }
        RatioMetric::FalseDiscovery => {
            if side0.0 <= 0.0 || side1.0 <= 0.0 {
                return None;
            }
            let f0 = (side0.0 - side0.1) / side0.0;
            let f1 = (side1.0 - side1.1) / side1.0;
            let max = f0.max(f1);
            if max <= 0.0 {
                Some(1.0)
            } else {
                Some(f0.min(f1) / max)
            }
        }
    }
}

/// Fits the base score model and searches the threshold grid.
///
/// Among constraint-satisfying pairs the search maximizes weighted training
/// accuracy, breaking ties toward equal thresholds (smallest |t₁ − t₀|,
/// then smallest t₀, then t₁). If no pair satisfies the floor, the pair
/// with the largest achievable ratio is returned with `feasible() == false`.
pub fn metac_fit(
    kind: ModelKind,
    hp: &Hyperparams,
    data: &Dataset,
    s: &[u8],
    params: &MetaCParams,
    seed: u64,
) -> Result<GroupThresholdClassifier> {
    if !(0.0..=1.0).contains(&params.tau) {
        return Err(MitigationError::InvalidTau { tau: params.tau });
    }
    if params.grid_resolution < 2 {
        return Err(MitigationError::InvalidGridResolution(params.grid_resolution));
    }
    check_indicator(data, s)?;

    let base = fit(kind, hp, data, seed)?;
    let scores = base.score_all(data)?;
    let (min_s, max_s) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min_s == max_s {
        return Err(MitigationError::DegenerateScores);
    }

    let stats0 =
        SideStats::build(data, s, 0, &scores).ok_or(MitigationError::EmptySide { s: 0 })?;
    let stats1 =
        SideStats::build(data, s, 1, &scores).ok_or(MitigationError::EmptySide { s: 1 })?;
    let total_w = stats0.total_w + stats1.total_w;

    let res = params.grid_resolution;
    let grid: Vec<f64> = (0..res).map(|i| i as f64 / (res - 1) as f64).collect();
    let at0: Vec<(f64, f64, f64)> = grid.iter().map(|&t| stats0.at(t)).collect();
    let at1: Vec<(f64, f64, f64)> = grid.iter().map(|&t| stats1.at(t)).collect();

    struct Candidate {
        accuracy: f64,
        spread: f64,
        t0: f64,
        t1: f64,
        ratio: f64,
    }
    let better_acc = |a: &Candidate, b: &Candidate| {
        (a.accuracy, -a.spread, -a.t0, -a.t1) > (b.accuracy, -b.spread, -b.t0, -b.t1)
    };
    let mut best_feasible: Option<Candidate> = None;
    let mut best_ratio: Option<Candidate> = None;

    for (i, &t0) in grid.iter().enumerate() {
        for (j, &t1) in grid.iter().enumerate() {
            let Some(ratio) = metric_ratio(params.metric, at0[i], at1[j], stats0.total_w, stats1.total_w)
            else {
                continue;
            };
            let cand = Candidate {
                accuracy: (at0[i].2 + at1[j].2) / total_w,
                spread: (t1 - t0).abs(),
                t0,
                t1,
                ratio,
            };
            if ratio >= params.tau
                && best_feasible.as_ref().is_none_or(|b| better_acc(&cand, b))
            {
                best_feasible = Some(cand);
            } else if best_ratio.as_ref().is_none_or(|b| {
                (cand.ratio, cand.accuracy, -cand.spread) > (b.ratio, b.accuracy, -b.spread)
            }) {
                best_ratio = Some(Candidate { ..cand });
            }
        }
    }

    let (chosen, feasible) = match best_feasible {
        Some(c) => (c, true),
        None => (best_ratio.expect("grid is nonempty"), false),
    };

    Ok(GroupThresholdClassifier {
        base,
        thresholds: [chosen.t0, chosen.t1],
        feasible,
        achieved_ratio: chosen.ratio,
        train_accuracy: chosen.accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SynthSpec;
    use crate::models::LogisticParams;

    fn logistic_hp() -> Hyperparams {
        Hyperparams::LogisticRegression(LogisticParams {
            l2: 0.001,
            learning_rate: 0.5,
            iterations: 150,
        })
    }

    fn exchangeable_data() -> (Dataset, Vec<u8>) {
        // exactly exchangeable sides: every row appears once per group
        let mut spec = SynthSpec::table1();
        for g in &mut spec.groups {
            g.positive_rate = 0.5;
        }
        spec.group_feature_shift = 0.0;
        spec.signal_strength = 2.0;
        spec.seed = 9;
        let half = spec.generate(600).unwrap();
        let mut rows = Vec::new();
        let mut group = Vec::new();
        let mut outcome = Vec::new();
        for side in 0..2u16 {
            for i in 0..half.n_rows() {
                rows.push(half.row(i).to_vec());
                group.push(side);
                outcome.push(half.outcome()[i]);
            }
        }
        let data = Dataset::from_numeric_parts(
            rows,
            group,
            vec!["unpriv".into(), "priv".into()],
            outcome,
        )
        .unwrap();
        let s: Vec<u8> = data.group().iter().map(|&g| g as u8).collect();
        (data, s)
    }

    #[test]
    fn vacuous_tau_keeps_thresholds_equal_on_exchangeable_data() {
        let (data, s) = exchangeable_data();
        let params = MetaCParams {
            tau: 0.0,
            ..MetaCParams::default()
        };
        let model =
            metac_fit(ModelKind::LogisticRegression, &logistic_hp(), &data, &s, &params, 1)
                .unwrap();
        assert!(model.feasible());
        // exchangeable sides make the diagonal optimal; the tie rule picks it
        let [t0, t1] = model.thresholds();
        assert_eq!(t0, t1, "thresholds {t0} vs {t1}");
    }

    #[test]
    fn fair_data_achieves_ratio_near_one() {
        let (data, s) = exchangeable_data();
        let params = MetaCParams::default();
        let model =
            metac_fit(ModelKind::LogisticRegression, &logistic_hp(), &data, &s, &params, 1)
                .unwrap();
        assert!(model.feasible());
        // identical score distributions on both sides: equal thresholds,
        // ratio exactly 1
        assert_eq!(model.achieved_ratio(), 1.0);
    }

    #[test]
    fn accuracy_is_nonincreasing_in_tau() {
        let data = SynthSpec::table1().generate(1500).unwrap();
        let s = crate::mitigation::BinaryGroupMap::default()
            .binarize(&data)
            .unwrap();
        let mut last = f64::INFINITY;
        for tau in [0.0, 0.5, 0.8, 0.95] {
            let params = MetaCParams {
                tau,
                ..MetaCParams::default()
            };
            let model = metac_fit(
                ModelKind::LogisticRegression,
                &logistic_hp(),
                &data,
                &s,
                &params,
                1,
            )
            .unwrap();
            assert!(model.train_accuracy() <= last + 1e-12, "tau {tau}");
            last = model.train_accuracy();
        }
    }

    #[test]
    fn degenerate_scores_are_rejected() {
        use crate::models::TreeParams;
        let data = SynthSpec::table1().generate(300).unwrap();
        let s = crate::mitigation::BinaryGroupMap::default()
            .binarize(&data)
            .unwrap();
        // a depth-0 stump scores every row identically
        let hp = Hyperparams::DecisionTree(TreeParams {
            max_depth: Some(0),
            min_leaf: 1,
        });
        assert!(matches!(
            metac_fit(ModelKind::DecisionTree, &hp, &data, &s, &MetaCParams::default(), 1)
                .unwrap_err(),
            MitigationError::DegenerateScores
        ));
    }

    #[test]
    fn invalid_tau_is_rejected() {
        let data = SynthSpec::table1().generate(100).unwrap();
        let s = crate::mitigation::BinaryGroupMap::default()
            .binarize(&data)
            .unwrap();
        let params = MetaCParams {
            tau: 1.5,
            ..MetaCParams::default()
        };
        assert!(matches!(
            metac_fit(ModelKind::LogisticRegression, &logistic_hp(), &data, &s, &params, 1)
                .unwrap_err(),
            MitigationError::InvalidTau { .. }
        ));
    }
}
