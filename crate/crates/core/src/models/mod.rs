//! Weighted binary classifiers and hyperparameter search.
//!
//! Four model families are implemented directly so that every one of them
//! honors per-row sample weights: decision trees and random forests through
//! weighted Gini impurity and weighted leaf votes, logistic regression
//! through weighted log-loss, and linear SVM through weighted hinge loss.
//! All training is deterministic for a fixed seed; scores always lie in
//! [0, 1] and `predict` returns 1 iff score ≥ threshold (ties go to 1).

mod cv;
mod forest;
mod linear;
mod tree;

pub use cv::{cross_validate, stratified_fold_indices};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

use tree::Tree;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training data is empty")]
    EmptyTrainingData,

    #[error("training data contains a single outcome class")]
    SingleClassTraining,

    #[error("row {row}: non-positive sample weight")]
    NonPositiveWeight { row: usize },

    #[error("feature width mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("threshold {threshold} outside [0, 1]")]
    InvalidThreshold { threshold: f64 },

    #[error("hyperparameters are for {got}, expected {expected}")]
    HyperparamsMismatch { expected: String, got: String },

    #[error("invalid hyperparameters: {reason}")]
    InvalidHyperparams { reason: String },

    #[error("hyperparameter grid is empty")]
    EmptyGrid,

    #[error("cross-validation requires k >= 2, got {k}")]
    InvalidFolds { k: usize },

    #[error("fold {fold}: training part lost an outcome class")]
    FoldClassCollapse { fold: usize },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// The four supported classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "LR")]
    LogisticRegression,
    #[serde(rename = "SVM")]
    LinearSvm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::LogisticRegression,
        ModelKind::LinearSvm,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "DT",
            ModelKind::RandomForest => "RF",
            ModelKind::LogisticRegression => "LR",
            ModelKind::LinearSvm => "SVM",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "DT" => Ok(ModelKind::DecisionTree),
            "RF" => Ok(ModelKind::RandomForest),
            "LR" => Ok(ModelKind::LogisticRegression),
            "SVM" => Ok(ModelKind::LinearSvm),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

/// How many candidate features a forest considers per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    /// ceil(sqrt(p)) features per split.
    Sqrt,
    /// max(1, p/3) features per split.
    Third,
    /// All features (bagging only).
    All,
}

impl FeatureSubset {
    fn resolve(self, p: usize) -> usize {
        match self {
            FeatureSubset::Sqrt => (p as f64).sqrt().ceil() as usize,
            FeatureSubset::Third => (p / 3).max(1),
            FeatureSubset::All => p,
        }
        .clamp(1, p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until purity; `Some(0)` is a single majority leaf.
    pub max_depth: Option<u32>,
    /// Minimum rows per leaf, at least 1.
    pub min_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<u32>,
    pub features_per_split: FeatureSubset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub l2: f64,
    pub learning_rate: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Weight on the hinge-loss term (larger = harder margin).
    pub margin_penalty: f64,
    pub learning_rate: f64,
    pub iterations: usize,
}

/// Per-family hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum Hyperparams {
    #[serde(rename = "DT")]
    DecisionTree(TreeParams),
    #[serde(rename = "RF")]
    RandomForest(ForestParams),
    #[serde(rename = "LR")]
    LogisticRegression(LogisticParams),
    #[serde(rename = "SVM")]
    LinearSvm(SvmParams),
}

impl Hyperparams {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::DecisionTree(_) => ModelKind::DecisionTree,
            Hyperparams::RandomForest(_) => ModelKind::RandomForest,
            Hyperparams::LogisticRegression(_) => ModelKind::LogisticRegression,
            Hyperparams::LinearSvm(_) => ModelKind::LinearSvm,
        }
    }

    fn validate(&self) -> Result<()> {
        let invalid = |reason: String| ModelError::InvalidHyperparams { reason };
        match self {
            Hyperparams::DecisionTree(p) => {
                if p.min_leaf == 0 {
                    return Err(invalid("min_leaf must be at least 1".into()));
                }
            }
            Hyperparams::RandomForest(p) => {
                if p.n_trees == 0 {
                    return Err(invalid("n_trees must be positive".into()));
                }
            }
            Hyperparams::LogisticRegression(p) => {
                if !(p.l2 >= 0.0) || !(p.learning_rate > 0.0) || p.iterations == 0 {
                    return Err(invalid("logistic params must be positive".into()));
                }
            }
            Hyperparams::LinearSvm(p) => {
                if !(p.margin_penalty > 0.0) || !(p.learning_rate > 0.0) || p.iterations == 0 {
                    return Err(invalid("svm params must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Standard desk-scale search grid for each model family.
pub fn default_grid(kind: ModelKind) -> Vec<Hyperparams> {
    match kind {
        ModelKind::DecisionTree => {
            let mut grid = Vec::new();
            for depth in [3u32, 5, 8, 12] {
                for min_leaf in [1usize, 5, 20] {
                    grid.push(Hyperparams::DecisionTree(TreeParams {
                        max_depth: Some(depth),
                        min_leaf,
                    }));
                }
            }
            grid
        }
        ModelKind::RandomForest => {
            let mut grid = Vec::new();
            for n_trees in [50usize, 100] {
                for depth in [5u32, 8, 12] {
                    for features_per_split in [FeatureSubset::Sqrt, FeatureSubset::Third] {
                        grid.push(Hyperparams::RandomForest(ForestParams {
                            n_trees,
                            max_depth: Some(depth),
                            features_per_split,
                        }));
                    }
                }
            }
            grid
        }
        ModelKind::LogisticRegression => [1e-4, 1e-3, 1e-2, 1e-1]
            .into_iter()
            .map(|l2| {
                Hyperparams::LogisticRegression(LogisticParams {
                    l2,
                    learning_rate: 0.5,
                    iterations: 300,
                })
            })
            .collect(),
        ModelKind::LinearSvm => [0.01, 0.1, 1.0, 10.0]
            .into_iter()
            .map(|margin_penalty| {
                Hyperparams::LinearSvm(SvmParams {
                    margin_penalty,
                    learning_rate: 0.05,
                    iterations: 500,
                })
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Fitted {
    Tree(Tree),
    Forest(Vec<Tree>),
    Linear { weights: Vec<f64>, intercept: f64 },
    /// Constant-score classifier; used when a cost-sensitive reduction
    /// degenerates to a single class.
    Constant { score: f64 },
}

/// A fitted classifier exposing a score in [0, 1] and thresholded labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    kind: ModelKind,
    hyperparams: Hyperparams,
    seed: u64,
    threshold: f64,
    n_features: usize,
    fitted: Fitted,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Linear coefficients for logistic/SVM models, if applicable.
    pub fn linear_coefficients(&self) -> Option<(&[f64], f64)> {
        match &self.fitted {
            Fitted::Linear { weights, intercept } => Some((weights, *intercept)),
            _ => None,
        }
    }

    pub(crate) fn constant(kind: ModelKind, hyperparams: Hyperparams, score: f64, n_features: usize) -> Self {
        TrainedModel {
            kind,
            hyperparams,
            seed: 0,
            threshold: 0.5,
            n_features,
            fitted: Fitted::Constant { score },
        }
    }

    /// Score for a single feature row, always in [0, 1].
    pub fn score_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let s = match &self.fitted {
            Fitted::Tree(tree) => tree.score(x),
            Fitted::Forest(trees) => {
                trees.iter().map(|t| t.score(x)).sum::<f64>() / trees.len() as f64
            }
            Fitted::Linear { weights, intercept } => {
                let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + intercept;
                sigmoid(z)
            }
            Fitted::Constant { score } => *score,
        };
        Ok(s.clamp(0.0, 1.0))
    }

    /// Scores for every row of a dataset.
    pub fn score_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        (0..data.n_rows()).map(|i| self.score_row(data.row(i))).collect()
    }

    /// Label for one row at the given threshold; 1 iff score ≥ threshold.
    pub fn predict_row(&self, x: &[f64], threshold: f64) -> Result<u8> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ModelError::InvalidThreshold { threshold });
        }
        Ok(u8::from(self.score_row(x)? >= threshold))
    }

    /// Labels for every row at the model's own threshold.
    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<u8>> {
        self.predict_all_with(data, self.threshold)
    }

    /// Labels for every row at an explicit threshold.
    pub fn predict_all_with(&self, data: &Dataset, threshold: f64) -> Result<Vec<u8>> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(ModelError::InvalidThreshold { threshold });
        }
        self.score_all(data)
            .map(|scores| scores.into_iter().map(|s| u8::from(s >= threshold)).collect())
    }

    /// JSON document with kind, hyperparameters, fitted parameters, and
    /// threshold, for audit reproducibility.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn validate_training_data(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(ModelError::EmptyTrainingData);
    }
    if let Some(row) = data.weights().iter().position(|&w| !(w > 0.0)) {
        return Err(ModelError::NonPositiveWeight { row });
    }
    let first = data.outcome()[0];
    if data.outcome().iter().all(|&y| y == first) {
        return Err(ModelError::SingleClassTraining);
    }
    Ok(())
}

/// Trains a classifier of the given kind. Deterministic for fixed inputs
/// and seed; honors per-row sample weights for every family.
pub fn fit(kind: ModelKind, hp: &Hyperparams, data: &Dataset, seed: u64) -> Result<TrainedModel> {
    if hp.kind() != kind {
        return Err(ModelError::HyperparamsMismatch {
            expected: kind.token().into(),
            got: hp.kind().token().into(),
        });
    }
    hp.validate()?;
    validate_training_data(data)?;

    let fitted = match hp {
        Hyperparams::DecisionTree(p) => Fitted::Tree(tree::fit_tree(data, p)),
        Hyperparams::RandomForest(p) => {
            Fitted::Forest(forest::fit_forest(data, p, seed))
        }
        Hyperparams::LogisticRegression(p) => {
            let (weights, intercept) = linear::fit_logistic(data, p);
            Fitted::Linear { weights, intercept }
        }
        Hyperparams::LinearSvm(p) => {
            let (weights, intercept) = linear::fit_svm(data, p);
            Fitted::Linear { weights, intercept }
        }
    };

    Ok(TrainedModel {
        kind,
        hyperparams: hp.clone(),
        seed,
        threshold: 0.5,
        n_features: data.n_features(),
        fitted,
    })
}

#[cfg(test)]
pub(crate) mod test_data {
    use crate::dataset::Dataset;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Two Gaussian blobs separated by `separation` standard deviations
    /// along every axis, balanced across two groups.
    pub fn blobs(n: usize, dims: usize, separation: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::with_capacity(n);
        let mut outcome = Vec::with_capacity(n);
        let mut group = Vec::with_capacity(n);
        for i in 0..n {
            let y = u8::from(i % 2 == 0);
            let center = if y == 1 { separation / 2.0 } else { -separation / 2.0 };
            rows.push((0..dims).map(|_| center + normal.sample(&mut rng)).collect());
            outcome.push(y);
            group.push(u16::from(rng.random::<f64>() < 0.5));
        }
        Dataset::from_numeric_parts(rows, group, vec!["a".into(), "b".into()], outcome).unwrap()
    }
}
