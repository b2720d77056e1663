//! Exponentiated gradient reduction to cost-sensitive learning.
//!
//! The constrained problem — minimize weighted error subject to a group
//! fairness constraint with slack `eps` — is solved as a two-player game:
//! a multiplier player runs exponentiated gradient updates on the
//! constraint violations while the learner best-responds by fitting the
//! base model on cost-adjusted labels and weights. The deployed classifier
//! is the uniform mixture over all best responses; its expected-label
//! constraint violation shrinks toward `eps` as the iteration budget grows.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::exec;
use crate::metrics::Notion;
use crate::models::{fit, Hyperparams, ModelKind, TrainedModel};

use super::{check_indicator, MitigationError, Result};

/// Which fairness constraint the reduction enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExGrConstraint {
    #[serde(rename = "SP")]
    StatisticalParity,
    #[serde(rename = "EOdds")]
    EqualizedOdds,
}

impl ExGrConstraint {
    pub fn notion(self) -> Notion {
        match self {
            ExGrConstraint::StatisticalParity => Notion::StatisticalParity,
            ExGrConstraint::EqualizedOdds => Notion::EqualizedOdds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExGrParams {
    #[serde(default = "default_constraint")]
    pub constraint: ExGrConstraint,
    /// Allowed constraint slack, > 0.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Number of best-response iterations (mixture size).
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Cap on the total multiplier mass.
    #[serde(default = "default_bound")]
    pub bound: f64,
    /// Log-space multiplier step size.
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_constraint() -> ExGrConstraint {
    ExGrConstraint::StatisticalParity
}
fn default_eps() -> f64 {
    0.05
}
fn default_iterations() -> usize {
    50
}
fn default_bound() -> f64 {
    5.0
}
fn default_step() -> f64 {
    0.25
}

impl Default for ExGrParams {
    fn default() -> Self {
        ExGrParams {
            constraint: default_constraint(),
            eps: default_eps(),
            iterations: default_iterations(),
            bound: default_bound(),
            step: default_step(),
        }
    }
}

/// Probability-weighted mixture of base classifiers.
///
/// The mixture score is the weight-averaged member score; deployment
/// thresholds that mean score once at 0.5, so evaluation is deterministic.
#[derive(Debug, Clone)]
pub struct RandomizedClassifier {
    members: Vec<(TrainedModel, f64)>,
    achieved_violation: f64,
    converged: bool,
}

impl RandomizedClassifier {
    pub fn members(&self) -> &[(TrainedModel, f64)] {
        &self.members
    }

    /// Largest signed constraint value of the mixture's expected labels on
    /// the training data (for SP this is |p₁ − p₀|).
    pub fn achieved_violation(&self) -> f64 {
        self.achieved_violation
    }

    /// False when the achieved violation still exceeds `eps` after the
    /// iteration budget; flagged, not fatal.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn score_row(&self, x: &[f64]) -> Result<f64> {
        let mut score = 0.0;
        for (model, weight) in &self.members {
            score += weight * model.score_row(x)?;
        }
        Ok(score)
    }

    pub fn score_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        (0..data.n_rows()).map(|i| self.score_row(data.row(i))).collect()
    }

    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<u8>> {
        Ok(self
            .score_all(data)?
            .into_iter()
            .map(|s| u8::from(s >= 0.5))
            .collect())
    }

    /// Per-row probability of a positive label under member randomization:
    /// the weight-averaged member prediction.
    pub fn expected_labels(&self, data: &Dataset) -> Result<Vec<f64>> {
        let mut rho = vec![0.0; data.n_rows()];
        for (model, weight) in &self.members {
            let pred = model.predict_all(data)?;
            for (r, &p) in rho.iter_mut().zip(&pred) {
                *r += weight * f64::from(p);
            }
        }
        Ok(rho)
    }
}

/// Signed linear constraints over predictions: g_k(h) = Σ_i coeff_k[i]·h_i − eps.
struct ConstraintSet {
    coeffs: Vec<Vec<f64>>,
}

impl ConstraintSet {
    fn build(data: &Dataset, s: &[u8], constraint: ExGrConstraint) -> Result<ConstraintSet> {
        let n = data.n_rows();
        let w = data.weights();
        match constraint {
            ExGrConstraint::StatisticalParity => {
                let mut side_w = [0.0f64; 2];
                for i in 0..n {
                    side_w[usize::from(s[i])] += w[i];
                }
                for (side, &total) in side_w.iter().enumerate() {
                    if total <= 0.0 {
                        return Err(MitigationError::EmptySide { s: side as u8 });
                    }
                }
                let base: Vec<f64> = (0..n)
                    .map(|i| {
                        if s[i] == 1 {
                            w[i] / side_w[1]
                        } else {
                            -w[i] / side_w[0]
                        }
                    })
                    .collect();
                let neg = base.iter().map(|c| -c).collect();
                Ok(ConstraintSet {
                    coeffs: vec![base, neg],
                })
            }
            ExGrConstraint::EqualizedOdds => {
                let mut cell_w = [[0.0f64; 2]; 2];
                for i in 0..n {
                    cell_w[usize::from(s[i])][usize::from(data.outcome()[i])] += w[i];
                }
                for side in 0..2 {
                    for y in 0..2 {
                        if cell_w[side][y] <= 0.0 {
                            return Err(MitigationError::EmptyCell {
                                s: side as u8,
                                y: y as u8,
                            });
                        }
                    }
                }
                let mut coeffs = Vec::with_capacity(4);
                for y in [1u8, 0u8] {
                    let base: Vec<f64> = (0..n)
                        .map(|i| {
                            if data.outcome()[i] != y {
                                0.0
                            } else if s[i] == 1 {
                                w[i] / cell_w[1][usize::from(y)]
                            } else {
                                -w[i] / cell_w[0][usize::from(y)]
                            }
                        })
                        .collect();
                    coeffs.push(base.iter().map(|c| -c).collect());
                    coeffs.insert(coeffs.len() - 1, base);
                }
                Ok(ConstraintSet { coeffs })
            }
        }
    }

    fn k(&self) -> usize {
        self.coeffs.len()
    }

    /// Signed constraint values (without the eps offset) of a prediction
    /// vector given as f64 (hard labels or expected labels).
    fn values(&self, pred: &[f64]) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.iter().zip(pred).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Fits the reduction and returns the uniform mixture over best responses.
///
/// Deterministic for fixed inputs and seed. A best response whose
/// cost-implied labels collapse to one class becomes a constant classifier
/// member rather than an error.
pub fn exgr_fit(
    kind: ModelKind,
    hp: &Hyperparams,
    data: &Dataset,
    s: &[u8],
    params: &ExGrParams,
    seed: u64,
) -> Result<RandomizedClassifier> {
    if !(params.eps > 0.0) {
        return Err(MitigationError::InvalidEps { eps: params.eps });
    }
    if params.iterations == 0 {
        return Err(MitigationError::InvalidIterations);
    }
    check_indicator(data, s)?;
    let constraints = ConstraintSet::build(data, s, params.constraint)?;

    let n = data.n_rows();
    let total_weight: f64 = data.weights().iter().sum();
    let error_coeff: Vec<f64> = (0..n)
        .map(|i| data.weights()[i] / total_weight * (1.0 - 2.0 * f64::from(data.outcome()[i])))
        .collect();

    let mut theta = vec![0.0f64; constraints.k()];
    let mut members: Vec<TrainedModel> = Vec::with_capacity(params.iterations);
    let mut label_mass = vec![0.0f64; n];

    for t in 0..params.iterations {
        let exp_theta: Vec<f64> = theta.iter().map(|&th| th.exp()).collect();
        let denom = 1.0 + exp_theta.iter().sum::<f64>();
        let lambda: Vec<f64> = exp_theta.iter().map(|e| params.bound * e / denom).collect();

        // per-row signed cost of predicting 1; best response matches its sign
        let mut cost = error_coeff.clone();
        for (l, coeff) in lambda.iter().zip(&constraints.coeffs) {
            for (c, v) in cost.iter_mut().zip(coeff) {
                *c += l * v;
            }
        }
        let labels: Vec<u8> = cost.iter().map(|&c| u8::from(c < 0.0)).collect();
        let member = if labels.iter().all(|&l| l == labels[0]) {
            TrainedModel::constant(kind, hp.clone(), f64::from(labels[0]), data.n_features())
        } else {
            let abs_sum: f64 = cost.iter().map(|c| c.abs()).sum();
            let scale = n as f64 / abs_sum;
            let fit_weights: Vec<f64> = cost.iter().map(|c| (c.abs() * scale).max(1e-12)).collect();
            let response_data = data.with_outcome(labels)?.with_weights(fit_weights)?;
            fit(kind, hp, &response_data, exec::derive_seed(seed, t as u64))?
        };

        let pred: Vec<f64> = member
            .predict_all(data)?
            .into_iter()
            .map(f64::from)
            .collect();
        for (m, &p) in label_mass.iter_mut().zip(&pred) {
            *m += p;
        }
        let g = constraints.values(&pred);
        for (th, gk) in theta.iter_mut().zip(&g) {
            // clip the downward dual step so the multipliers of a
            // well-satisfied ± constraint pair decay at the same rate and
            // their difference stays zero
            let step = (gk - params.eps).max(-0.5);
            *th = (*th + params.step * step).clamp(-30.0, 30.0);
        }
        members.push(member);
    }

    let uniform = 1.0 / params.iterations as f64;
    let rho: Vec<f64> = label_mass.iter().map(|m| m * uniform).collect();
    let achieved_violation = constraints
        .values(&rho)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let converged = achieved_violation <= params.eps;

    Ok(RandomizedClassifier {
        members: members.into_iter().map(|m| (m, uniform)).collect(),
        achieved_violation,
        converged,
    })
}
