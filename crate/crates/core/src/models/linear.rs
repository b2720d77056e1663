//! Linear models trained by deterministic full-batch descent.
//!
//! Both optimizers run a fixed iteration budget with a fixed step size, so
//! two fits on identical inputs produce identical parameters. Losses are
//! normalized by total sample weight, which makes integer weights exactly
//! equivalent to row duplication.

use crate::dataset::Dataset;

use super::{sigmoid, LogisticParams, SvmParams};

/// Weighted L2-regularized logistic regression via gradient descent.
/// Returns (weights, intercept); the intercept is not regularized.
pub(super) fn fit_logistic(data: &Dataset, params: &LogisticParams) -> (Vec<f64>, f64) {
    let n = data.n_rows();
    let p = data.n_features();
    let total_weight: f64 = data.weights().iter().sum();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut grad = vec![0.0; p];

    for _ in 0..params.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for i in 0..n {
            let x = data.row(i);
            let z: f64 = w.iter().zip(x).map(|(wj, xj)| wj * xj).sum::<f64>() + b;
            let err = data.weights()[i] * (sigmoid(z) - f64::from(data.outcome()[i]));
            for (g, xj) in grad.iter_mut().zip(x) {
                *g += err * xj;
            }
            grad_b += err;
        }
        for (wj, g) in w.iter_mut().zip(&grad) {
            *wj -= params.learning_rate * (g / total_weight + params.l2 * *wj);
        }
        b -= params.learning_rate * grad_b / total_weight;
    }
    (w, b)
}

/// Weighted soft-margin linear SVM via subgradient descent on
/// 0.5·||w||²/(C·W) + mean weighted hinge loss, the classic C-SVM
/// objective scaled by total weight W so the step size stays stable across
/// dataset sizes. Scores are produced downstream by a logistic squash of
/// the margin, giving a monotone [0, 1] output.
pub(super) fn fit_svm(data: &Dataset, params: &SvmParams) -> (Vec<f64>, f64) {
    let n = data.n_rows();
    let p = data.n_features();
    let total_weight: f64 = data.weights().iter().sum();
    let reg = 1.0 / (params.margin_penalty * total_weight);
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut grad = vec![0.0; p];

    for _ in 0..params.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for i in 0..n {
            let x = data.row(i);
            let label = if data.outcome()[i] == 1 { 1.0 } else { -1.0 };
            let margin: f64 =
                label * (w.iter().zip(x).map(|(wj, xj)| wj * xj).sum::<f64>() + b);
            if margin < 1.0 {
                let c = data.weights()[i] * label;
                for (g, xj) in grad.iter_mut().zip(x) {
                    *g -= c * xj;
                }
                grad_b -= c;
            }
        }
        for (wj, g) in w.iter_mut().zip(&grad) {
            *wj -= params.learning_rate * (g / total_weight + reg * *wj);
        }
        b -= params.learning_rate * grad_b / total_weight;
    }
    (w, b)
}
