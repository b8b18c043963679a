use alloc::vec::Vec;

use super::linalg::{dot, Cholesky, Matrix};
use super::{check_dim, check_training, logistic, ScoreModel};
use crate::{Error, Result};

/// Ridge added to the pooled covariance when it is singular.
pub const LDA_RIDGE: f64 = 1e-6;

/// Two-class Gaussian linear discriminant with a pooled covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// Sample means of class 1 and class 2.
    pub class_means: [Vec<f64>; 2],
    /// Pooled within-class covariance (denominator `n - 2`).
    pub pooled_covariance: Matrix,
    /// Class frequencies.
    pub priors: [f64; 2],
    /// True when the ridge fallback was needed.
    pub regularized: bool,
    weights: Vec<f64>,
    bias: f64,
}

impl LdaModel {
    /// Discriminant direction `Sigma^-1 (mu_1 - mu_2)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Intercept of the log-odds.
    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Rebuilds a model from its stored parameters.
    pub fn from_parts(
        class_means: [Vec<f64>; 2],
        pooled_covariance: Matrix,
        priors: [f64; 2],
    ) -> Result<Self> {
        let dim = class_means[0].len();
        if class_means[1].len() != dim || pooled_covariance.dim() != dim || dim == 0 {
            return Err(Error::invalid("inconsistent LDA dimensions"));
        }
        if !(priors[0] > 0.0 && priors[1] > 0.0) || (priors[0] + priors[1] - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("LDA priors must be positive and sum to 1"));
        }
        let diff: Vec<f64> = class_means[0]
            .iter()
            .zip(&class_means[1])
            .map(|(a, b)| a - b)
            .collect();
        let (chol, regularized) = match Cholesky::factor(&pooled_covariance) {
            Some(c) => (c, false),
            None => {
                let mut ridged = pooled_covariance.clone();
                ridged.add_ridge(LDA_RIDGE);
                let c = Cholesky::factor(&ridged)
                    .ok_or_else(|| Error::invalid("pooled covariance is not positive semi-definite"))?;
                (c, true)
            }
        };
        let weights = chol.solve(&diff);
        let mid: Vec<f64> = class_means[0]
            .iter()
            .zip(&class_means[1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let bias = -dot(&weights, &mid) + libm::log(priors[0] / priors[1]);
        Ok(Self {
            class_means,
            pooled_covariance,
            priors,
            regularized,
            weights,
            bias,
        })
    }
}

impl ScoreModel for LdaModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict_eta(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(logistic(dot(&self.weights, x) + self.bias))
    }
}

/// Fits LDA on features with labels in `{1, 2}`.
///
/// Needs at least two points per class. A singular pooled covariance is
/// replaced by its ridge-regularized version and flagged.
pub fn fit_lda(features: &[Vec<f64>], labels: &[u8]) -> Result<LdaModel> {
    let (dim, counts) = check_training(features, labels)?;
    if counts[0] < 2 || counts[1] < 2 {
        return Err(Error::invalid("LDA needs at least two points per class"));
    }
    let mut means = [alloc::vec![0.0; dim], alloc::vec![0.0; dim]];
    for (x, &y) in features.iter().zip(labels) {
        let m = &mut means[usize::from(y - 1)];
        for (acc, v) in m.iter_mut().zip(x) {
            *acc += v;
        }
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= c as f64);
    }
    let mut cov = Matrix::zeros(dim);
    let mut centered = alloc::vec![0.0; dim];
    for (x, &y) in features.iter().zip(labels) {
        let m = &means[usize::from(y - 1)];
        for d in 0..dim {
            centered[d] = x[d] - m[d];
        }
        cov.add_outer(&centered, 1.0);
    }
    let n = features.len();
    cov.scale(1.0 / (n - 2) as f64);
    let priors = [counts[0] as f64 / n as f64, counts[1] as f64 / n as f64];
    LdaModel::from_parts(means, cov, priors)
}
