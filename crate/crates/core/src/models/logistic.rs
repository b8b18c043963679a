use alloc::vec::Vec;

use super::linalg::{dot, Cholesky, Matrix};
use super::{check_dim, check_training, logistic, ScoreModel};
use crate::{Error, Result};

/// Ridge penalty on all parameters, bias included.
pub const LOGISTIC_RIDGE: f64 = 1e-8;

/// Binary logistic regression for `P(Y = 1 | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// Coefficients on the features.
    pub weights: Vec<f64>,
    /// Intercept.
    pub bias: f64,
    /// Whether the gradient tolerance was reached.
    pub converged: bool,
    /// Newton iterations taken.
    pub iterations: usize,
}

impl ScoreModel for LogisticModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict_eta(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(logistic(dot(&self.weights, x) + self.bias))
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Average penalized negative log-likelihood.
fn objective(beta: &[f64], xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let dim = beta.len() - 1;
    let mut total = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = dot(&beta[..dim], x) + beta[dim];
        total += softplus(z) - y * z;
    }
    let n = xs.len() as f64;
    total / n + 0.5 * LOGISTIC_RIDGE * dot(beta, beta) / n
}

/// Fits a logistic model by damped Newton iterations.
///
/// `tol` bounds the Euclidean norm of the gradient of the average
/// penalized log-likelihood. Hitting `max_iter` returns the current
/// iterate with `converged = false`.
pub fn fit_logistic(
    features: &[Vec<f64>],
    labels: &[u8],
    tol: f64,
    max_iter: usize,
) -> Result<LogisticModel> {
    let (dim, _) = check_training(features, labels)?;
    if !(tol > 0.0) {
        return Err(Error::Domain {
            what: "tolerance must be positive",
            value: tol,
        });
    }
    let n = features.len() as f64;
    let ys: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { 0.0 }).collect();
    let p = dim + 1;
    let mut beta = alloc::vec![0.0; p];
    let mut current = objective(&beta, features, &ys);
    let mut aug = alloc::vec![1.0; p];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let mut grad = alloc::vec![0.0; p];
        let mut hess = Matrix::zeros(p);
        for (x, &y) in features.iter().zip(&ys) {
            aug[..dim].copy_from_slice(x);
            let mu = logistic(dot(&beta, &aug));
            for (g, a) in grad.iter_mut().zip(&aug) {
                *g += (mu - y) * a;
            }
            hess.add_outer(&aug, mu * (1.0 - mu));
        }
        for (g, b) in grad.iter_mut().zip(&beta) {
            *g = (*g + LOGISTIC_RIDGE * b) / n;
        }
        hess.add_ridge(LOGISTIC_RIDGE);
        hess.scale(1.0 / n);
        if libm::sqrt(dot(&grad, &grad)) <= tol {
            converged = true;
            break;
        }
        if iterations == max_iter {
            break;
        }
        iterations += 1;
        let step = match Cholesky::factor(&hess) {
            Some(c) => c.solve(&grad),
            None => grad.clone(),
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b - scale * s).collect();
            let value = objective(&trial, features, &ys);
            if value <= current {
                beta = trial;
                current = value;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let bias = beta[dim];
    beta.truncate(dim);
    Ok(LogisticModel {
        weights: beta,
        bias,
        converged,
        iterations,
    })
}
