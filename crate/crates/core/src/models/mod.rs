//! Plug-in estimators of the class-1 posterior `eta(x)`.
//!
//! Labels are `1` and `2` throughout; features are dense real vectors of a
//! common dimension.

mod lda;
pub mod linalg;
mod logistic;

pub use lda::{fit_lda, LdaModel, LDA_RIDGE};
pub use logistic::{fit_logistic, LogisticModel, LOGISTIC_RIDGE};

use crate::{Error, Result};

/// A fitted model that scores a feature vector with an estimated `eta(x)`.
pub trait ScoreModel {
    /// Feature dimension the model was fitted on.
    fn dim(&self) -> usize;

    /// Estimated class-1 posterior, in `[0, 1]`.
    fn predict_eta(&self, x: &[f64]) -> Result<f64>;
}

/// Numerically safe logistic function.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Checks shapes and labels; returns the dimension and the class counts.
pub(crate) fn check_training(features: &[alloc::vec::Vec<f64>], labels: &[u8]) -> Result<(usize, [usize; 2])> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            got: labels.len(),
        });
    }
    let dim = features.first().map_or(0, |x| x.len());
    if dim == 0 {
        return Err(Error::invalid("training features are empty"));
    }
    let mut counts = [0usize; 2];
    for (x, &y) in features.iter().zip(labels) {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        match y {
            1 => counts[0] += 1,
            2 => counts[1] += 1,
            other => {
                return Err(Error::invalid(alloc::format!("label {other} is not 1 or 2")));
            }
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::invalid("both classes must be present"));
    }
    Ok((dim, counts))
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}
