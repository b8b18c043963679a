//! Selective classification with indecisions.
//!
//! This crate holds the pure algorithmic side of the toolkit:
//!
//! * [`numerics`]: standard normal tails and quantiles, monotone bisection,
//!   and the seeded random-stream contract used by every simulation.
//! * [`gmm`]: closed-form oracle for the symmetric two-component Gaussian
//!   mixture, mapping between the decision threshold, the indecision mass and
//!   the conditional risk, plus the phase-transition exponents.
//! * [`discrete`]: exact minimax abstention rules on finite-support joint
//!   measures (accuracy, Neyman–Pearson and multi-class), together with an
//!   exhaustive brute-force verifier.
//! * [`calibration`]: finite-sample calibration of score thresholds that
//!   control the conditional misclassification rate or the type I / type II
//!   errors with the smallest empirical indecision mass.
//! * [`models`]: small plug-in score estimators (LDA and logistic regression).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, charts, the
//! simulation harness and the command line live in the `indecide` crate.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod calibration;
pub mod discrete;
mod error;
pub mod gmm;
pub mod models;
pub mod numerics;

pub use error::{Error, Result};
