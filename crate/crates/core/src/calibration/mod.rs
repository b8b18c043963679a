//! Finite-sample calibration of abstention rules.
//!
//! Every path sorts the calibration scores once, sweeps the candidate
//! thresholds in order and returns a [`CalibrationReport`]. Ties are broken
//! by the original record index so reruns are deterministic.

mod accuracy;
mod multiclass;
mod np;

pub use accuracy::{calibrate_accuracy, calibrate_accuracy_fixed_gamma, calibrate_accuracy_mlr};
pub use multiclass::calibrate_multiclass_fixed_gamma;
pub use np::{calibrate_np, calibrate_np_mlr, calibrate_np_with, NpOptions, Type1Rule};

use alloc::vec::Vec;

use crate::{Error, Result};

/// Tolerance when checking that score vectors sum to one.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Binary records `(eta_hat, label)` with labels in `{1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl CalibrationSample {
    /// Validates scores in `[0, 1]` and labels in `{1, 2}`.
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        check_lengths(scores.len(), labels.len())?;
        if let Some(i) = scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid(alloc::format!(
                "score {} at record {i} is outside [0, 1]",
                scores[i]
            )));
        }
        check_binary_labels(&labels)?;
        Ok(Self { scores, labels })
    }

    /// Estimated class-1 posteriors.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Labels in `{1, 2}`.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    /// True when there are no records.
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Number of records carrying `label`.
    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Raw scalar observations with labels in `{1, 2}`; large `x` favours class 2.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrSample {
    x: Vec<f64>,
    labels: Vec<u8>,
}

impl MlrSample {
    /// Validates finite observations and labels in `{1, 2}`.
    pub fn new(x: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        check_lengths(x.len(), labels.len())?;
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(alloc::format!("observation {i} is not finite")));
        }
        check_binary_labels(&labels)?;
        Ok(Self { x, labels })
    }

    /// Observations.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Labels in `{1, 2}`.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// True when there are no records.
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Score vectors on the simplex with optional labels in `{1..K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassSample {
    scores: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
    classes: usize,
}

impl MulticlassSample {
    /// Validates vector length, simplex membership and labels.
    pub fn new(scores: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let classes = scores.first().map_or(0, |s| s.len());
        if !scores.is_empty() && classes < 2 {
            return Err(Error::invalid("score vectors need at least two classes"));
        }
        for (i, s) in scores.iter().enumerate() {
            if s.len() != classes {
                return Err(Error::DimensionMismatch {
                    expected: classes,
                    got: s.len(),
                });
            }
            let total: f64 = s.iter().sum();
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) || (total - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::invalid(alloc::format!(
                    "score vector {i} is not a probability vector"
                )));
            }
        }
        if let Some(labels) = &labels {
            check_lengths(scores.len(), labels.len())?;
            if let Some(i) = labels.iter().position(|&l| l == 0 || l > classes) {
                return Err(Error::invalid(alloc::format!(
                    "label {} at record {i} is outside 1..={classes}",
                    labels[i]
                )));
            }
        }
        Ok(Self {
            scores,
            labels,
            classes,
        })
    }

    /// Score vectors.
    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    /// Labels when present.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of classes.
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    /// True when there are no records.
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

fn check_binary_labels(labels: &[u8]) -> Result<()> {
    if let Some(i) = labels.iter().position(|&l| l != 1 && l != 2) {
        return Err(Error::invalid(alloc::format!(
            "label {} at record {i} is not 1 or 2",
            labels[i]
        )));
    }
    Ok(())
}

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::Domain { what, value });
    }
    Ok(())
}

/// Output of a rule on one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    /// Predicted class, 1-based.
    Class(usize),
    /// Indecision.
    Abstain,
}

/// Confidence `eta ∨ (1 - eta)`, computed the same way by rules and calibration.
pub fn confidence(eta: f64) -> f64 {
    if eta >= 0.5 {
        eta
    } else {
        1.0 - eta
    }
}

/// Decide iff `eta ∨ (1 - eta) >= tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectiveBinaryRule {
    /// Confidence threshold; `+inf` abstains everywhere.
    pub tau: f64,
}

impl SelectiveBinaryRule {
    /// Applies the rule to a posterior estimate.
    pub fn decide(&self, eta: f64) -> Decision {
        if eta >= self.tau {
            Decision::Class(1)
        } else if 1.0 - eta >= self.tau {
            Decision::Class(2)
        } else {
            Decision::Abstain
        }
    }
}

/// Class 1 when `eta >= tau2`, class 2 when `eta <= tau1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpRule {
    /// Upper edge of the class-2 region.
    pub tau1: f64,
    /// Lower edge of the class-1 region.
    pub tau2: f64,
}

impl NpRule {
    /// Applies the rule to a posterior estimate.
    pub fn decide(&self, eta: f64) -> Decision {
        if eta <= self.tau1 {
            Decision::Class(2)
        } else if eta >= self.tau2 {
            Decision::Class(1)
        } else {
            Decision::Abstain
        }
    }
}

/// Abstain when the top score is at or below `threshold`, else predict the argmax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MulticlassRule {
    /// Top-score threshold; `-inf` never abstains.
    pub threshold: f64,
}

impl MulticlassRule {
    /// Applies the rule to a score vector.
    pub fn decide(&self, scores: &[f64]) -> Decision {
        let (best, top) = top_score(scores);
        if top <= self.threshold {
            Decision::Abstain
        } else {
            Decision::Class(best + 1)
        }
    }
}

/// Index and value of the largest score, first index on ties.
pub(crate) fn top_score(scores: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (k, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = k;
        }
    }
    (best, scores[best])
}

/// Interval rule on raw observations: class 1 at or below `tau2`, class 2 at
/// or above `tau1`, abstain strictly between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlrRule {
    /// Lower edge of the class-2 region.
    pub tau1: f64,
    /// Upper edge of the class-1 region.
    pub tau2: f64,
}

impl MlrRule {
    /// Applies the rule to an observation.
    pub fn decide(&self, x: f64) -> Decision {
        if x >= self.tau1 {
            Decision::Class(2)
        } else if x <= self.tau2 {
            Decision::Class(1)
        } else {
            Decision::Abstain
        }
    }
}

/// Symmetric interval rule: class 2 when `x >= tau`, class 1 when `x <= -tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlrSymmetricRule {
    /// Half-width of the abstention interval; `+inf` abstains everywhere.
    pub tau: f64,
}

impl MlrSymmetricRule {
    /// Applies the rule to an observation.
    pub fn decide(&self, x: f64) -> Decision {
        if x >= self.tau {
            Decision::Class(2)
        } else if x <= -self.tau {
            Decision::Class(1)
        } else {
            Decision::Abstain
        }
    }
}

/// Any calibrated rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// Single confidence threshold on `eta_hat`.
    Selective(SelectiveBinaryRule),
    /// Ordered pair of thresholds on `eta_hat`.
    Np(NpRule),
    /// Top-score threshold on a score vector.
    Multiclass(MulticlassRule),
    /// Interval on raw observations.
    Mlr(MlrRule),
    /// Symmetric interval on raw observations.
    MlrSymmetric(MlrSymmetricRule),
}

impl Rule {
    /// Applies a scalar rule; multi-class rules need [`Rule::decide_vector`].
    pub fn decide_scalar(&self, v: f64) -> Result<Decision> {
        Ok(match self {
            Rule::Selective(r) => r.decide(v),
            Rule::Np(r) => r.decide(v),
            Rule::Mlr(r) => r.decide(v),
            Rule::MlrSymmetric(r) => r.decide(v),
            Rule::Multiclass(_) => {
                return Err(Error::invalid("a multi-class rule needs score vectors"));
            }
        })
    }

    /// Applies a multi-class rule.
    pub fn decide_vector(&self, scores: &[f64]) -> Result<Decision> {
        match self {
            Rule::Multiclass(r) => Ok(r.decide(scores)),
            _ if scores.len() == 1 => self.decide_scalar(scores[0]),
            _ => Err(Error::invalid("a scalar rule needs a single score")),
        }
    }
}

/// Error estimates at the selected operating point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Achieved {
    /// Misclassification rate among decided records.
    pub conditional_error: Option<f64>,
    /// Fraction of class-1 records predicted as class 2.
    pub type1: Option<f64>,
    /// Fraction of decided class-2 records predicted as class 1.
    pub type2: Option<f64>,
}

/// One candidate threshold of the accuracy sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTraceRow {
    /// 1-based rank of the candidate in the sorted confidences.
    pub rank: usize,
    /// Candidate threshold.
    pub tau: f64,
    /// Records with confidence at or above `tau`.
    pub decided: usize,
    /// Misclassified decided records.
    pub errors: usize,
    /// `errors / decided`.
    pub risk: f64,
    /// Running minimum of `risk` up to this rank.
    pub running_min: f64,
}

/// One grid cell of the type I / type II sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpTraceRow {
    /// Grid index; `gamma = k / n`.
    pub k: usize,
    /// Grid indecision level.
    pub gamma: f64,
    /// Largest rank meeting the type I budget.
    pub k_tilde: usize,
    /// Thresholds, `None` on degenerate cells (`k_tilde + k > n`). On the
    /// raw-observation path they are expressed on the `x` axis.
    pub rule: Option<NpRule>,
    /// Fraction of class-1 records at or below `tau1`.
    pub type1: f64,
    /// Fraction of decided class-2 records predicted as class 1, `None` on
    /// degenerate cells.
    pub type2: Option<f64>,
    /// Records abstained by the threshold rule, `None` on degenerate cells.
    pub abstained: Option<usize>,
}

/// Per-candidate diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    /// No sweep was run.
    None,
    /// Candidate thresholds of the accuracy sweep.
    Accuracy(Vec<AccuracyTraceRow>),
    /// Grid cells of the type I / type II sweep.
    Np(Vec<NpTraceRow>),
}

/// Power check reported by the MLR type I / type II path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCheck {
    /// Empirical class-2 detection rate of the no-indecision rule at `alpha1`.
    pub power_at_alpha1: f64,
    /// `power_at_alpha1 < 1 - alpha2`.
    pub needs_indecision: bool,
}

/// Universal output of every calibration path.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    /// Selected rule.
    pub rule: Rule,
    /// Fraction of calibration records the rule abstains on.
    pub gamma_hat: f64,
    /// Grid level selected, for grid-based paths.
    pub gamma_grid: Option<f64>,
    /// Error estimates used at selection time.
    pub achieved: Achieved,
    /// Whether the targets were met on the calibration data.
    pub feasible: bool,
    /// Number of calibration records.
    pub n: usize,
    /// Per-candidate diagnostics.
    pub trace: Trace,
    /// MLR power criterion.
    pub power: Option<PowerCheck>,
}

/// Stable order of `keys` ascending, ties by index.
pub(crate) fn sorted_indices(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    order
}
