use alloc::vec::Vec;

use super::{
    check_probability, confidence, sorted_indices, AccuracyTraceRow, Achieved, CalibrationReport,
    CalibrationSample, MlrSample, MlrSymmetricRule, Rule, SelectiveBinaryRule, Trace,
};
use crate::{Error, Result};

/// Confidence, predicted label and true label of every record.
struct Scored {
    conf: Vec<f64>,
    pred: Vec<u8>,
    label: Vec<u8>,
}

impl Scored {
    fn binary(cal: &CalibrationSample) -> Self {
        Self {
            conf: cal.scores().iter().map(|&s| confidence(s)).collect(),
            pred: cal.scores().iter().map(|&s| if s >= 0.5 { 1 } else { 2 }).collect(),
            label: cal.labels().to_vec(),
        }
    }

    fn mlr(cal: &MlrSample) -> Self {
        Self {
            conf: cal.x().iter().map(|x| x.abs()).collect(),
            pred: cal.x().iter().map(|&x| if x >= 0.0 { 2 } else { 1 }).collect(),
            label: cal.labels().to_vec(),
        }
    }
}

/// Sorted confidences with tie-group starts and error suffix sums.
struct Sweep {
    sorted_conf: Vec<f64>,
    group_start: Vec<usize>,
    suffix_errors: Vec<usize>,
}

impl Sweep {
    fn new(s: &Scored) -> Self {
        let order = sorted_indices(&s.conf);
        let n = order.len();
        let sorted_conf: Vec<f64> = order.iter().map(|&i| s.conf[i]).collect();
        let mut group_start = alloc::vec![0; n];
        for r in 1..n {
            group_start[r] = if sorted_conf[r] == sorted_conf[r - 1] {
                group_start[r - 1]
            } else {
                r
            };
        }
        let mut suffix_errors = alloc::vec![0; n + 1];
        for r in (0..n).rev() {
            let i = order[r];
            suffix_errors[r] = suffix_errors[r + 1] + usize::from(s.pred[i] != s.label[i]);
        }
        Self {
            sorted_conf,
            group_start,
            suffix_errors,
        }
    }

    fn n(&self) -> usize {
        self.sorted_conf.len()
    }

    /// Decided and misclassified counts when deciding from sorted position `start` on.
    fn decided_from(&self, start: usize) -> (usize, usize) {
        (self.n() - start, self.suffix_errors[start])
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Candidate sweep shared by the posterior and raw-observation paths.
///
/// Returns the chosen threshold (`+inf` when none qualifies), the abstained
/// count, the reported error, feasibility and the trace.
fn first_crossing(s: &Scored, alpha: f64) -> (f64, usize, f64, bool, Vec<AccuracyTraceRow>) {
    let sweep = Sweep::new(s);
    let n = sweep.n();
    let mut trace = Vec::with_capacity(n);
    let mut running_min = f64::INFINITY;
    let mut chosen = None;
    for r in 0..n {
        let start = sweep.group_start[r];
        let (decided, errors) = sweep.decided_from(start);
        let risk = ratio(errors, decided);
        running_min = running_min.min(risk);
        trace.push(AccuracyTraceRow {
            rank: r + 1,
            tau: sweep.sorted_conf[r],
            decided,
            errors,
            risk,
            running_min,
        });
        if chosen.is_none() && running_min <= alpha {
            chosen = Some((sweep.sorted_conf[r], start, risk));
        }
    }
    match chosen {
        Some((tau, abstained, risk)) => (tau, abstained, risk, true, trace),
        None => (f64::INFINITY, n, running_min, false, trace),
    }
}

fn check_nonempty(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("calibration sample is empty"));
    }
    Ok(())
}

/// Accuracy calibration by the first-crossing threshold sweep.
///
/// Confidences `eta ∨ (1 - eta)` are sorted ascending; at each candidate the
/// conditional error over records with confidence at or above it is
/// estimated, a running minimum is kept, and the first candidate whose
/// running minimum is at most `alpha` is returned. When none qualifies the
/// report carries the all-abstain rule with `feasible = false` and the
/// smallest error seen.
pub fn calibrate_accuracy(cal: &CalibrationSample, alpha: f64) -> Result<CalibrationReport> {
    check_nonempty(cal.len())?;
    check_probability("alpha must lie in (0, 1)", alpha)?;
    let (tau, abstained, error, feasible, trace) = first_crossing(&Scored::binary(cal), alpha);
    Ok(CalibrationReport {
        rule: Rule::Selective(SelectiveBinaryRule { tau }),
        gamma_hat: abstained as f64 / cal.len() as f64,
        gamma_grid: None,
        achieved: Achieved {
            conditional_error: Some(error),
            ..Achieved::default()
        },
        feasible,
        n: cal.len(),
        trace: Trace::Accuracy(trace),
        power: None,
    })
}

/// Symmetric interval rule on raw observations calibrated by the same sweep
/// on `|x|`.
pub fn calibrate_accuracy_mlr(cal: &MlrSample, alpha: f64) -> Result<CalibrationReport> {
    check_nonempty(cal.len())?;
    check_probability("alpha must lie in (0, 1)", alpha)?;
    let (tau, abstained, error, feasible, trace) = first_crossing(&Scored::mlr(cal), alpha);
    Ok(CalibrationReport {
        rule: Rule::MlrSymmetric(MlrSymmetricRule { tau }),
        gamma_hat: abstained as f64 / cal.len() as f64,
        gamma_grid: None,
        achieved: Achieved {
            conditional_error: Some(error),
            ..Achieved::default()
        },
        feasible,
        n: cal.len(),
        trace: Trace::Accuracy(trace),
        power: None,
    })
}

/// Number of abstentions `ceil(gamma n)` for a fixed indecision level.
pub(crate) fn ceiling_count(gamma: f64, n: usize) -> usize {
    let k = libm::ceil(gamma * n as f64 - 1e-9);
    (k.max(0.0) as usize).min(n)
}

/// Fixed-indecision accuracy rule.
///
/// Abstains on the `ceil(gamma n)` least confident records: the threshold is
/// the smallest observed confidence strictly above the `ceil(gamma n)`-th
/// smallest one. Ties at that order statistic abstain together.
pub fn calibrate_accuracy_fixed_gamma(cal: &CalibrationSample, gamma: f64) -> Result<CalibrationReport> {
    check_nonempty(cal.len())?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain {
            what: "gamma must lie in [0, 1)",
            value: gamma,
        });
    }
    let scored = Scored::binary(cal);
    let sweep = Sweep::new(&scored);
    let n = sweep.n();
    let k = ceiling_count(gamma, n);
    let start = if k == 0 {
        0
    } else {
        let cut = sweep.sorted_conf[k - 1];
        sweep.sorted_conf.partition_point(|&c| c <= cut)
    };
    let tau = sweep.sorted_conf.get(start).copied().unwrap_or(f64::INFINITY);
    let (decided, errors) = sweep.decided_from(start);
    Ok(CalibrationReport {
        rule: Rule::Selective(SelectiveBinaryRule { tau }),
        gamma_hat: start as f64 / n as f64,
        gamma_grid: Some(gamma),
        achieved: Achieved {
            conditional_error: Some(ratio(errors, decided)),
            ..Achieved::default()
        },
        feasible: true,
        n,
        trace: Trace::None,
        power: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn golden() -> CalibrationSample {
        CalibrationSample::new(vec![0.9, 0.8, 0.6, 0.4, 0.1], vec![1, 1, 2, 2, 2]).unwrap()
    }

    #[test]
    fn five_point_hand_trace() {
        let rep = calibrate_accuracy(&golden(), 0.1).unwrap();
        assert_eq!(rep.rule, Rule::Selective(SelectiveBinaryRule { tau: 0.8 }));
        assert!((rep.gamma_hat - 0.4).abs() < 1e-15);
        assert!(rep.feasible);
        let Trace::Accuracy(rows) = rep.trace else { panic!() };
        let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
        assert_eq!(taus, vec![0.6, 0.6, 0.8, 0.9, 0.9]);
        assert!((rows[0].risk - 0.2).abs() < 1e-15);
        assert_eq!(rows[2].risk, 0.0);
    }

    #[test]
    fn perfect_scores_decide_everything() {
        let cal = CalibrationSample::new(vec![1.0, 0.0, 1.0], vec![1, 2, 1]).unwrap();
        let rep = calibrate_accuracy(&cal, 0.05).unwrap();
        assert_eq!(rep.rule, Rule::Selective(SelectiveBinaryRule { tau: 1.0 }));
        assert_eq!(rep.gamma_hat, 0.0);
    }

    #[test]
    fn flipped_labels_infeasible() {
        let cal = CalibrationSample::new(vec![0.9, 0.8, 0.2], vec![2, 2, 1]).unwrap();
        let rep = calibrate_accuracy(&cal, 0.01).unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.gamma_hat, 1.0);
        assert_eq!(rep.achieved.conditional_error, Some(1.0));
    }

    #[test]
    fn fixed_gamma_ceiling_rule() {
        let scores: Vec<f64> = (0..10).map(|i| 0.05 + 0.09 * i as f64).collect();
        let cal = CalibrationSample::new(scores.clone(), vec![1; 10]).unwrap();
        let rep = calibrate_accuracy_fixed_gamma(&cal, 0.5).unwrap();
        let abstained = scores
            .iter()
            .filter(|&&s| matches!(rep.rule.decide_scalar(s).unwrap(), super::super::Decision::Abstain))
            .count();
        assert_eq!(abstained, 5);
        let all = calibrate_accuracy_fixed_gamma(&golden(), 0.0).unwrap();
        assert_eq!(all.gamma_hat, 0.0);
        assert!((all.achieved.conditional_error.unwrap() - 0.2).abs() < 1e-15);
    }
}
