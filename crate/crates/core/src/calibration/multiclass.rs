use super::accuracy::ceiling_count;
use super::{top_score, Achieved, CalibrationReport, MulticlassRule, MulticlassSample, Rule, Trace};
use crate::{Error, Result};

/// Fixed-indecision multi-class rule.
///
/// The threshold is the `ceil(gamma n)`-th smallest top score; records at
/// or below it abstain and the rest get the argmax class. Labels, when
/// present, are only used to report the conditional error.
pub fn calibrate_multiclass_fixed_gamma(cal: &MulticlassSample, gamma: f64) -> Result<CalibrationReport> {
    if cal.is_empty() {
        return Err(Error::invalid("calibration sample is empty"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain {
            what: "gamma must lie in [0, 1)",
            value: gamma,
        });
    }
    let n = cal.len();
    let mut tops: alloc::vec::Vec<f64> = cal.scores().iter().map(|s| top_score(s).1).collect();
    tops.sort_by(f64::total_cmp);
    let k = ceiling_count(gamma, n);
    let threshold = if k == 0 { f64::NEG_INFINITY } else { tops[k - 1] };
    let rule = MulticlassRule { threshold };
    let mut abstained = 0usize;
    let (mut decided, mut errors) = (0usize, 0usize);
    for (i, s) in cal.scores().iter().enumerate() {
        match rule.decide(s) {
            super::Decision::Abstain => abstained += 1,
            super::Decision::Class(c) => {
                decided += 1;
                if cal.labels().is_some_and(|l| l[i] != c) {
                    errors += 1;
                }
            }
        }
    }
    let conditional_error = cal.labels().map(|_| {
        if decided == 0 {
            0.0
        } else {
            errors as f64 / decided as f64
        }
    });
    Ok(CalibrationReport {
        rule: Rule::Multiclass(rule),
        gamma_hat: abstained as f64 / n as f64,
        gamma_grid: Some(gamma),
        achieved: Achieved {
            conditional_error,
            ..Achieved::default()
        },
        feasible: true,
        n,
        trace: Trace::None,
        power: None,
    })
}
