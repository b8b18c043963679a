use alloc::vec::Vec;

use super::{
    check_probability, sorted_indices, Achieved, CalibrationReport, CalibrationSample, MlrRule,
    MlrSample, NpRule, NpTraceRow, PowerCheck, Rule, Trace,
};
use crate::numerics::binomial_cdf;
use crate::{Error, Result};

/// How the lower threshold is placed for a type I budget `b`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Type1Rule {
    /// Largest threshold whose empirical class-1 fraction at or below it is
    /// at most `b`.
    #[default]
    Empirical,
    /// Order-statistic rank with `P(type I > b) <= delta` under the
    /// binomial law of the class-1 count.
    Umbrella {
        /// Tolerated violation probability.
        delta: f64,
    },
}

/// Options of the type I / type II calibration.
#[derive(Debug, Clone, Copy, Default)]
pub struct NpOptions<'a> {
    /// Placement of the lower threshold.
    pub type1: Type1Rule,
    /// Separate sample on which type II is estimated.
    pub holdout: Option<&'a CalibrationSample>,
}

/// Type I / type II calibration with the default options.
///
/// Sweeps `gamma_k = k / n` for `k = 0..=n`. For each level the lower
/// threshold is the score of rank `k~`, the largest rank whose class-1
/// fraction at or below it is at most `(1 - gamma_k) alpha1`; the next `k`
/// ranks abstain and the upper threshold is the score of rank `k~ + k + 1`
/// (`+inf` when none is left). The smallest level whose estimated type II
/// error is at most `alpha2` is returned.
pub fn calibrate_np(cal: &CalibrationSample, alpha1: f64, alpha2: f64) -> Result<CalibrationReport> {
    calibrate_np_with(cal, alpha1, alpha2, NpOptions::default())
}

/// Type I / type II calibration with explicit options.
pub fn calibrate_np_with(
    cal: &CalibrationSample,
    alpha1: f64,
    alpha2: f64,
    opts: NpOptions<'_>,
) -> Result<CalibrationReport> {
    let holdout = opts.holdout.map(|h| {
        let class2: Vec<f64> = h
            .scores()
            .iter()
            .zip(h.labels())
            .filter(|(_, &l)| l == 2)
            .map(|(&s, _)| s)
            .collect();
        sorted_values(class2)
    });
    let sweep = sweep(cal.scores(), cal.labels(), alpha1, alpha2, opts.type1, holdout.as_deref())?;
    let row = sweep.rows[sweep.selected];
    let rule = row.rule.expect("selected cell is never degenerate");
    Ok(CalibrationReport {
        rule: Rule::Np(rule),
        gamma_hat: row.abstained.unwrap_or(0) as f64 / cal.len() as f64,
        gamma_grid: Some(row.gamma),
        achieved: Achieved {
            conditional_error: None,
            type1: Some(row.type1),
            type2: row.type2,
        },
        feasible: sweep.feasible,
        n: cal.len(),
        trace: Trace::Np(sweep.rows),
        power: None,
    })
}

/// Interval calibration on raw observations under a monotone likelihood ratio.
///
/// Large `x` favours class 2. The class-2 region `x >= tau1` holds a
/// class-1 fraction of at most `(1 - gamma) alpha1`, the next `k` records
/// below it abstain, and the rest are class 1. The level grid and selection
/// follow [`calibrate_np`]. The report also carries the power check: the
/// class-2 detection rate of the `gamma = 0` rule against `1 - alpha2`.
pub fn calibrate_np_mlr(cal: &MlrSample, alpha1: f64, alpha2: f64) -> Result<CalibrationReport> {
    let flipped: Vec<f64> = cal.x().iter().map(|x| -x).collect();
    let mut sweep = sweep(&flipped, cal.labels(), alpha1, alpha2, Type1Rule::Empirical, None)?;
    for row in &mut sweep.rows {
        row.rule = row.rule.map(|r| NpRule {
            tau1: -r.tau1,
            tau2: -r.tau2,
        });
    }
    let row = sweep.rows[sweep.selected];
    let r = row.rule.expect("selected cell is never degenerate");
    let power_at_alpha1 = 1.0 - sweep.rows[0].type2.unwrap_or(0.0);
    Ok(CalibrationReport {
        rule: Rule::Mlr(MlrRule {
            tau1: r.tau1,
            tau2: r.tau2,
        }),
        gamma_hat: row.abstained.unwrap_or(0) as f64 / cal.len() as f64,
        gamma_grid: Some(row.gamma),
        achieved: Achieved {
            conditional_error: None,
            type1: Some(row.type1),
            type2: row.type2,
        },
        feasible: sweep.feasible,
        n: cal.len(),
        trace: Trace::Np(sweep.rows),
        power: Some(PowerCheck {
            power_at_alpha1,
            needs_indecision: power_at_alpha1 < 1.0 - alpha2,
        }),
    })
}

fn sorted_values(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

struct SweepResult {
    rows: Vec<NpTraceRow>,
    selected: usize,
    feasible: bool,
}

/// Largest class-1 count allowed at or below the lower threshold.
///
/// Budgets shrink along the grid, so the umbrella rank is tracked with a
/// pointer that only moves down.
struct Allowance {
    rule: Type1Rule,
    n1: usize,
    umbrella_rank: usize,
}

impl Allowance {
    fn new(rule: Type1Rule, n1: usize) -> Self {
        Self {
            rule,
            n1,
            umbrella_rank: n1,
        }
    }

    fn at(&mut self, budget: f64) -> f64 {
        let n1 = self.n1 as f64;
        match self.rule {
            Type1Rule::Empirical => budget * n1 + 1e-12 * n1,
            Type1Rule::Umbrella { delta } => {
                // P(F(s_(c+1)) > b) = P(Bin(n1, b) <= c)
                let c = &mut self.umbrella_rank;
                while *c > 0 && (budget <= 0.0 || binomial_cdf(*c as u64, self.n1 as u64, budget) > delta) {
                    *c -= 1;
                }
                *c as f64
            }
        }
    }
}

/// Grid sweep on scores where small values favour class 2.
fn sweep(
    scores: &[f64],
    labels: &[u8],
    alpha1: f64,
    alpha2: f64,
    type1: Type1Rule,
    holdout_class2: Option<&[f64]>,
) -> Result<SweepResult> {
    check_probability("alpha1 must lie in (0, 1)", alpha1)?;
    check_probability("alpha2 must lie in (0, 1)", alpha2)?;
    if let Type1Rule::Umbrella { delta } = type1 {
        check_probability("umbrella delta must lie in (0, 1)", delta)?;
    }
    let n = scores.len();
    let order = sorted_indices(scores);
    let sv: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
    let mut prefix1 = alloc::vec![0usize; n + 1];
    let mut prefix2 = alloc::vec![0usize; n + 1];
    for (p, &i) in order.iter().enumerate() {
        prefix1[p + 1] = prefix1[p] + usize::from(labels[i] == 1);
        prefix2[p + 1] = prefix2[p] + usize::from(labels[i] == 2);
    }
    let (n1, n2) = (prefix1[n], prefix2[n]);
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("both classes must be present"));
    }
    if let Some(h) = holdout_class2 {
        if h.is_empty() {
            return Err(Error::invalid("holdout sample has no class-2 records"));
        }
    }
    // at_or_below[r]: class-1 count with score <= sv[r - 1], value based
    let mut group_start = alloc::vec![0usize; n];
    let mut group_end = alloc::vec![n; n];
    for r in 1..n {
        group_start[r] = if sv[r] == sv[r - 1] { group_start[r - 1] } else { r };
    }
    for r in (0..n.saturating_sub(1)).rev() {
        group_end[r] = if sv[r] == sv[r + 1] { group_end[r + 1] } else { r + 1 };
    }
    let c1_at = |r: usize| if r == 0 { 0 } else { prefix1[group_end[r - 1]] };

    let mut rows = Vec::with_capacity(n + 1);
    let mut k_tilde = n;
    let mut allowance = Allowance::new(type1, n1);
    for k in 0..=n {
        let gamma = k as f64 / n as f64;
        let allowed = allowance.at((1.0 - gamma) * alpha1);
        while k_tilde > 0 && c1_at(k_tilde) as f64 > allowed {
            k_tilde -= 1;
        }
        let type1_frac = c1_at(k_tilde) as f64 / n1 as f64;
        if k_tilde + k > n {
            rows.push(NpTraceRow {
                k,
                gamma,
                k_tilde,
                rule: None,
                type1: type1_frac,
                type2: None,
                abstained: None,
            });
            continue;
        }
        let tau1 = if k_tilde == 0 { f64::NEG_INFINITY } else { sv[k_tilde - 1] };
        let upper = k_tilde + k;
        let (tau2, g) = if upper == n {
            (f64::INFINITY, n)
        } else {
            (sv[upper], group_start[upper])
        };
        let rule = NpRule { tau1, tau2 };
        let type2 = match holdout_class2 {
            None => {
                let above = n2 - prefix2[g];
                ratio(above, prefix2[k_tilde] + above)
            }
            Some(h) => {
                let below = h.partition_point(|&s| s <= tau1);
                let above = h.len() - h.partition_point(|&s| s < tau2);
                ratio(above, below + above)
            }
        };
        rows.push(NpTraceRow {
            k,
            gamma,
            k_tilde,
            rule: Some(rule),
            type1: type1_frac,
            type2: Some(type2),
            abstained: Some(g - k_tilde),
        });
    }
    let first_ok = rows
        .iter()
        .position(|r| r.type2.is_some_and(|t| t <= alpha2));
    let (selected, feasible) = match first_ok {
        Some(i) => (i, true),
        None => {
            let mut best = 0;
            for (i, r) in rows.iter().enumerate() {
                if let (Some(t), Some(b)) = (r.type2, rows[best].type2) {
                    if t < b {
                        best = i;
                    }
                }
            }
            (best, false)
        }
    };
    Ok(SweepResult {
        rows,
        selected,
        feasible,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn six_point() -> CalibrationSample {
        CalibrationSample::new(
            vec![0.9, 0.7, 0.55, 0.45, 0.3, 0.2],
            vec![1, 1, 1, 2, 2, 2],
        )
        .unwrap()
    }

    #[test]
    fn six_point_hand_trace() {
        let rep = calibrate_np(&six_point(), 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let Trace::Np(rows) = &rep.trace else { panic!() };
        let expect = [
            (4, Some((0.55, 0.7))),
            (3, Some((0.45, 0.7))),
            (3, Some((0.45, 0.9))),
            (3, Some((0.45, f64::INFINITY))),
            (3, None),
            (3, None),
            (3, None),
        ];
        assert_eq!(rows.len(), expect.len());
        for (row, (kt, taus)) in rows.iter().zip(expect) {
            assert_eq!(row.k_tilde, kt, "k={}", row.k);
            assert_eq!(row.rule.map(|r| (r.tau1, r.tau2)), taus, "k={}", row.k);
        }
        assert_eq!(rep.gamma_grid, Some(0.0));
        assert_eq!(rep.rule, Rule::Np(NpRule { tau1: 0.55, tau2: 0.7 }));
        assert!(rep.feasible);
    }

    #[test]
    fn separated_classes_need_no_indecision() {
        let cal = CalibrationSample::new(vec![0.9, 0.8, 0.7, 0.3, 0.2, 0.1], vec![1, 1, 1, 2, 2, 2])
            .unwrap();
        let rep = calibrate_np(&cal, 0.2, 0.2).unwrap();
        assert_eq!(rep.gamma_grid, Some(0.0));
        assert_eq!(rep.achieved.type1, Some(0.0));
        assert_eq!(rep.achieved.type2, Some(0.0));
    }

    #[test]
    fn umbrella_is_more_conservative() {
        let scores: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) / 200.0).collect();
        let labels: Vec<u8> = (0..200).map(|i| if i % 3 == 0 { 2 } else { 1 }).collect();
        let cal = CalibrationSample::new(scores, labels).unwrap();
        let plain = calibrate_np(&cal, 0.1, 0.5).unwrap();
        let opts = NpOptions {
            type1: Type1Rule::Umbrella { delta: 0.05 },
            holdout: None,
        };
        let umb = calibrate_np_with(&cal, 0.1, 0.5, opts).unwrap();
        let (Trace::Np(a), Trace::Np(b)) = (&plain.trace, &umb.trace) else { panic!() };
        assert!(b[0].k_tilde <= a[0].k_tilde);
        assert!(b[0].type1 < a[0].type1);
    }

    #[test]
    fn mlr_interval_orientation() {
        let x = vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let cal = MlrSample::new(x, vec![1, 1, 2, 1, 2, 2]).unwrap();
        let rep = calibrate_np_mlr(&cal, 0.34, 0.1).unwrap();
        let Rule::Mlr(rule) = rep.rule else { panic!() };
        assert!(rule.tau2 <= rule.tau1);
        assert!(rep.power.is_some());
    }
}
