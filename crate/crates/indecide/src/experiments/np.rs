use indecide_core::calibration::{
    calibrate_np_with, CalibrationSample, Decision, NpOptions, NpRule, Trace, Type1Rule,
};
use indecide_core::gmm::GmmSpec;
use indecide_core::numerics::seeded_stream;

use super::{draw_split, fit_scorer, parallel_map, stream_id, Counts, RepRow, SimConfig, SimResult, Summary};
use crate::FormatError;

/// Spread over the indecision grid of the replication-averaged test error
/// of the calibrated rule at each grid level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    /// Separation.
    pub delta: f64,
    /// `error`, `type1` or `type2`.
    pub metric: &'static str,
    /// Grid levels contributing.
    pub cells: usize,
    /// 5th percentile over levels.
    pub p05: f64,
    /// 95th percentile over levels.
    pub p95: f64,
}

/// Arm names of the NP sweep.
pub const NP_ARMS: [&str; 3] = ["np-baseline", "indecision", "bayes"];

/// Test counts of an `NpRule` from per-class sorted scores.
fn rule_counts(rule: NpRule, sorted: &[Vec<f64>; 2]) -> Counts {
    let mut c = Counts::default();
    for (k, s) in sorted.iter().enumerate() {
        let le_tau1 = s.partition_point(|&v| v <= rule.tau1);
        let lt_tau2 = s.partition_point(|&v| v < rule.tau2);
        let pred2 = le_tau1;
        let pred1 = s.len() - lt_tau2.max(le_tau1);
        c.n[k] = s.len();
        c.decided[k] = pred1 + pred2;
        c.wrong[k] = if k == 0 { pred2 } else { pred1 };
    }
    c
}

struct RepOutcome {
    rows: Vec<RepRow>,
    // per grid level: (error, type1, type2), None on degenerate cells
    levels: Vec<Option<[f64; 3]>>,
}

fn one_rep(cfg: &SimConfig, i: usize, rep: usize) -> RepOutcome {
    let delta = cfg.delta_grid[i];
    let fail = |e: &dyn std::fmt::Display| RepOutcome {
        rows: NP_ARMS.iter().map(|a| RepRow::failed(delta, rep, a, e)).collect(),
        levels: Vec::new(),
    };
    let spec = match GmmSpec::new(delta) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let mut rng = seeded_stream(cfg.seed, stream_id(i, rep));
    let split = draw_split(spec, &mut rng, cfg);
    let fitted = match fit_scorer(cfg.scorer, spec, &split.train) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let cal = match CalibrationSample::new(fitted.etas(&split.cal.0), split.cal.1.clone()) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let opts = NpOptions {
        type1: cfg.umbrella_delta.map_or(Type1Rule::Empirical, |d| Type1Rule::Umbrella { delta: d }),
        holdout: None,
    };
    let report = match calibrate_np_with(&cal, cfg.alpha1, cfg.alpha2, opts) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let test_eta = fitted.etas(&split.test.0);
    let mut sorted = [Vec::new(), Vec::new()];
    for (&e, &y) in test_eta.iter().zip(&split.test.1) {
        sorted[usize::from(y - 1)].push(e);
    }
    for s in &mut sorted {
        s.sort_by(f64::total_cmp);
    }
    let Trace::Np(trace) = &report.trace else {
        return fail(&"calibration returned no trace");
    };
    let levels: Vec<Option<[f64; 3]>> = trace
        .iter()
        .map(|row| {
            row.rule.map(|r| {
                let c = rule_counts(r, &sorted);
                [c.error(), c.type1(), c.type2()]
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(3);
    match trace.first().and_then(|r| r.rule.map(|rule| (rule, r.type2))) {
        Some((rule, type2)) => {
            let c = rule_counts(rule, &sorted);
            let feasible = type2.is_some_and(|t| t <= cfg.alpha2);
            rows.push(RepRow::from_counts(delta, rep, NP_ARMS[0], 0.0, feasible, &c));
        }
        None => rows.push(RepRow::failed(delta, rep, NP_ARMS[0], "degenerate gamma = 0 cell")),
    }
    let c = Counts::tally(
        test_eta.iter().map(|&e| report.rule.decide_scalar(e).unwrap_or(Decision::Abstain)),
        &split.test.1,
    );
    rows.push(RepRow::from_counts(delta, rep, NP_ARMS[1], report.gamma_hat, report.feasible, &c));
    let c = Counts::tally(
        test_eta.iter().map(|&e| Decision::Class(if e >= 0.5 { 1 } else { 2 })),
        &split.test.1,
    );
    rows.push(RepRow::from_counts(delta, rep, NP_ARMS[2], 0.0, true, &c));
    RepOutcome { rows, levels }
}

/// Type I / type II sweep with three arms per replication: the `gamma = 0`
/// rule of the calibration grid (`np-baseline`), the calibrated rule with
/// indecisions (`indecision`) and the plug-in Bayes rule (`bayes`).
pub fn run_np_sweep(cfg: &SimConfig, workers: Option<usize>) -> Result<(SimResult, Vec<BandRow>), FormatError> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.delta_grid.len() * cfg.reps * 3);
    let mut bands = Vec::new();
    for (i, &delta) in cfg.delta_grid.iter().enumerate() {
        let outcomes = parallel_map(workers, cfg.reps, |rep| one_rep(cfg, i, rep));
        let levels = cfg.n_cal + 1;
        let mut sums = vec![[0.0f64; 3]; levels];
        let mut counts = vec![0usize; levels];
        for o in &outcomes {
            for (k, v) in o.levels.iter().enumerate() {
                if let Some(v) = v {
                    for m in 0..3 {
                        sums[k][m] += v[m];
                    }
                    counts[k] += 1;
                }
            }
        }
        for (m, metric) in ["error", "type1", "type2"].into_iter().enumerate() {
            let means: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(s, &c)| s[m] / c as f64)
                .collect();
            let s = Summary::of(&means);
            bands.push(BandRow {
                delta,
                metric,
                cells: s.reps,
                p05: s.p05,
                p95: s.p95,
            });
        }
        rows.extend(outcomes.into_iter().flat_map(|o| o.rows));
    }
    let arms: Vec<String> = NP_ARMS.iter().map(|s| s.to_string()).collect();
    Ok((SimResult::from_rows(cfg.clone(), rows, &arms), bands))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_counts_match_direct_decisions() {
        let sorted = [vec![0.1, 0.3, 0.3, 0.6, 0.9], vec![0.05, 0.3, 0.5, 0.7]];
        for rule in [
            NpRule { tau1: 0.3, tau2: 0.6 },
            NpRule { tau1: 0.3, tau2: 0.3 },
            NpRule { tau1: f64::NEG_INFINITY, tau2: 0.5 },
            NpRule { tau1: 0.5, tau2: f64::INFINITY },
        ] {
            let labels: Vec<u8> = [1u8; 5].into_iter().chain([2u8; 4]).collect();
            let all: Vec<f64> = sorted.concat();
            let direct = Counts::tally(all.iter().map(|&e| rule.decide(e)), &labels);
            assert_eq!(rule_counts(rule, &sorted), direct, "{rule:?}");
        }
    }
}
