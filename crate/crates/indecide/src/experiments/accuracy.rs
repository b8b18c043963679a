use indecide_core::calibration::{calibrate_accuracy, CalibrationSample, Rule};
use indecide_core::gmm::{gamma_for_target_risk, GmmSpec};
use indecide_core::numerics::seeded_stream;

use super::{draw_split, fit_scorer, parallel_map, stream_id, Counts, RepRow, Scorer, SimConfig, SimResult};
use crate::FormatError;

/// Population benchmark of the accuracy sweep at one separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPopulationRow {
    /// Separation.
    pub delta: f64,
    /// Bayes error without indecisions.
    pub bayes_risk: f64,
    /// Minimal indecision mass reaching the target error.
    pub gamma_star: f64,
}

fn one_arm(delta: f64, rep: usize, arm: &str, scorer: Scorer, spec: GmmSpec, split: &super::Split, alpha: f64) -> RepRow {
    let fitted = match fit_scorer(scorer, spec, &split.train) {
        Ok(f) => f,
        Err(e) => return RepRow::failed(delta, rep, arm, e),
    };
    let cal = match CalibrationSample::new(fitted.etas(&split.cal.0), split.cal.1.clone()) {
        Ok(c) => c,
        Err(e) => return RepRow::failed(delta, rep, arm, e),
    };
    let report = match calibrate_accuracy(&cal, alpha) {
        Ok(r) => r,
        Err(e) => return RepRow::failed(delta, rep, arm, e),
    };
    let rule: Rule = report.rule;
    let decisions = split.test.0.iter().map(|&x| rule.decide_scalar(fitted.eta(x)).unwrap_or(indecide_core::calibration::Decision::Abstain));
    let counts = Counts::tally(decisions, &split.test.1);
    RepRow::from_counts(delta, rep, arm, report.gamma_hat, report.feasible, &counts)
}

/// Accuracy-control sweep: the configured scorer and, unless it is the
/// oracle already, an `oracle-eta` arm on the same draws.
pub fn run_accuracy_sweep(
    cfg: &SimConfig,
    workers: Option<usize>,
) -> Result<(SimResult, Vec<AccuracyPopulationRow>), FormatError> {
    cfg.validate()?;
    let mut arms = vec![cfg.scorer];
    if cfg.scorer != Scorer::OracleEta {
        arms.push(Scorer::OracleEta);
    }
    let cells = cfg.delta_grid.len() * cfg.reps;
    let rows: Vec<Vec<RepRow>> = parallel_map(workers, cells, |job| {
        let (i, rep) = (job / cfg.reps, job % cfg.reps);
        let delta = cfg.delta_grid[i];
        let spec = match GmmSpec::new(delta) {
            Ok(s) => s,
            Err(e) => return arms.iter().map(|a| RepRow::failed(delta, rep, a.name(), &e)).collect(),
        };
        let mut rng = seeded_stream(cfg.seed, stream_id(i, rep));
        let split = draw_split(spec, &mut rng, cfg);
        arms.iter()
            .map(|&a| one_arm(delta, rep, a.name(), a, spec, &split, cfg.alpha))
            .collect()
    });
    let names: Vec<String> = arms.iter().map(|a| a.name().to_string()).collect();
    let result = SimResult::from_rows(cfg.clone(), rows.into_iter().flatten().collect(), &names);
    let mut population = Vec::with_capacity(cfg.delta_grid.len());
    for &delta in &cfg.delta_grid {
        let spec = GmmSpec::new(delta).ok();
        let gamma_star = spec
            .and_then(|s| gamma_for_target_risk(s, cfg.alpha).ok())
            .map_or(f64::NAN, |p| p.gamma);
        population.push(AccuracyPopulationRow {
            delta,
            bayes_risk: spec.map_or(f64::NAN, |s| s.bayes_risk()),
            gamma_star,
        });
    }
    Ok((result, population))
}
