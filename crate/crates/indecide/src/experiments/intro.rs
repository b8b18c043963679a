use std::path::Path;

use indecide_core::calibration::{calibrate_accuracy, CalibrationSample, Decision};
use indecide_core::gmm::{gamma_for_target_risk, GmmSpec};
use indecide_core::numerics::seeded_stream;

use super::{draw_split, fit_scorer, parallel_map, stream_id, Counts, SimConfig};
use crate::chart::{line_chart, Series};
use crate::data::writer;
use crate::format::fmt_f64;
use crate::FormatError;

/// Accuracy / indecision tradeoff at one separation.
#[derive(Debug, Clone, PartialEq)]
pub struct IntroRow {
    /// Half distance between the class means.
    pub delta: f64,
    /// Full distance between the class means, `2 delta`.
    pub mean_distance: f64,
    /// Bayes error without indecisions.
    pub bayes_error: f64,
    /// Minimal indecision mass reaching the target error (closed form).
    pub gamma_star: f64,
    /// Accuracy on decided records at `gamma_star`.
    pub selective_accuracy: f64,
    /// Abstained test fraction of the threshold calibrated on an
    /// independent sample.
    pub gamma_empirical: f64,
    /// Test error of that rule among decided records.
    pub error_empirical: f64,
    /// Whether the calibration met the target.
    pub feasible: bool,
    /// Failure message, if any.
    pub failure: Option<String>,
}

fn one(cfg: &SimConfig, i: usize) -> IntroRow {
    let delta = cfg.delta_grid[i];
    let mut row = IntroRow {
        delta,
        mean_distance: 2.0 * delta,
        bayes_error: f64::NAN,
        gamma_star: f64::NAN,
        selective_accuracy: f64::NAN,
        gamma_empirical: f64::NAN,
        error_empirical: f64::NAN,
        feasible: false,
        failure: None,
    };
    let run = |row: &mut IntroRow| -> Result<(), indecide_core::Error> {
        let spec = GmmSpec::new(delta)?;
        row.bayes_error = spec.bayes_risk();
        let point = gamma_for_target_risk(spec, cfg.alpha)?;
        row.gamma_star = point.gamma;
        row.selective_accuracy = 1.0 - point.risk;
        let mut rng = seeded_stream(cfg.seed, stream_id(i, 0));
        let split = draw_split(spec, &mut rng, cfg);
        let fitted = fit_scorer(cfg.scorer, spec, &split.train)?;
        let cal = CalibrationSample::new(fitted.etas(&split.cal.0), split.cal.1.clone())?;
        let report = calibrate_accuracy(&cal, cfg.alpha)?;
        let decisions = split
            .test
            .0
            .iter()
            .map(|&x| report.rule.decide_scalar(fitted.eta(x)).unwrap_or(Decision::Abstain));
        let c = Counts::tally(decisions, &split.test.1);
        row.gamma_empirical = c.gamma();
        row.error_empirical = c.error();
        row.feasible = report.feasible;
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.failure = Some(e.to_string());
    }
    row
}

/// Bayes accuracy and the indecision needed for the target error, in
/// closed form and from a threshold calibrated on an independent sample.
pub fn run_intro_tradeoff(cfg: &SimConfig, workers: Option<usize>) -> Result<Vec<IntroRow>, FormatError> {
    cfg.validate()?;
    Ok(parallel_map(workers, cfg.delta_grid.len(), |i| one(cfg, i)))
}

/// Writes `intro_tradeoff.csv` and two charts; returns the file names.
pub fn write_intro(rows: &[IntroRow], dir: &Path) -> Result<Vec<String>, FormatError> {
    let name = "intro_tradeoff.csv".to_string();
    let mut w = writer(std::fs::File::create(dir.join(&name))?);
    w.write_record([
        "delta",
        "mean_distance",
        "bayes_error",
        "bayes_accuracy",
        "gamma_star",
        "selective_accuracy",
        "gamma_empirical",
        "error_empirical",
        "feasible",
        "failure",
    ])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.delta),
            fmt_f64(r.mean_distance),
            fmt_f64(r.bayes_error),
            fmt_f64(1.0 - r.bayes_error),
            fmt_f64(r.gamma_star),
            fmt_f64(r.selective_accuracy),
            fmt_f64(r.gamma_empirical),
            fmt_f64(r.error_empirical),
            r.feasible.to_string(),
            r.failure.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let pts = |f: &dyn Fn(&IntroRow) -> f64| rows.iter().map(|r| (r.delta, f(r))).collect::<Vec<_>>();
    let acc = line_chart(
        "accuracy without and with indecisions",
        "delta (half distance between means)",
        "accuracy",
        &[
            Series::new("Bayes", pts(&|r| 1.0 - r.bayes_error)),
            Series::new("selective", pts(&|r| r.selective_accuracy)),
        ],
    );
    let mut empirical = Series::new("empirical", pts(&|r| r.gamma_empirical));
    empirical.dashed = true;
    let gam = line_chart(
        "indecision mass needed",
        "delta (half distance between means)",
        "gamma",
        &[Series::new("closed form", pts(&|r| r.gamma_star)), empirical],
    );
    std::fs::write(dir.join("intro_accuracy.svg"), acc)?;
    std::fs::write(dir.join("intro_gamma.svg"), gam)?;
    Ok(vec![name, "intro_accuracy.svg".into(), "intro_gamma.svg".into()])
}
