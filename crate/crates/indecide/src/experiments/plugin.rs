use std::path::Path;

use indecide_core::gmm::{threshold_for_gamma, GmmSpec};
use indecide_core::models::fit_lda;
use indecide_core::numerics::{bisect_monotone, normal_tail, seeded_stream, Bracket, RootFindConfig};

use super::{parallel_map, stream_id, Summary};
use crate::data::writer;
use crate::format::fmt_f64;
use crate::FormatError;

/// Settings of the plug-in consistency study.
#[derive(Debug, Clone, PartialEq)]
pub struct PluginConfig {
    /// Separation.
    pub delta: f64,
    /// Indecision mass held fixed.
    pub gamma: f64,
    /// Training sizes.
    pub n_train_grid: Vec<usize>,
    /// Replications per size.
    pub reps: usize,
    /// Master seed.
    pub seed: u64,
}

impl PluginConfig {
    /// `delta = 1`, `gamma = 0.3`, sizes `100, 1000, 10000`, 100 replications.
    pub fn defaults() -> Self {
        Self {
            delta: 1.0,
            gamma: 0.3,
            n_train_grid: vec![100, 1000, 10_000],
            reps: 100,
            seed: 20240101,
        }
    }
}

/// Risk gaps of one training size.
#[derive(Debug, Clone, PartialEq)]
pub struct PluginRow {
    /// Training size.
    pub n_train: usize,
    /// `risk(plug-in) - risk(oracle)` per replication; NaN on failures.
    pub gaps: Vec<f64>,
    /// Median of the gaps.
    pub median_gap: f64,
    /// Mean and percentile band of the gaps.
    pub summary: Summary,
}

/// Exact conditional risk under the mixture of the rule that abstains on
/// the interval `|w x + b| < s`, with `s` chosen so that the abstained mass
/// is `gamma`. Positive `w` sends large `x` to class 1.
pub fn lda_interval_risk(spec: GmmSpec, w: f64, b: f64, gamma: f64) -> Result<f64, indecide_core::Error> {
    if !(w != 0.0 && w.is_finite() && b.is_finite()) {
        return Err(indecide_core::Error::invalid("degenerate discriminant"));
    }
    let d = spec.delta();
    let centre = -b / w;
    // abstained mass of (centre - h, centre + h)
    let mass = |h: f64| {
        let (lo, hi) = (centre - h, centre + h);
        0.5 * (normal_tail(lo - d) - normal_tail(hi - d)) + 0.5 * (normal_tail(lo + d) - normal_tail(hi + d))
    };
    let h = if gamma == 0.0 {
        0.0
    } else {
        let mut hi = 1.0;
        while mass(hi) < gamma {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(indecide_core::Error::infeasible("abstention interval out of range"));
            }
        }
        bisect_monotone(mass, gamma, &RootFindConfig::on(Bracket::new(0.0, hi)?))?
    };
    let (lo, hi) = (centre - h, centre + h);
    let error = if w > 0.0 {
        // class 1 above hi, class 2 below lo
        0.5 * normal_tail(d - lo) + 0.5 * normal_tail(hi + d)
    } else {
        0.5 * normal_tail(hi - d) + 0.5 * normal_tail(-d - lo)
    };
    Ok(error / (1.0 - mass(h)))
}

/// Fits LDA at each training size and compares the exact risk of its
/// fixed-`gamma` interval rule with the oracle's.
pub fn run_plugin_consistency(cfg: &PluginConfig, workers: Option<usize>) -> Result<Vec<PluginRow>, FormatError> {
    if cfg.reps == 0 || cfg.n_train_grid.is_empty() || cfg.n_train_grid.contains(&0) {
        return Err(FormatError::schema(0, "reps and training sizes must be positive"));
    }
    if !(0.0..1.0).contains(&cfg.gamma) {
        return Err(FormatError::schema(0, "gamma must lie in [0, 1)"));
    }
    let spec = GmmSpec::new(cfg.delta)?;
    let oracle = threshold_for_gamma(spec, cfg.gamma)?.risk;
    let mut out = Vec::with_capacity(cfg.n_train_grid.len());
    for (i, &n) in cfg.n_train_grid.iter().enumerate() {
        let gaps = parallel_map(workers, cfg.reps, |rep| {
            let mut rng = seeded_stream(cfg.seed, stream_id(i, rep));
            let (x, y) = spec.sample(&mut rng, n);
            let features: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
            fit_lda(&features, &y)
                .and_then(|m| lda_interval_risk(spec, m.weights()[0], m.bias(), cfg.gamma))
                .map_or(f64::NAN, |r| r - oracle)
        });
        out.push(PluginRow {
            n_train: n,
            median_gap: Summary::median(&gaps),
            summary: Summary::of(&gaps),
            gaps,
        });
    }
    Ok(out)
}

/// Writes `plugin_consistency.csv`; returns the file name.
pub fn write_plugin(rows: &[PluginRow], dir: &Path) -> Result<Vec<String>, FormatError> {
    let name = "plugin_consistency.csv".to_string();
    let mut w = writer(std::fs::File::create(dir.join(&name))?);
    w.write_record(["n_train", "reps", "median_gap", "mean_gap", "p05", "p95"])?;
    for r in rows {
        w.write_record([
            r.n_train.to_string(),
            r.summary.reps.to_string(),
            fmt_f64(r.median_gap),
            fmt_f64(r.summary.mean),
            fmt_f64(r.summary.p05),
            fmt_f64(r.summary.p95),
        ])?;
    }
    w.flush()?;
    Ok(vec![name])
}
