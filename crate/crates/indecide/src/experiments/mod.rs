//! Seeded Monte Carlo experiments on the symmetric Gaussian mixture.
//!
//! Replication `r` at grid index `i` draws everything from
//! `seeded_stream(seed, (i << 32) | r)`, so results do not depend on which
//! worker ran it. Parallel maps collect in input order and all reductions
//! run sequentially afterwards, which makes outputs byte-identical at any
//! worker count.

mod accuracy;
mod config;
mod intro;
mod np;
mod phase;
mod plugin;
mod stats;

pub use accuracy::{run_accuracy_sweep, AccuracyPopulationRow};
pub use config::{ConfigOverrides, Scorer, SimConfig};
pub use intro::{run_intro_tradeoff, write_intro, IntroRow};
pub use np::{run_np_sweep, BandRow, NP_ARMS};
pub use phase::{envelope, run_phase_experiment, EnvelopeRow, EnvelopeStatus, PhaseExperimentConfig, PhaseOutput, PhasePanel};
pub use plugin::{lda_interval_risk, run_plugin_consistency, write_plugin, PluginConfig, PluginRow};
pub use stats::{percentile, Summary};

use std::path::Path;

use indecide_core::calibration::Decision;
use indecide_core::gmm::GmmSpec;
use indecide_core::models::{fit_lda, fit_logistic, ScoreModel};
use indecide_core::numerics::RandomStream;
use rayon::prelude::*;

use crate::data::writer;
use crate::format::fmt_f64;
use crate::FormatError;

/// Names accepted by `indecide experiment`.
pub const EXPERIMENTS: [&str; 5] = ["phase", "accuracy-sweep", "np-sweep", "intro-tradeoff", "plugin-consistency"];

/// Stream id of replication `rep` at grid index `cell`.
pub fn stream_id(cell: usize, rep: usize) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

/// Runs `f(i)` for `i in 0..n` on `workers` threads (all cores when
/// `None`), returning results in index order.
pub fn parallel_map<T, F>(workers: Option<usize>, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    match workers {
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => (0..n).map(&f).collect(),
        },
        None => run(),
    }
}

/// Train, calibration and test draws of one replication.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub train: (Vec<f64>, Vec<u8>),
    pub cal: (Vec<f64>, Vec<u8>),
    pub test: (Vec<f64>, Vec<u8>),
}

pub(crate) fn draw_split(spec: GmmSpec, rng: &mut RandomStream, cfg: &SimConfig) -> Split {
    let train = spec.sample(rng, cfg.n_train);
    let cal = spec.sample(rng, cfg.n_cal);
    let test = spec.sample(rng, cfg.n_test);
    Split { train, cal, test }
}

/// A fitted one-dimensional scorer.
pub(crate) enum Fitted {
    Oracle(GmmSpec),
    Model(Box<dyn ScoreModel + Send + Sync>),
}

impl Fitted {
    pub fn eta(&self, x: f64) -> f64 {
        match self {
            Fitted::Oracle(spec) => spec.eta(x),
            // dimension is fixed at one by construction
            Fitted::Model(m) => m.predict_eta(&[x]).unwrap_or(f64::NAN),
        }
    }

    pub fn etas(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eta(x)).collect()
    }
}

pub(crate) fn fit_scorer(
    scorer: Scorer,
    spec: GmmSpec,
    train: &(Vec<f64>, Vec<u8>),
) -> Result<Fitted, indecide_core::Error> {
    let features: Vec<Vec<f64>> = train.0.iter().map(|&x| vec![x]).collect();
    Ok(match scorer {
        Scorer::OracleEta => Fitted::Oracle(spec),
        Scorer::Lda => Fitted::Model(Box::new(fit_lda(&features, &train.1)?)),
        Scorer::Logistic => Fitted::Model(Box::new(fit_logistic(&features, &train.1, 1e-10, 100)?)),
        Scorer::External => {
            return Err(indecide_core::Error::invalid(
                "the external scorer needs a scores CSV; use `indecide calibrate`",
            ))
        }
    })
}

/// Confusion counts of decisions on labelled test data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Counts {
    pub n: [usize; 2],
    pub decided: [usize; 2],
    pub wrong: [usize; 2],
}

impl Counts {
    pub fn tally(decisions: impl Iterator<Item = Decision>, labels: &[u8]) -> Self {
        let mut c = Counts::default();
        for (d, &y) in decisions.zip(labels) {
            let k = usize::from(y - 1);
            c.n[k] += 1;
            if let Decision::Class(p) = d {
                c.decided[k] += 1;
                if p != usize::from(y) {
                    c.wrong[k] += 1;
                }
            }
        }
        c
    }

    fn ratio(a: usize, b: usize) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    /// Misclassification rate among decided records.
    pub fn error(&self) -> f64 {
        Self::ratio(self.wrong[0] + self.wrong[1], self.decided[0] + self.decided[1])
    }

    /// Class-1 records sent to class 2, among decided class-1 records.
    pub fn type1(&self) -> f64 {
        Self::ratio(self.wrong[0], self.decided[0])
    }

    /// Class-2 records sent to class 1, among decided class-2 records.
    pub fn type2(&self) -> f64 {
        Self::ratio(self.wrong[1], self.decided[1])
    }

    /// Abstained fraction.
    pub fn gamma(&self) -> f64 {
        let n = self.n[0] + self.n[1];
        Self::ratio(n - self.decided[0] - self.decided[1], n)
    }
}

/// One replication of one arm at one separation.
#[derive(Debug, Clone, PartialEq)]
pub struct RepRow {
    /// Separation.
    pub delta: f64,
    /// Replication index.
    pub rep: usize,
    /// Arm name.
    pub arm: String,
    /// Indecision level selected on the calibration sample.
    pub gamma_hat: f64,
    /// Abstained fraction of the test sample.
    pub gamma_test: f64,
    /// Test misclassification rate among decided records.
    pub error: f64,
    /// Test type I error among decided class-1 records.
    pub type1: f64,
    /// Test type II error among decided class-2 records.
    pub type2: f64,
    /// Whether calibration met its targets.
    pub feasible: bool,
    /// Failure message when the cell could not be computed.
    pub failure: Option<String>,
}

impl RepRow {
    pub(crate) fn failed(delta: f64, rep: usize, arm: &str, err: impl ToString) -> Self {
        Self {
            delta,
            rep,
            arm: arm.into(),
            gamma_hat: f64::NAN,
            gamma_test: f64::NAN,
            error: f64::NAN,
            type1: f64::NAN,
            type2: f64::NAN,
            feasible: false,
            failure: Some(err.to_string()),
        }
    }

    pub(crate) fn from_counts(delta: f64, rep: usize, arm: &str, gamma_hat: f64, feasible: bool, c: &Counts) -> Self {
        Self {
            delta,
            rep,
            arm: arm.into(),
            gamma_hat,
            gamma_test: c.gamma(),
            error: c.error(),
            type1: c.type1(),
            type2: c.type2(),
            feasible,
            failure: None,
        }
    }
}

/// Aggregate of one metric of one arm at one separation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    /// Separation.
    pub delta: f64,
    /// Arm name.
    pub arm: String,
    /// Metric name.
    pub metric: &'static str,
    /// Summary over the successful replications.
    pub summary: Summary,
}

/// Replication rows and their per-separation aggregates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimResult {
    /// Config the result was produced from.
    pub config: SimConfig,
    /// One row per separation, replication and arm.
    pub rows: Vec<RepRow>,
    /// Per separation, arm and metric.
    pub aggregate: Vec<AggregateRow>,
}

/// Metrics summarized for every arm.
pub const METRICS: [&str; 5] = ["error", "type1", "type2", "gamma_hat", "gamma_test"];

fn metric(row: &RepRow, name: &str) -> f64 {
    match name {
        "error" => row.error,
        "type1" => row.type1,
        "type2" => row.type2,
        "gamma_hat" => row.gamma_hat,
        _ => row.gamma_test,
    }
}

impl SimResult {
    /// Builds aggregates from rows ordered by separation, replication, arm.
    pub(crate) fn from_rows(config: SimConfig, rows: Vec<RepRow>, arms: &[String]) -> Self {
        let mut aggregate = Vec::new();
        for &delta in &config.delta_grid {
            for arm in arms {
                let cell: Vec<&RepRow> = rows
                    .iter()
                    .filter(|r| r.delta == delta && &r.arm == arm && r.failure.is_none())
                    .collect();
                for name in METRICS {
                    let values: Vec<f64> = cell.iter().map(|r| metric(r, name)).collect();
                    aggregate.push(AggregateRow {
                        delta,
                        arm: arm.clone(),
                        metric: name,
                        summary: Summary::of(&values),
                    });
                }
            }
        }
        Self { config, rows, aggregate }
    }

    /// Replication rows of one arm at one separation.
    pub fn arm_rows<'a>(&'a self, delta: f64, arm: &'a str) -> impl Iterator<Item = &'a RepRow> + 'a {
        self.rows.iter().filter(move |r| r.delta == delta && r.arm == arm)
    }

    /// Aggregate of one metric.
    pub fn summary(&self, delta: f64, arm: &str, metric: &str) -> Option<Summary> {
        self.aggregate
            .iter()
            .find(|a| a.delta == delta && a.arm == arm && a.metric == metric)
            .map(|a| a.summary)
    }

    /// Writes `<prefix>_reps.csv` and `<prefix>_aggregate.csv` into `dir`;
    /// returns the file names.
    pub fn write_csv(&self, dir: &Path, prefix: &str) -> Result<Vec<String>, FormatError> {
        let reps = format!("{prefix}_reps.csv");
        let mut w = writer(std::fs::File::create(dir.join(&reps))?);
        w.write_record([
            "delta", "rep", "arm", "gamma_hat", "gamma_test", "error", "type1", "type2", "feasible", "failure",
        ])?;
        for r in &self.rows {
            w.write_record([
                fmt_f64(r.delta),
                r.rep.to_string(),
                r.arm.clone(),
                fmt_f64(r.gamma_hat),
                fmt_f64(r.gamma_test),
                fmt_f64(r.error),
                fmt_f64(r.type1),
                fmt_f64(r.type2),
                r.feasible.to_string(),
                r.failure.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        let agg = format!("{prefix}_aggregate.csv");
        let mut w = writer(std::fs::File::create(dir.join(&agg))?);
        w.write_record(["delta", "arm", "metric", "reps", "mean", "p05", "p95"])?;
        for a in &self.aggregate {
            w.write_record([
                fmt_f64(a.delta),
                a.arm.clone(),
                a.metric.to_string(),
                a.summary.reps.to_string(),
                fmt_f64(a.summary.mean),
                fmt_f64(a.summary.p05),
                fmt_f64(a.summary.p95),
            ])?;
        }
        w.flush()?;
        Ok(vec![reps, agg])
    }
}
