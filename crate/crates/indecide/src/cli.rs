//! The `indecide` command line.
//!
//! Exit codes: 0 when the run succeeded and its targets were met, 2 when a
//! calibration is valid but infeasible, 1 for usage, schema and other errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use indecide_core::calibration::{
    calibrate_accuracy, calibrate_accuracy_fixed_gamma, calibrate_accuracy_mlr, calibrate_multiclass_fixed_gamma,
    calibrate_np_mlr, calibrate_np_with, CalibrationReport, Decision, NpOptions, Rule, Type1Rule,
};
use indecide_core::gmm::{
    gamma_for_target_risk, m_lower, m_star, operating_point_at_t, optimal_exponent, threshold_for_gamma, GmmSpec,
    OracleOperatingPoint,
};
use indecide_core::models::{fit_lda, fit_logistic};

use crate::data::{self, ScoreTable};
use crate::docs::{self, SavedModel};
use crate::experiments::{self, ConfigOverrides, PhaseExperimentConfig, PluginConfig, SimConfig};
use crate::format::{fmt_f64, KvDoc};
use crate::manifest::RunManifest;
use crate::FormatError;

/// Exit code of a feasible run.
pub const EXIT_OK: i32 = 0;
/// Exit code of usage, schema and runtime errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit code of a valid but infeasible calibration.
pub const EXIT_INFEASIBLE: i32 = 2;

/// Environment variable read when `--workers` is absent.
pub const WORKERS_ENV: &str = "INDECIDE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "indecide", version, about = "Calibrated classification with indecisions")]
struct Cli {
    /// Master seed of random experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment config file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created when missing.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Large-scale experiment defaults.
    #[arg(long, global = true)]
    full: bool,
    /// Worker threads (falls back to INDECIDE_WORKERS, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate a rule from a scores CSV.
    Calibrate(CalibrateArgs),
    /// Apply a saved rule to a scores CSV.
    Apply(ApplyArgs),
    /// Run a simulation experiment.
    Experiment(ExperimentArgs),
    /// Query the Gaussian-mixture oracle.
    Oracle(OracleArgs),
    /// Fit a scorer on a features CSV.
    Fit(FitArgs),
    /// Score a features CSV with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Accuracy,
    Np,
    Multiclass,
    MlrNp,
    MlrAccuracy,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Accuracy => "accuracy",
            Mode::Np => "np",
            Mode::Multiclass => "multiclass",
            Mode::MlrNp => "mlr-np",
            Mode::MlrAccuracy => "mlr-accuracy",
        }
    }
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Calibration target.
    #[arg(long, value_enum)]
    mode: Mode,
    /// Calibration CSV.
    #[arg(long)]
    input: PathBuf,
    /// Target conditional error (accuracy modes).
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed indecision level (accuracy and multiclass modes).
    #[arg(long)]
    gamma: Option<f64>,
    /// Type I target (NP modes).
    #[arg(long)]
    alpha1: Option<f64>,
    /// Type II target (NP modes).
    #[arg(long)]
    alpha2: Option<f64>,
    /// Use the order-statistic type I rule with this violation probability.
    #[arg(long)]
    umbrella_delta: Option<f64>,
    /// Separate `score,label` CSV for the type II estimate.
    #[arg(long)]
    holdout: Option<PathBuf>,
    /// Also write the per-candidate trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct ApplyArgs {
    /// Rule or report document.
    #[arg(long)]
    rule: PathBuf,
    /// Scores CSV (`score`, `x` or `s_1..s_K`).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// phase, accuracy-sweep, np-sweep, intro-tradeoff or plugin-consistency.
    name: String,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Half distance between the class means.
    #[arg(long, conflicts_with_all = ["c", "delta_target"])]
    delta: Option<f64>,
    /// Threshold on the observation axis.
    #[arg(long, conflicts_with_all = ["gamma", "target_risk"])]
    t: Option<f64>,
    /// Indecision mass.
    #[arg(long, conflicts_with = "target_risk")]
    gamma: Option<f64>,
    /// Target conditional risk.
    #[arg(long)]
    target_risk: Option<f64>,
    /// Separation parameter of the phase diagram.
    #[arg(long, requires = "delta_target")]
    c: Option<f64>,
    /// Target risk of the phase diagram.
    #[arg(long, requires = "c")]
    delta_target: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Lda,
    Logistic,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Model family.
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Features CSV with labels.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model document.
    #[arg(long)]
    model: PathBuf,
    /// Features CSV.
    #[arg(long)]
    input: PathBuf,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Calibrate(a) => calibrate(cli, a, out),
        Command::Apply(a) => apply(cli, a, out),
        Command::Experiment(a) => experiment(cli, a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Fit(a) => fit(cli, a, out),
        Command::Predict(a) => predict(cli, a, out),
    }
}

fn workers(cli: &Cli) -> anyhow::Result<Option<usize>> {
    if let Some(w) = cli.workers {
        anyhow::ensure!(w > 0, "--workers must be at least 1");
        return Ok(Some(w));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let w: usize = v
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, found `{v}`"))?;
            anyhow::ensure!(w > 0, "{WORKERS_ENV} must be at least 1");
            Ok(Some(w))
        }
        Err(_) => Ok(None),
    }
}

fn out_dir(cli: &Cli) -> anyhow::Result<Option<PathBuf>> {
    match &cli.out_dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            Ok(Some(d.clone()))
        }
        None => Ok(None),
    }
}

fn open(path: &Path) -> anyhow::Result<fs::File> {
    fs::File::open(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> anyhow::Result<T> {
    r.map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn need(v: Option<f64>, flag: &str, mode: Mode) -> anyhow::Result<f64> {
    v.ok_or_else(|| anyhow::anyhow!("--{flag} is required in {} mode", mode.name()))
}

fn calibrate(cli: &Cli, a: &CalibrateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let mode = a.mode;
    let input = fs::File::open(&a.input).map_err(|e| anyhow::anyhow!("{}: {e}", a.input.display()))?;
    let mut targets: Vec<(&str, f64)> = Vec::new();
    let mut unused: Vec<&str> = Vec::new();
    let report: CalibrationReport = match mode {
        Mode::Accuracy => {
            let cal = with_path(&a.input, data::read_binary(input))?;
            match (a.alpha, a.gamma) {
                (Some(alpha), None) => {
                    targets.push(("alpha", alpha));
                    calibrate_accuracy(&cal, alpha)?
                }
                (None, Some(gamma)) => {
                    targets.push(("gamma", gamma));
                    calibrate_accuracy_fixed_gamma(&cal, gamma)?
                }
                _ => anyhow::bail!("accuracy mode takes exactly one of --alpha and --gamma"),
            }
        }
        Mode::Np => {
            let cal = with_path(&a.input, data::read_binary(input))?;
            let (alpha1, alpha2) = (need(a.alpha1, "alpha1", mode)?, need(a.alpha2, "alpha2", mode)?);
            targets.extend([("alpha1", alpha1), ("alpha2", alpha2)]);
            let holdout = match &a.holdout {
                Some(p) => Some(with_path(p, data::read_binary(open(p)?))?),
                None => None,
            };
            let type1 = match a.umbrella_delta {
                Some(d) => {
                    targets.push(("umbrella_delta", d));
                    Type1Rule::Umbrella { delta: d }
                }
                None => Type1Rule::Empirical,
            };
            calibrate_np_with(&cal, alpha1, alpha2, NpOptions { type1, holdout: holdout.as_ref() })?
        }
        Mode::Multiclass => {
            let cal = with_path(&a.input, data::read_multiclass(input))?;
            let gamma = need(a.gamma, "gamma", mode)?;
            targets.push(("gamma", gamma));
            calibrate_multiclass_fixed_gamma(&cal, gamma)?
        }
        Mode::MlrNp => {
            let cal = with_path(&a.input, data::read_mlr(input))?;
            let (alpha1, alpha2) = (need(a.alpha1, "alpha1", mode)?, need(a.alpha2, "alpha2", mode)?);
            targets.extend([("alpha1", alpha1), ("alpha2", alpha2)]);
            calibrate_np_mlr(&cal, alpha1, alpha2)?
        }
        Mode::MlrAccuracy => {
            let cal = with_path(&a.input, data::read_mlr(input))?;
            let alpha = need(a.alpha, "alpha", mode)?;
            targets.push(("alpha", alpha));
            calibrate_accuracy_mlr(&cal, alpha)?
        }
    };
    for (flag, set) in [
        ("alpha", a.alpha.is_some()),
        ("gamma", a.gamma.is_some()),
        ("alpha1", a.alpha1.is_some()),
        ("alpha2", a.alpha2.is_some()),
        ("umbrella-delta", a.umbrella_delta.is_some()),
        ("holdout", a.holdout.is_some()),
    ] {
        let used = targets.iter().any(|(k, _)| k.replace('_', "-") == flag) || (flag == "holdout" && mode == Mode::Np);
        if set && !used {
            unused.push(flag);
        }
    }
    anyhow::ensure!(unused.is_empty(), "--{} does not apply to {} mode", unused.join(", --"), mode.name());

    let doc = docs::report_doc(mode.name(), &targets, &report);
    match out_dir(cli)? {
        Some(dir) => {
            fs::write(dir.join("report.txt"), doc.render())?;
            fs::write(dir.join("rule.txt"), docs::rule_doc(&report.rule).render())?;
            let mut m = RunManifest::new(&format!("calibrate {}", mode.name()));
            m.add_input(&a.input)?;
            if let Some(h) = &a.holdout {
                m.add_input(h)?;
            }
            for (k, v) in &targets {
                m.setting(k, fmt_f64(*v));
            }
            m.add_output(&dir, "report.txt")?;
            m.add_output(&dir, "rule.txt")?;
            if a.trace {
                data::write_trace(&report.trace, fs::File::create(dir.join("trace.csv"))?)?;
                m.add_output(&dir, "trace.csv")?;
            }
            m.write(&dir)?;
        }
        None => {
            anyhow::ensure!(!a.trace, "--trace needs --out-dir");
            out.write_all(doc.render().as_bytes())?;
        }
    }
    Ok(if report.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn load_rule(path: &Path) -> anyhow::Result<Rule> {
    let text = fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    match docs::parse_rule(&text) {
        Ok(r) => Ok(r),
        Err(first) => docs::rule_from_report(&text).map_err(|_| anyhow::anyhow!("{}: {first}", path.display())),
    }
}

fn apply(cli: &Cli, a: &ApplyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let rule = load_rule(&a.rule)?;
    let table = with_path(&a.input, data::read_scores(open(&a.input)?))?;
    let decisions: Vec<Decision> = match (&rule, &table) {
        (Rule::Selective(_) | Rule::Np(_), ScoreTable::Eta(v)) | (Rule::Mlr(_) | Rule::MlrSymmetric(_), ScoreTable::Raw(v)) => {
            v.iter().map(|&s| rule.decide_scalar(s)).collect::<Result<_, _>>()?
        }
        (Rule::Multiclass(_), ScoreTable::Vector(v)) => v.iter().map(|s| rule.decide_vector(s)).collect::<Result<_, _>>()?,
        (r, _) => {
            let want = match r {
                Rule::Selective(_) | Rule::Np(_) => "`score`",
                Rule::Mlr(_) | Rule::MlrSymmetric(_) => "`x`",
                Rule::Multiclass(_) => "`s_1..s_K`",
            };
            return Err(FormatError::schema(1, format!("{}: this rule needs a {want} column", a.input.display())).into());
        }
    };
    match out_dir(cli)? {
        Some(dir) => {
            data::write_decisions(&decisions, fs::File::create(dir.join("decisions.csv"))?)?;
            let mut m = RunManifest::new("apply");
            m.add_input(&a.rule)?;
            m.add_input(&a.input)?;
            m.add_output(&dir, "decisions.csv")?;
            m.write(&dir)?;
        }
        None => data::write_decisions(&decisions, &mut *out)?,
    }
    Ok(EXIT_OK)
}

const SIM_KEYS: [&str; 11] = [
    "n_train", "n_cal", "n_test", "reps", "delta_grid", "alpha", "alpha1", "alpha2", "scorer", "umbrella_delta", "seed",
];

fn experiment(cli: &Cli, a: &ExperimentArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let name = a.name.as_str();
    anyhow::ensure!(
        experiments::EXPERIMENTS.contains(&name),
        "unknown experiment `{name}` (expected one of {})",
        experiments::EXPERIMENTS.join(", ")
    );
    let overrides = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
            with_path(p, ConfigOverrides::parse(&text))?
        }
        None => ConfigOverrides::default(),
    };
    let workers = workers(cli)?;
    let dir = out_dir(cli)?.unwrap_or_else(|| PathBuf::from(format!("out-{name}")));
    fs::create_dir_all(&dir)?;
    let mut m = RunManifest::new(&format!("experiment {name}"));
    if let Some(p) = &cli.config {
        m.config = Some(p.display().to_string());
        m.add_input(p)?;
    }
    m.setting("full", cli.full);
    let files = match name {
        "phase" => {
            with_path(Path::new("config"), overrides.restrict(name, &["resolution", "delta_low", "delta_high", "dead_band"]))?;
            let mut cfg = PhaseExperimentConfig::defaults(cli.full);
            if let Some(v) = overrides.resolution {
                cfg.resolution = v;
            }
            if let Some(v) = overrides.delta_low {
                cfg.delta_low = v;
            }
            if let Some(v) = overrides.delta_high {
                cfg.delta_high = v;
            }
            if let Some(v) = overrides.dead_band {
                cfg.dead_band = v;
            }
            m.setting("resolved", format!("{cfg:?}"));
            experiments::run_phase_experiment(&cfg, workers)?.write(&dir)?
        }
        "plugin-consistency" => {
            with_path(Path::new("config"), overrides.restrict(name, &["delta", "gamma", "n_train_grid", "reps", "seed"]))?;
            let mut cfg = PluginConfig::defaults();
            if let Some(v) = overrides.delta {
                cfg.delta = v;
            }
            if let Some(v) = overrides.gamma {
                cfg.gamma = v;
            }
            if let Some(v) = overrides.n_train_grid.clone() {
                cfg.n_train_grid = v;
            }
            if let Some(v) = overrides.reps {
                cfg.reps = v;
            }
            cfg.seed = cli.seed.or(overrides.seed).unwrap_or(cfg.seed);
            m.seed = Some(cfg.seed);
            m.setting("resolved", format!("{cfg:?}"));
            let rows = experiments::run_plugin_consistency(&cfg, workers)?;
            experiments::write_plugin(&rows, &dir)?
        }
        _ => {
            with_path(Path::new("config"), overrides.restrict(name, &SIM_KEYS))?;
            let mut cfg = SimConfig::defaults(name, cli.full);
            cfg.apply(&overrides);
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            m.seed = Some(cfg.seed);
            m.setting("resolved", format!("{cfg:?}"));
            run_sim(name, &cfg, workers, &dir)?
        }
    };
    for f in &files {
        m.add_output(&dir, f)?;
    }
    m.write(&dir)?;
    writeln!(out, "wrote {} files to {}", files.len() + 1, dir.display())?;
    Ok(EXIT_OK)
}

fn run_sim(name: &str, cfg: &SimConfig, workers: Option<usize>, dir: &Path) -> anyhow::Result<Vec<String>> {
    use crate::chart::{line_chart, Series};
    let mean_series = |res: &experiments::SimResult, arm: &str, metric: &str| {
        let points = cfg
            .delta_grid
            .iter()
            .map(|&d| (d, res.summary(d, arm, metric).map_or(f64::NAN, |s| s.mean)))
            .collect();
        Series::new(arm, points)
    };
    Ok(match name {
        "accuracy-sweep" => {
            let (res, population) = experiments::run_accuracy_sweep(cfg, workers)?;
            let mut files = res.write_csv(dir, "accuracy")?;
            let pop = "accuracy_population.csv".to_string();
            let mut w = data::writer(fs::File::create(dir.join(&pop))?);
            w.write_record(["delta", "bayes_risk", "gamma_star"])?;
            for r in &population {
                w.write_record([fmt_f64(r.delta), fmt_f64(r.bayes_risk), fmt_f64(r.gamma_star)])?;
            }
            w.flush()?;
            files.push(pop);
            let arms: Vec<&str> = {
                let mut v = vec![cfg.scorer.name()];
                if cfg.scorer != experiments::Scorer::OracleEta {
                    v.push("oracle-eta");
                }
                v
            };
            for (metric, file, label) in [("error", "accuracy_error.svg", "conditional error"), ("gamma_test", "accuracy_gamma.svg", "indecision rate")] {
                let mut series: Vec<Series> = arms.iter().map(|a| mean_series(&res, a, metric)).collect();
                if metric == "gamma_test" {
                    let mut s = Series::new("population", population.iter().map(|r| (r.delta, r.gamma_star)).collect());
                    s.dashed = true;
                    series.push(s);
                }
                fs::write(dir.join(file), line_chart(label, "delta", label, &series))?;
                files.push(file.into());
            }
            files
        }
        "np-sweep" => {
            let (res, bands) = experiments::run_np_sweep(cfg, workers)?;
            let mut files = res.write_csv(dir, "np")?;
            let band = "np_band.csv".to_string();
            let mut w = data::writer(fs::File::create(dir.join(&band))?);
            w.write_record(["delta", "metric", "cells", "p05", "p95"])?;
            for b in &bands {
                w.write_record([fmt_f64(b.delta), b.metric.to_string(), b.cells.to_string(), fmt_f64(b.p05), fmt_f64(b.p95)])?;
            }
            w.flush()?;
            files.push(band);
            for metric in ["error", "type1", "type2", "gamma_hat"] {
                let mut series: Vec<Series> = experiments::NP_ARMS.iter().map(|a| mean_series(&res, a, metric)).collect();
                series[1].band = bands
                    .iter()
                    .filter(|b| b.metric == metric)
                    .map(|b| (b.delta, b.p05, b.p95))
                    .collect();
                let file = format!("np_{metric}.svg");
                fs::write(dir.join(&file), line_chart(metric, "delta", metric, &series))?;
                files.push(file);
            }
            files
        }
        _ => {
            let rows = experiments::run_intro_tradeoff(cfg, workers)?;
            experiments::write_intro(&rows, dir)?
        }
    })
}

fn point_doc(kind: &str, delta: f64, p: &OracleOperatingPoint) -> KvDoc {
    let mut doc = KvDoc::new("oracle");
    doc.set("query", kind)
        .set_f64("delta", delta)
        .set_f64("t", p.t)
        .set_f64("gamma", p.gamma)
        .set_f64("decided", p.decided)
        .set_f64("risk", p.risk);
    doc
}

fn oracle(a: &OracleArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let doc = if let (Some(c), Some(dt)) = (a.c, a.delta_target) {
        let (m_hat, point) = optimal_exponent(c, dt)?;
        let vanishing = if c > 0.5 { point.gamma } else { point.decided };
        let mut doc = point_doc("exponent", indecide_core::gmm::separation_for(c, dt), &point);
        doc.set_f64("c", c).set_f64("delta_target", dt).set_f64("m_hat", m_hat).set_f64("m_star", m_star(c)?);
        match m_lower(c, vanishing) {
            Ok(v) => doc.set_f64("m_lower", v),
            Err(_) => doc.set("m_lower", "undefined"),
        };
        doc
    } else {
        let delta = a.delta.ok_or_else(|| anyhow::anyhow!("oracle needs --delta, or --c with --delta-target"))?;
        let spec = GmmSpec::new(delta)?;
        match (a.t, a.gamma, a.target_risk) {
            (Some(t), _, _) => point_doc("t", delta, &operating_point_at_t(spec, t)?),
            (_, Some(g), _) => point_doc("gamma", delta, &threshold_for_gamma(spec, g)?),
            (_, _, Some(r)) => point_doc("target_risk", delta, &gamma_for_target_risk(spec, r)?),
            _ => point_doc("t", delta, &operating_point_at_t(spec, 0.0)?),
        }
    };
    out.write_all(doc.render().as_bytes())?;
    Ok(EXIT_OK)
}

fn fit(cli: &Cli, a: &FitArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let table = with_path(&a.input, data::read_features(open(&a.input)?))?;
    let labels = table
        .labels
        .ok_or_else(|| FormatError::schema(1, format!("{}: fitting needs a `label` column", a.input.display())))?;
    let model = match a.model {
        ModelKind::Lda => SavedModel::Lda(fit_lda(&table.features, &labels)?),
        ModelKind::Logistic => SavedModel::Logistic(fit_logistic(&table.features, &labels, 1e-10, 100)?),
    };
    let text = docs::model_doc(&model).render();
    match out_dir(cli)? {
        Some(dir) => {
            fs::write(dir.join("model.txt"), text)?;
            let mut m = RunManifest::new("fit");
            m.add_input(&a.input)?;
            m.add_output(&dir, "model.txt")?;
            m.write(&dir)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn predict(cli: &Cli, a: &PredictArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&a.model).map_err(|e| anyhow::anyhow!("{}: {e}", a.model.display()))?;
    let model = with_path(&a.model, docs::parse_model(&text))?;
    let table = with_path(&a.input, data::read_features(open(&a.input)?))?;
    let mut buf = Vec::new();
    {
        let mut w = data::writer(&mut buf);
        let with_labels = table.labels.is_some();
        if with_labels {
            w.write_record(["score", "label"])?;
        } else {
            w.write_record(["score"])?;
        }
        for (i, x) in table.features.iter().enumerate() {
            let eta = fmt_f64(model.scorer().predict_eta(x)?);
            match &table.labels {
                Some(l) => w.write_record([eta, l[i].to_string()])?,
                None => w.write_record([eta])?,
            }
        }
        w.flush()?;
    }
    match out_dir(cli)? {
        Some(dir) => {
            fs::write(dir.join("scores.csv"), &buf)?;
            let mut m = RunManifest::new("predict");
            m.add_input(&a.model)?;
            m.add_input(&a.input)?;
            m.add_output(&dir, "scores.csv")?;
            m.write(&dir)?;
        }
        None => out.write_all(&buf)?,
    }
    Ok(EXIT_OK)
}
