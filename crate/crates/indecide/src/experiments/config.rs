use serde::Deserialize;

use crate::FormatError;

/// Source of the estimated posterior in simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scorer {
    /// The true `eta` of the mixture.
    OracleEta,
    /// Linear discriminant analysis on the training draw.
    #[default]
    Lda,
    /// Logistic regression on the training draw.
    Logistic,
    /// Scores supplied from outside; not usable in simulations.
    External,
}

impl Scorer {
    /// Arm name.
    pub fn name(self) -> &'static str {
        match self {
            Scorer::OracleEta => "oracle-eta",
            Scorer::Lda => "lda",
            Scorer::Logistic => "logistic",
            Scorer::External => "external",
        }
    }
}

/// Simulation settings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig {
    /// Training draws per replication.
    pub n_train: usize,
    /// Calibration draws per replication.
    pub n_cal: usize,
    /// Test draws per replication.
    pub n_test: usize,
    /// Replications per separation.
    pub reps: usize,
    /// Half distances between the class means.
    pub delta_grid: Vec<f64>,
    /// Target conditional error.
    pub alpha: f64,
    /// Type I target.
    pub alpha1: f64,
    /// Type II target.
    pub alpha2: f64,
    /// Posterior estimate.
    pub scorer: Scorer,
    /// Violation probability of the order-statistic type I rule; the
    /// empirical rule is used when absent.
    pub umbrella_delta: Option<f64>,
    /// Master seed.
    pub seed: u64,
}

/// Optional keys of an experiment config file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    /// See [`SimConfig::n_train`].
    pub n_train: Option<usize>,
    /// See [`SimConfig::n_cal`].
    pub n_cal: Option<usize>,
    /// See [`SimConfig::n_test`].
    pub n_test: Option<usize>,
    /// See [`SimConfig::reps`].
    pub reps: Option<usize>,
    /// See [`SimConfig::delta_grid`].
    pub delta_grid: Option<Vec<f64>>,
    /// See [`SimConfig::alpha`].
    pub alpha: Option<f64>,
    /// See [`SimConfig::alpha1`].
    pub alpha1: Option<f64>,
    /// See [`SimConfig::alpha2`].
    pub alpha2: Option<f64>,
    /// See [`SimConfig::scorer`].
    pub scorer: Option<Scorer>,
    /// See [`SimConfig::umbrella_delta`].
    pub umbrella_delta: Option<f64>,
    /// See [`SimConfig::seed`].
    pub seed: Option<u64>,
    /// Phase grid resolution per axis.
    pub resolution: Option<usize>,
    /// Target risk of the `c < 1/2` phase panel.
    pub delta_low: Option<f64>,
    /// Target risk of the `c > 1/2` phase panel.
    pub delta_high: Option<f64>,
    /// Half-width of the skipped band around `c = 1/2`.
    pub dead_band: Option<f64>,
    /// Plug-in consistency: separation.
    pub delta: Option<f64>,
    /// Plug-in consistency: fixed indecision level.
    pub gamma: Option<f64>,
    /// Plug-in consistency: training sizes.
    pub n_train_grid: Option<Vec<usize>>,
}

impl ConfigOverrides {
    /// Names of the keys that were set.
    pub fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! seen {
            ($($f:ident),*) => { $( if self.$f.is_some() { keys.push(stringify!($f)); } )* };
        }
        seen!(
            n_train, n_cal, n_test, reps, delta_grid, alpha, alpha1, alpha2, scorer, umbrella_delta, seed,
            resolution, delta_low, delta_high, dead_band, delta, gamma, n_train_grid
        );
        keys
    }

    /// Rejects keys outside `allowed`.
    pub fn restrict(&self, experiment: &str, allowed: &[&str]) -> Result<(), FormatError> {
        match self.present_keys().into_iter().find(|k| !allowed.contains(k)) {
            Some(k) => Err(FormatError::schema(0, format!("key `{k}` does not apply to `{experiment}`"))),
            None => Ok(()),
        }
    }

    /// Parses TOML; errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            FormatError::schema(line, e.message().to_string())
        })
    }
}

fn steps(lo: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + step * i as f64).collect()
}

impl SimConfig {
    /// Defaults of an experiment; `full` selects the large-scale settings.
    pub fn defaults(experiment: &str, full: bool) -> Self {
        let reps = if full { 1000 } else { 200 };
        let base = SimConfig {
            n_train: 1000,
            n_cal: 1000,
            n_test: 1000,
            reps,
            delta_grid: steps(0.25, 0.25, 12),
            alpha: 0.1,
            alpha1: 0.1,
            alpha2: 0.1,
            scorer: Scorer::Lda,
            umbrella_delta: None,
            seed: 20240101,
        };
        match experiment {
            "intro-tradeoff" => SimConfig {
                n_train: 1,
                n_cal: 1_000_000,
                n_test: 1_000_000,
                reps: 1,
                delta_grid: if full { steps(0.1, 0.1, 30) } else { steps(0.2, 0.2, 15) },
                alpha: 0.01,
                scorer: Scorer::OracleEta,
                ..base
            },
            "plugin-consistency" => SimConfig {
                reps: 100,
                delta_grid: vec![1.0],
                ..base
            },
            _ => base,
        }
    }

    /// Applies the simulation keys of `o`.
    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        take!(n_train, n_cal, n_test, reps, delta_grid, alpha, alpha1, alpha2, scorer, seed);
        if o.umbrella_delta.is_some() {
            self.umbrella_delta = o.umbrella_delta;
        }
    }

    /// Checks counts, grids and probabilities.
    pub fn validate(&self) -> Result<(), FormatError> {
        let bad = |m: String| Err(FormatError::schema(0, m));
        for (name, v) in [
            ("n_train", self.n_train),
            ("n_cal", self.n_cal),
            ("n_test", self.n_test),
            ("reps", self.reps),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.reps > u32::MAX as usize || self.delta_grid.len() > u32::MAX as usize {
            return bad("too many replications or grid points".into());
        }
        if self.delta_grid.is_empty() {
            return bad("delta_grid is empty".into());
        }
        if let Some(d) = self.delta_grid.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return bad(format!("delta_grid entries must be finite and non-negative, found {d}"));
        }
        let probs = [("alpha", Some(self.alpha)), ("alpha1", Some(self.alpha1)), ("alpha2", Some(self.alpha2)), ("umbrella_delta", self.umbrella_delta)];
        for (name, p) in probs {
            if let Some(p) = p {
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("{name} must lie in (0, 1), found {p}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_and_apply() {
        let o = ConfigOverrides::parse("reps = 3\nscorer = \"oracle-eta\"\ndelta_grid = [1.0, 2.0]\n").unwrap();
        let mut cfg = SimConfig::defaults("accuracy-sweep", false);
        cfg.apply(&o);
        assert_eq!((cfg.reps, cfg.scorer), (3, Scorer::OracleEta));
        assert_eq!(cfg.delta_grid, vec![1.0, 2.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let err = ConfigOverrides::parse("reps = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Schema { line: 2, .. }), "{err}");
    }

    #[test]
    fn invalid_probabilities() {
        let mut cfg = SimConfig::defaults("np-sweep", false);
        cfg.alpha1 = 1.0;
        assert!(cfg.validate().is_err());
    }
}
