use indecide::experiments::{
    envelope, lda_interval_risk, run_accuracy_sweep, run_intro_tradeoff, run_np_sweep, run_plugin_consistency,
    EnvelopeStatus, PluginConfig, Scorer, SimConfig,
};
use indecide_core::gmm::{gamma_for_target_risk, threshold_for_gamma, GmmSpec};
use indecide_core::numerics::normal_tail;

fn small(experiment: &str) -> SimConfig {
    let mut cfg = SimConfig::defaults(experiment, false);
    cfg.reps = 40;
    cfg
}

#[test]
fn oracle_accuracy_sweep_tracks_the_target() {
    let mut cfg = small("accuracy-sweep");
    cfg.scorer = Scorer::OracleEta;
    cfg.n_cal = 5000;
    cfg.n_test = 5000;
    cfg.delta_grid = vec![0.5, 1.0, 1.25, 2.0, 3.0];
    let (res, pop) = run_accuracy_sweep(&cfg, None).unwrap();
    for delta in [0.5, 1.0, 1.25] {
        let err = res.summary(delta, "oracle-eta", "error").unwrap().mean;
        assert!((err - 0.1).abs() <= 0.01, "delta={delta}: {err}");
    }
    for delta in [2.0, 3.0] {
        let s = res.summary(delta, "oracle-eta", "error").unwrap();
        assert!(s.mean <= 0.11, "delta={delta}: {}", s.mean);
        // Bayes error is below alpha, so nothing needs to be abstained
        assert!(res.summary(delta, "oracle-eta", "gamma_hat").unwrap().mean <= 0.01);
    }
    let at_one = pop.iter().find(|p| p.delta == 1.0).unwrap();
    assert!((at_one.bayes_risk - normal_tail(1.0)).abs() < 1e-15);
    let want = gamma_for_target_risk(GmmSpec::new(1.0).unwrap(), 0.1).unwrap().gamma;
    assert_eq!(at_one.gamma_star, want);
}

#[test]
fn lda_arm_comes_with_an_oracle_arm() {
    let mut cfg = small("accuracy-sweep");
    cfg.reps = 5;
    cfg.delta_grid = vec![1.0];
    let (res, _) = run_accuracy_sweep(&cfg, Some(2)).unwrap();
    assert_eq!(res.arm_rows(1.0, "lda").count(), 5);
    assert_eq!(res.arm_rows(1.0, "oracle-eta").count(), 5);
}

#[test]
fn loose_np_targets_need_no_indecision() {
    let mut cfg = small("np-sweep");
    cfg.alpha1 = 0.5;
    cfg.alpha2 = 0.5;
    cfg.delta_grid = vec![1.5, 2.0, 3.0];
    let (res, band) = run_np_sweep(&cfg, None).unwrap();
    for &delta in &cfg.delta_grid {
        assert!(res.arm_rows(delta, "indecision").all(|r| r.gamma_hat == 0.0), "delta={delta}");
    }
    assert!(band.iter().all(|b| b.p05 <= b.p95));
}

#[test]
fn sweeps_are_reproducible() {
    let mut cfg = small("np-sweep");
    cfg.reps = 1;
    cfg.delta_grid = vec![0.75];
    let a = run_np_sweep(&cfg, Some(1)).unwrap();
    let b = run_np_sweep(&cfg, Some(3)).unwrap();
    assert_eq!(a, b);
    cfg.seed += 1;
    assert_ne!(run_np_sweep(&cfg, Some(1)).unwrap().0.rows, a.0.rows);
}

#[test]
fn oracle_dominates_the_plugin_rule() {
    let cfg = PluginConfig { reps: 30, ..PluginConfig::defaults() };
    for row in run_plugin_consistency(&cfg, None).unwrap() {
        assert!(row.gaps.iter().all(|&g| g >= -1e-12), "n={}", row.n_train);
    }
}

#[test]
fn interval_risk_matches_the_oracle_curve() {
    // the LDA rule with the true discriminant w = 2 delta, b = 0
    let spec = GmmSpec::new(0.8).unwrap();
    for gamma in [0.0, 0.2, 0.5] {
        let r = lda_interval_risk(spec, 1.6, 0.0, gamma).unwrap();
        let oracle = threshold_for_gamma(spec, gamma).unwrap().risk;
        assert!((r - oracle).abs() < 1e-9, "gamma={gamma}: {r} vs {oracle}");
    }
}

#[test]
fn intro_tradeoff_closed_form_columns() {
    let mut cfg = SimConfig::defaults("intro-tradeoff", false);
    cfg.n_cal = 20_000;
    cfg.n_test = 20_000;
    cfg.delta_grid = vec![0.5, 1.0, 1.5];
    let rows = run_intro_tradeoff(&cfg, None).unwrap();
    for r in &rows {
        assert_eq!(r.mean_distance, 2.0 * r.delta);
        assert!((r.bayes_error - normal_tail(r.delta)).abs() < 1e-15);
        assert!((r.selective_accuracy - 0.99).abs() < 1e-9);
        assert!(r.failure.is_none());
    }
    assert!(rows.windows(2).all(|w| w[1].gamma_star < w[0].gamma_star));
}

/// Deviation of the calibrated indecision from the closed form at one
/// million calibration and test records, against `3 / sqrt(n)`.
#[test]
fn intro_empirical_indecision_within_three_over_root_n() {
    let cfg = SimConfig::defaults("intro-tradeoff", false);
    let tol = 3.0 / (cfg.n_test as f64).sqrt();
    let rows = run_intro_tradeoff(&cfg, None).unwrap();
    let off: Vec<_> = rows.iter().filter(|r| (r.gamma_empirical - r.gamma_star).abs() > tol).map(|r| r.delta).collect();
    assert!(off.is_empty(), "outside tolerance at {off:?}");
}

#[test]
fn envelope_on_the_high_panel() {
    let rows = envelope(&[0.6, 0.75, 0.9], 1e-15);
    assert!(rows.iter().all(|r| r.status == EnvelopeStatus::Contained), "{rows:?}");
    // the finite-delta correction puts m_lower above m_star here
    assert!(rows.iter().all(|r| r.m_star <= r.m_hat && r.m_hat <= r.m_lower));
}
