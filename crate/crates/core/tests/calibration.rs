use indecide_core::calibration::{
    calibrate_accuracy, calibrate_accuracy_fixed_gamma, calibrate_multiclass_fixed_gamma,
    calibrate_np, calibrate_np_mlr, CalibrationSample, Decision, MlrSample, MulticlassSample, Rule,
    Trace,
};
use indecide_core::discrete::{oracle_multiclass, oracle_np, DiscreteJoint};
use indecide_core::gmm::{gamma_for_target_risk, threshold_for_gamma, GmmSpec};
use indecide_core::numerics::{normal_quantile, normal_tail, seeded_stream};
use proptest::prelude::*;

fn oracle_sample(delta: f64, n: usize, seed: u64, stream: u64) -> CalibrationSample {
    let spec = GmmSpec::new(delta).unwrap();
    let (xs, labels) = spec.sample(&mut seeded_stream(seed, stream), n);
    CalibrationSample::new(xs.iter().map(|&x| spec.eta(x)).collect(), labels).unwrap()
}

/// 1000-bin quantization of the symmetric mixture; tails fold into the end bins.
fn quantized_mixture(delta: f64, bins: usize) -> DiscreteJoint {
    let (lo, hi) = (-delta - 8.0, delta + 8.0);
    let edge = |i: usize| {
        if i == 0 {
            f64::NEG_INFINITY
        } else if i == bins {
            f64::INFINITY
        } else {
            lo + (hi - lo) * i as f64 / bins as f64
        }
    };
    let mass = |center: f64, a: f64, b: f64| normal_tail(a - center) - normal_tail(b - center);
    let mut rows: Vec<Vec<f64>> = (0..bins)
        .map(|i| {
            let (a, b) = (edge(i), edge(i + 1));
            vec![0.5 * mass(delta, a, b), 0.5 * mass(-delta, a, b)]
        })
        .collect();
    let total: f64 = rows.iter().flatten().sum();
    rows.iter_mut().for_each(|r| r.iter_mut().for_each(|w| *w /= total));
    DiscreteJoint::new(rows).unwrap()
}

#[test]
fn accuracy_path_tracks_the_mixture_oracle() {
    let target = gamma_for_target_risk(GmmSpec::new(1.0).unwrap(), 0.10).unwrap();
    let rep = calibrate_accuracy(&oracle_sample(1.0, 100_000, 5, 0), 0.10).unwrap();
    assert!(rep.feasible);
    assert!((rep.gamma_hat - target.gamma).abs() <= 0.02, "{} vs {}", rep.gamma_hat, target.gamma);
}

#[test]
fn fixed_gamma_error_tracks_the_mixture_oracle() {
    let spec = GmmSpec::new(1.0).unwrap();
    let oracle = threshold_for_gamma(spec, 0.3).unwrap();
    let rep = calibrate_accuracy_fixed_gamma(&oracle_sample(1.0, 100_000, 6, 0), 0.3).unwrap();
    let err = rep.achieved.conditional_error.unwrap();
    assert!((err - oracle.risk).abs() <= 0.01, "{err} vs {}", oracle.risk);
    assert!(rep.gamma_hat >= 0.3);
}

#[test]
fn np_path_tracks_the_quantized_oracle() {
    let joint = quantized_mixture(1.0, 1000);
    // oracle type II is non-increasing in gamma: bisect for the smallest level meeting 0.1
    let meets = |g: f64| oracle_np(&joint, 0.1, g).map(|(_, t2)| t2 <= 0.1).unwrap_or(false);
    let (mut lo, mut hi) = (0.0, 0.6);
    assert!(!meets(lo) && meets(hi));
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rep = calibrate_np(&oracle_sample(1.0, 100_000, 7, 0), 0.1, 0.1).unwrap();
    assert!(rep.feasible);
    let chosen = rep.gamma_grid.unwrap();
    assert!((chosen - hi).abs() <= 0.03, "calibrated {chosen} vs oracle {hi}");
}

#[test]
fn np_cells_respect_the_type1_budget_and_indecision_helps() {
    for seed in 0..20 {
        let cal = oracle_sample(1.0, 500, 8, seed);
        let n1 = cal.count(1) as f64;
        let rep = calibrate_np(&cal, 0.1, 0.1).unwrap();
        let Trace::Np(rows) = &rep.trace else { panic!() };
        for row in rows {
            assert!(row.type1 <= (1.0 - row.gamma) * 0.1 + 1.0 / n1 + 1e-12);
        }
        assert!(rep.achieved.type2.unwrap() <= rows[0].type2.unwrap());
    }
}

#[test]
fn multiclass_rule_matches_the_discrete_oracle() {
    let rows = vec![vec![0.2, 0.05, 0.05], vec![0.04, 0.03, 0.03], vec![0.2, 0.2, 0.2]];
    let joint = DiscreteJoint::new(rows.clone()).unwrap();
    let n = 20_000;
    let mut rng = seeded_stream(9, 0);
    let mut scores = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u = rng.uniform_open();
        let mut atom = 0;
        while atom + 1 < rows.len() && u >= joint.atom_mass(atom) {
            u -= joint.atom_mass(atom);
            atom += 1;
        }
        let post: Vec<f64> = rows[atom].iter().map(|w| w / joint.atom_mass(atom)).collect();
        let mut v = rng.uniform_open();
        let mut label = 0;
        while label + 1 < post.len() && v >= post[label] {
            v -= post[label];
            label += 1;
        }
        scores.push(post);
        labels.push(label + 1);
    }
    // a level just under the least confident atom's mass abstains on that
    // whole atom; compare against the oracle at the realized level
    let cal = MulticlassSample::new(scores, Some(labels)).unwrap();
    let rep = calibrate_multiclass_fixed_gamma(&cal, 0.55).unwrap();
    let (_, risk) = oracle_multiclass(&joint, rep.gamma_hat).unwrap();
    let err = rep.achieved.conditional_error.unwrap();
    assert!((err - risk).abs() <= 3.0 / (n as f64).sqrt(), "{err} vs {risk}");
}

#[test]
fn mlr_threshold_sits_at_the_class1_quantile() {
    let n = 100_000;
    let mut rng = seeded_stream(10, 0);
    let mut xs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = if rng.bernoulli_half() { 1 } else { 2 };
        let shift = if label == 1 { 0.0 } else { 2.0 };
        xs.push(shift + rng.standard_normal());
        labels.push(label);
    }
    let rep = calibrate_np_mlr(&MlrSample::new(xs, labels).unwrap(), 0.05, 0.05).unwrap();
    let power = rep.power.unwrap();
    assert!(power.needs_indecision);
    assert!((power.power_at_alpha1 - normal_tail(normal_quantile(0.05).unwrap() - 2.0)).abs() < 0.02);
    let Rule::Mlr(rule) = rep.rule else { panic!() };
    assert!(rule.tau2 < rule.tau1, "interval must be nonempty");
    let gamma = rep.gamma_grid.unwrap();
    let expected = normal_quantile(0.05 * (1.0 - gamma)).unwrap();
    assert!((rule.tau1 - expected).abs() < 0.05, "{} vs {expected}", rule.tau1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn more_tolerance_never_needs_more_abstention(seed in 0u64..1000, a in 0.02f64..0.3, b in 0.0f64..0.2) {
        let cal = oracle_sample(0.8, 300, seed, 0);
        let tight = calibrate_accuracy(&cal, a).unwrap();
        let loose = calibrate_accuracy(&cal, (a + b).min(0.99)).unwrap();
        prop_assert!(loose.gamma_hat <= tight.gamma_hat);
    }

    #[test]
    fn running_minimum_never_increases(seed in 0u64..1000) {
        let rep = calibrate_accuracy(&oracle_sample(0.7, 200, seed, 1), 0.05).unwrap();
        let Trace::Accuracy(rows) = rep.trace else { panic!() };
        for w in rows.windows(2) {
            prop_assert!(w[1].running_min <= w[0].running_min);
        }
    }

    #[test]
    fn mlr_abstention_is_an_interval(seed in 0u64..1000, a1 in 0.02f64..0.3, a2 in 0.02f64..0.3) {
        let spec = GmmSpec::new(0.6).unwrap();
        let (xs, labels) = spec.sample(&mut seeded_stream(seed, 2), 300);
        // class 2 sits at -delta here, flip so large x favours class 2
        let xs: Vec<f64> = xs.iter().map(|x| -x).collect();
        let rep = calibrate_np_mlr(&MlrSample::new(xs.clone(), labels).unwrap(), a1, a2).unwrap();
        let mut sorted = xs;
        sorted.sort_by(f64::total_cmp);
        let flags: Vec<bool> = sorted
            .iter()
            .map(|&x| rep.rule.decide_scalar(x).unwrap() == Decision::Abstain)
            .collect();
        let runs = flags.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert!(runs <= 2 && !(runs == 2 && !flags[flags.iter().position(|&f| f).unwrap()]));
    }
}
