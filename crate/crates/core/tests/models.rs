use indecide_core::gmm::GmmSpec;
use indecide_core::models::{fit_lda, fit_logistic, logistic, ScoreModel};
use indecide_core::numerics::seeded_stream;

fn mixture(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let (xs, labels) = GmmSpec::new(1.0).unwrap().sample(&mut seeded_stream(seed, 0), n);
    (xs.into_iter().map(|x| vec![x]).collect(), labels)
}

#[test]
fn lda_means_converge() {
    let (xs, ys) = mixture(10_000, 21);
    let m = fit_lda(&xs, &ys).unwrap();
    assert!((m.class_means[0][0] - 1.0).abs() < 0.05);
    assert!((m.class_means[1][0] + 1.0).abs() < 0.05);
    assert!(!m.regularized);
}

#[test]
fn lda_posterior_matches_closed_form() {
    let (xs, ys) = mixture(100_000, 22);
    let m = fit_lda(&xs, &ys).unwrap();
    let spec = GmmSpec::new(1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut prev = 0.0;
    for i in 0..=600 {
        let x = -3.0 + 0.01 * i as f64;
        let p = m.predict_eta(&[x]).unwrap();
        assert!((0.0..=1.0).contains(&p) && p >= prev);
        prev = p;
        worst = worst.max((p - spec.eta(x)).abs());
    }
    assert!(worst < 0.02, "sup-norm gap {worst}");
}

#[test]
fn logistic_recovers_generating_weights() {
    let mut rng = seeded_stream(23, 0);
    let truth = [1.5, -0.5];
    let n = 100_000;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = vec![rng.standard_normal(), rng.standard_normal()];
        let p = logistic(truth[0] * x[0] + truth[1] * x[1]);
        ys.push(if rng.bernoulli(p) { 1 } else { 2 });
        xs.push(x);
    }
    let m = fit_logistic(&xs, &ys, 1e-10, 100).unwrap();
    assert!(m.converged);
    for (w, t) in m.weights.iter().zip(truth) {
        assert!((w - t).abs() < 0.05, "{w} vs {t}");
    }
    assert!(m.bias.abs() < 0.05);
}
