use indecide_core::discrete::{
    brute_force_min, oracle_binary, oracle_multiclass, oracle_np, AtomAction, DiscreteJoint,
};
use indecide_core::numerics::{seeded_stream, RandomStream};
use indecide_core::Error;

fn random_joint(rng: &mut RandomStream, atoms: usize, classes: usize, plateau: bool) -> DiscreteJoint {
    let mut rows: Vec<Vec<f64>> = (0..atoms)
        .map(|_| (0..classes).map(|_| rng.uniform_open()).collect())
        .collect();
    if plateau {
        // copy the class profile of atom 0 onto a few others at new scales
        let copies = 1 + rng.below(atoms as u64 - 1) as usize;
        for j in 1..=copies {
            let scale = 0.25 + rng.uniform_open();
            rows[j] = rows[0].iter().map(|w| w * scale).collect();
        }
    }
    let total: f64 = rows.iter().flatten().sum();
    for row in &mut rows {
        row.iter_mut().for_each(|w| *w /= total);
    }
    DiscreteJoint::new(rows).unwrap()
}

#[test]
fn three_atom_example_agrees_with_search() {
    let j = DiscreteJoint::new(vec![vec![0.4, 0.1], vec![0.1, 0.1], vec![0.05, 0.25]]).unwrap();
    let (_, risk) = oracle_binary(&j, 0.2).unwrap();
    assert!((risk - 0.1875).abs() < 1e-12);
    assert!((brute_force_min(&j, 0.2, None).unwrap() - risk).abs() < 1e-12);
    let (_, bayes) = oracle_binary(&j, 0.0).unwrap();
    assert!((brute_force_min(&j, 0.0, None).unwrap() - bayes).abs() < 1e-12);
}

#[test]
fn uniform_plateau_is_indifferent() {
    let j = DiscreteJoint::new(vec![vec![0.125, 0.125]; 4]).unwrap();
    for g in [0.0, 0.1, 0.37, 0.8] {
        let (_, risk) = oracle_binary(&j, g).unwrap();
        assert!((risk - 0.5).abs() < 1e-12);
        assert!((brute_force_min(&j, g, None).unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn selective_oracles_match_exhaustive_search() {
    let mut rng = seeded_stream(11, 0);
    for case in 0..300 {
        let atoms = 2 + rng.below(9) as usize;
        let classes = 2 + rng.below(2) as usize;
        let j = random_joint(&mut rng, atoms, classes, case % 3 == 0);
        let gamma = 0.9 * rng.uniform_open();
        let (rule, risk) = oracle_multiclass(&j, gamma).unwrap();
        let brute = brute_force_min(&j, gamma, None).unwrap();
        assert!((risk - brute).abs() <= 1e-10, "case {case}: {risk} vs {brute}");
        assert!((rule.abstained_mass(&j) - gamma).abs() <= 1e-12);
        let splits = (0..atoms)
            .filter(|&i| matches!(rule.action(i), AtomAction::Split { .. }))
            .count();
        assert!(splits <= 1);
        if classes == 2 {
            assert_eq!(oracle_binary(&j, gamma).unwrap().1, risk);
        }
    }
}

#[test]
fn np_oracle_matches_exhaustive_search() {
    let mut rng = seeded_stream(12, 0);
    let mut redraws = 0;
    for case in 0..240 {
        let atoms = 2 + rng.below(if case % 4 == 0 { 9 } else { 6 }) as usize;
        let j = random_joint(&mut rng, atoms, 2, case % 3 == 0);
        let gamma = 0.8 * rng.uniform_open();
        // draw alpha1 until the two-threshold rule exists
        let mut alpha1 = rng.uniform_open();
        let (rule, type2) = loop {
            match oracle_np(&j, alpha1, gamma) {
                Ok(found) => break found,
                Err(Error::Infeasible(_)) => {
                    redraws += 1;
                    alpha1 *= rng.uniform_open();
                }
                Err(e) => panic!("case {case}: {e}"),
            }
        };
        let brute = brute_force_min(&j, gamma, Some(alpha1)).unwrap();
        assert!((type2 - brute).abs() <= 1e-10, "case {case}: {type2} vs {brute}");
        let abstained: f64 = (0..atoms).map(|i| rule.abstain[i] * j.atom_mass(i)).sum();
        assert!((abstained - gamma).abs() <= 1e-12);
        let w1 = j.class_mass(0);
        let t1: f64 = (0..atoms).map(|i| rule.to_class2[i] * j.weights(i)[0] / w1).sum();
        assert!((t1 - alpha1 * (1.0 - gamma)).abs() <= 1e-12);
    }
    assert!(redraws < 240);
}

#[test]
fn np_oracle_infeasible_when_type1_budget_eats_the_mass() {
    // class 2 concentrated at low eta: meeting a large type I budget there
    // leaves no room for the requested abstention
    let j = DiscreteJoint::new(vec![vec![0.1, 0.6], vec![0.2, 0.1]]).unwrap();
    assert!(matches!(oracle_np(&j, 0.9, 0.5), Err(Error::Infeasible(_))));
}

#[test]
fn multiclass_worked_instance() {
    let rows = vec![vec![0.2, 0.05, 0.05], vec![0.04, 0.03, 0.03], vec![0.2, 0.2, 0.2]];
    let j = DiscreteJoint::new(rows).unwrap();
    let (rule, risk) = oracle_multiclass(&j, 0.6).unwrap();
    assert_eq!(rule.action(2), AtomAction::Abstain);
    assert_eq!(rule.action(0), AtomAction::Decide(0));
    let expect = (0.1 + 0.06) / 0.4;
    assert!((risk - expect).abs() < 1e-12);
    assert!((brute_force_min(&j, 0.6, None).unwrap() - expect).abs() < 1e-12);
}

#[test]
fn risks_do_not_increase_with_gamma() {
    let mut rng = seeded_stream(13, 0);
    for _ in 0..50 {
        let atoms = 2 + rng.below(9) as usize;
        let j = random_joint(&mut rng, atoms, 2, false);
        let alpha1 = 0.05 + 0.5 * rng.uniform_open();
        let (mut prev_risk, mut prev_t2) = (f64::INFINITY, f64::INFINITY);
        for step in 0..95 {
            let g = step as f64 / 100.0;
            let (_, risk) = oracle_binary(&j, g).unwrap();
            assert!(risk <= prev_risk + 1e-12);
            prev_risk = risk;
            if let Ok((_, t2)) = oracle_np(&j, alpha1, g) {
                assert!(t2 <= prev_t2 + 1e-12);
                prev_t2 = t2;
            }
        }
    }
}

#[test]
fn swapping_abstained_mass_toward_confidence_never_helps() {
    let mut rng = seeded_stream(14, 0);
    for _ in 0..200 {
        let atoms = 3 + rng.below(8) as usize;
        let j = random_joint(&mut rng, atoms, 2, false);
        let gamma = 0.2 + 0.6 * rng.uniform_open();
        let (rule, risk) = oracle_binary(&j, gamma).unwrap();
        let conf = |i: usize| {
            let w = j.weights(i);
            w[0].max(w[1]) / (w[0] + w[1])
        };
        // decided atom d goes into abstention, abstained atom a with larger
        // confidence comes back, keeping the abstained mass fixed
        for d in 0..atoms {
            for a in 0..atoms {
                if rule.abstain[d] >= 1.0 || rule.abstain[a] <= 0.0 || conf(a) <= conf(d) {
                    continue;
                }
                let free_d = (1.0 - rule.abstain[d]) * j.atom_mass(d);
                let held_a = rule.abstain[a] * j.atom_mass(a);
                let moved = free_d.min(held_a);
                let mut abstain = rule.abstain.clone();
                abstain[d] += moved / j.atom_mass(d);
                abstain[a] -= moved / j.atom_mass(a);
                let lost: f64 = (0..atoms)
                    .map(|i| (1.0 - abstain[i]) * j.weights(i)[0].min(j.weights(i)[1]))
                    .sum();
                assert!(lost / (1.0 - gamma) >= risk - 1e-12);
            }
        }
    }
}
