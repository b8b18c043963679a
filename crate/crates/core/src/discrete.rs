//! Exact abstention oracles on finite-support joint measures.
//!
//! A [`DiscreteJoint`] stores, for every atom `x`, the per-class weights
//! `p_k f_k(x)`. The oracles compute the minimax rules for a fixed
//! indecision mass (binary, Neyman-Pearson and multi-class), splitting a
//! single boundary atom fractionally so the abstained mass is hit exactly.
//! [`brute_force_min`] searches every vertex of the underlying linear
//! program and serves as an independent check.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Tolerance on the total mass and on equality constraints.
pub const MASS_TOL: f64 = 1e-12;
/// Largest instance accepted by [`brute_force_min`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Finite-support joint measure, one row of `K` class weights per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    ids: Vec<u64>,
    weights: Vec<f64>,
    classes: usize,
}

impl DiscreteJoint {
    /// Builds a joint with ids `0..n` from per-atom weight rows.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        Self::with_ids(ids, rows)
    }

    /// Builds a joint with explicit atom ids (used for tie-breaking).
    pub fn with_ids(ids: Vec<u64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("a joint needs at least two atoms"));
        }
        if ids.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: ids.len(),
            });
        }
        let classes = rows[0].len();
        if classes < 2 {
            return Err(Error::invalid("a joint needs at least two classes"));
        }
        let mut weights = Vec::with_capacity(rows.len() * classes);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != classes {
                return Err(Error::DimensionMismatch {
                    expected: classes,
                    got: row.len(),
                });
            }
            if row.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                return Err(Error::invalid(alloc::format!(
                    "atom {i} has a negative or non-finite weight"
                )));
            }
            if row.iter().all(|&w| w == 0.0) {
                return Err(Error::DegenerateAtom { index: i });
            }
            weights.extend_from_slice(row);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(alloc::format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            ids,
            weights,
            classes,
        })
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Always false; a joint holds at least two atoms.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of classes `K`.
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Atom id.
    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    /// Class weights of atom `i`.
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i * self.classes..(i + 1) * self.classes]
    }

    /// Total mass of atom `i`.
    pub fn atom_mass(&self, i: usize) -> f64 {
        self.weights(i).iter().sum()
    }

    /// Total weight of class `k` (0-based).
    pub fn class_mass(&self, k: usize) -> f64 {
        (0..self.len()).map(|i| self.weights(i)[k]).sum()
    }

    /// Bayes risk without abstention, `sum_i (sum_k w - max_k w)`.
    pub fn bayes_risk(&self) -> f64 {
        (0..self.len()).map(|i| atom_loss(self.weights(i))).sum()
    }
}

/// Posterior vector `w_k / sum w` of one atom.
pub fn eta_of(weights: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateAtom { index: 0 });
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

fn atom_loss(w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    total - max_weight(w)
}

fn max_weight(w: &[f64]) -> f64 {
    w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn argmax(w: &[f64]) -> usize {
    // first maximal class wins
    let mut best = 0;
    for (k, &v) in w.iter().enumerate() {
        if v > w[best] {
            best = k;
        }
    }
    best
}

/// Per-atom action of a fixed-indecision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct IndecisionRule {
    /// Fraction of each atom's mass sent to abstention.
    pub abstain: Vec<f64>,
    /// Predicted class (0-based) on the decided part of each atom.
    pub predict: Vec<usize>,
    /// Confidence statistic at the boundary; atoms strictly below abstain.
    pub threshold: f64,
}

/// Coarse view of an atom's action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomAction {
    /// Whole atom decided.
    Decide(usize),
    /// Whole atom abstained.
    Abstain,
    /// Plateau atom: fraction abstained, rest decided.
    Split {
        /// Abstained fraction in `(0, 1)`.
        fraction: f64,
        /// Class predicted on the decided part.
        class: usize,
    },
}

impl IndecisionRule {
    /// Action on atom `i`.
    pub fn action(&self, i: usize) -> AtomAction {
        match self.abstain[i] {
            f if f <= 0.0 => AtomAction::Decide(self.predict[i]),
            f if f >= 1.0 => AtomAction::Abstain,
            fraction => AtomAction::Split {
                fraction,
                class: self.predict[i],
            },
        }
    }

    /// Abstained mass of the rule under `joint`.
    pub fn abstained_mass(&self, joint: &DiscreteJoint) -> f64 {
        (0..joint.len())
            .map(|i| self.abstain[i] * joint.atom_mass(i))
            .sum()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain {
            what: "gamma must lie in [0, 1)",
            value: gamma,
        });
    }
    Ok(())
}

/// Order of `keys` ascending, ties broken by atom id.
fn sorted_order(joint: &DiscreteJoint, keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..joint.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .unwrap_or(Ordering::Equal)
            .then(joint.id(a).cmp(&joint.id(b)))
    });
    order
}

/// Walks `order`, consuming `budget` of `mass`; returns per-atom fractions.
///
/// Atoms are taken whole while they fit and the first atom that does not
/// fit is split, so at most one atom is fractional. `start` holds the
/// fraction of each atom already assigned elsewhere. The second value is
/// the last atom touched.
fn fill(order: &[usize], mass: &[f64], start: &[f64], budget: f64) -> (Vec<f64>, Option<usize>) {
    let mut taken = alloc::vec![0.0; mass.len()];
    let mut remaining = budget;
    let mut last = None;
    for &i in order {
        let free = 1.0 - start[i];
        if free <= 0.0 {
            continue;
        }
        let avail = free * mass[i];
        if avail <= remaining + MASS_TOL {
            taken[i] = free;
            remaining -= avail;
            last = Some(i);
            continue;
        }
        if remaining > 0.0 {
            taken[i] = remaining / mass[i];
            last = Some(i);
        }
        break;
    }
    (taken, last)
}

/// Fixed-indecision oracle for `K >= 2` classes.
///
/// Abstains on the atoms with the smallest normalized max score
/// `max_k w_k / sum_k w_k`, splitting the boundary atom, and predicts the
/// argmax elsewhere. Returns the rule and its conditional risk.
pub fn oracle_multiclass(joint: &DiscreteJoint, gamma: f64) -> Result<(IndecisionRule, f64)> {
    check_gamma(gamma)?;
    let n = joint.len();
    let mass: Vec<f64> = (0..n).map(|i| joint.atom_mass(i)).collect();
    let stat: Vec<f64> = (0..n)
        .map(|i| max_weight(joint.weights(i)) / mass[i])
        .collect();
    let order = sorted_order(joint, &stat);
    let (abstain, last) = fill(&order, &mass, &alloc::vec![0.0; n], gamma);
    let threshold = last.map_or(f64::NEG_INFINITY, |i| stat[i]);
    let predict = (0..n).map(|i| argmax(joint.weights(i))).collect();
    let lost: f64 = (0..n)
        .map(|i| (1.0 - abstain[i]) * atom_loss(joint.weights(i)))
        .sum();
    let rule = IndecisionRule {
        abstain,
        predict,
        threshold,
    };
    Ok((rule, lost / (1.0 - gamma)))
}

/// Fixed-indecision oracle for two classes.
///
/// Abstains where `eta ∧ (1 - eta)` is largest; same rule as
/// [`oracle_multiclass`] restricted to `K = 2`.
pub fn oracle_binary(joint: &DiscreteJoint, gamma: f64) -> Result<(IndecisionRule, f64)> {
    if joint.classes() != 2 {
        return Err(Error::invalid("oracle_binary needs exactly two classes"));
    }
    oracle_multiclass(joint, gamma)
}

/// Two-threshold Neyman-Pearson rule on a discrete joint.
#[derive(Debug, Clone, PartialEq)]
pub struct NpRuleDiscrete {
    /// Posterior level at or below which class 2 is predicted.
    pub tau1: f64,
    /// Posterior level above which class 1 is predicted.
    pub tau2: f64,
    /// Fraction of each atom predicted as class 2.
    pub to_class2: Vec<f64>,
    /// Fraction of each atom abstained.
    pub abstain: Vec<f64>,
}

impl NpRuleDiscrete {
    /// Fraction of atom `i` predicted as class 1.
    pub fn to_class1(&self, i: usize) -> f64 {
        (1.0 - self.to_class2[i] - self.abstain[i]).max(0.0)
    }
}

/// Fixed-indecision Neyman-Pearson oracle.
///
/// Type I and type II masses are class-conditional: class 1 mass predicted
/// as class 2 equals `alpha1 (1 - gamma)`, the abstained joint mass equals
/// `gamma`, and the returned type II risk is
/// `P_2(predict 1) / (1 - gamma)`.
pub fn oracle_np(
    joint: &DiscreteJoint,
    alpha1: f64,
    gamma: f64,
) -> Result<(NpRuleDiscrete, f64)> {
    if joint.classes() != 2 {
        return Err(Error::invalid("oracle_np needs exactly two classes"));
    }
    check_gamma(gamma)?;
    if !(0.0..=1.0).contains(&alpha1) {
        return Err(Error::Domain {
            what: "alpha1 must lie in [0, 1]",
            value: alpha1,
        });
    }
    let n = joint.len();
    let (w1, w2) = (joint.class_mass(0), joint.class_mass(1));
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::invalid("both classes need positive mass"));
    }
    let mass: Vec<f64> = (0..n).map(|i| joint.atom_mass(i)).collect();
    let p1: Vec<f64> = (0..n).map(|i| joint.weights(i)[0] / w1).collect();
    let q2: Vec<f64> = (0..n).map(|i| joint.weights(i)[1] / w2).collect();
    let eta: Vec<f64> = (0..n).map(|i| joint.weights(i)[0] / mass[i]).collect();
    let order = sorted_order(joint, &eta);

    let (to_class2, last2) = fill(&order, &p1, &alloc::vec![0.0; n], alpha1 * (1.0 - gamma));
    let (abstain, last_a) = fill(&order, &mass, &to_class2, gamma);
    let abstained: f64 = (0..n).map(|i| abstain[i] * mass[i]).sum();
    if abstained < gamma - MASS_TOL {
        return Err(Error::infeasible(alloc::format!(
            "only {abstained} mass is left to abstain after the type I budget, need {gamma}"
        )));
    }
    let rule = NpRuleDiscrete {
        tau1: last2.map_or(f64::NEG_INFINITY, |i| eta[i]),
        tau2: last_a
            .or(last2)
            .map_or(f64::NEG_INFINITY, |i| eta[i]),
        to_class2,
        abstain,
    };
    let type2: f64 = (0..n).map(|i| rule.to_class1(i) * q2[i]).sum();
    Ok((rule, type2 / (1.0 - gamma)))
}

/// Exhaustive minimum over all fractional abstention rules with mass `gamma`.
///
/// Without `type1_alpha` the objective is the conditional misclassified
/// mass (any `K`). With `Some(alpha1)` the joint must be binary and the
/// objective is the conditional type II mass under the equality
/// `P_1(predict 2) = alpha1 (1 - gamma)`.
pub fn brute_force_min(joint: &DiscreteJoint, gamma: f64, type1_alpha: Option<f64>) -> Result<f64> {
    check_gamma(gamma)?;
    if joint.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            limit: BRUTE_FORCE_LIMIT,
            got: joint.len(),
        });
    }
    match type1_alpha {
        None => Ok(brute_force_selective(joint, gamma) / (1.0 - gamma)),
        Some(alpha1) => {
            if joint.classes() != 2 {
                return Err(Error::invalid("the type I constraint needs two classes"));
            }
            brute_force_np(joint, alpha1, gamma).map(|v| v / (1.0 - gamma))
        }
    }
}

/// Subsets plus one fractional atom; the LP has a single equality constraint.
fn brute_force_selective(joint: &DiscreteJoint, gamma: f64) -> f64 {
    let n = joint.len();
    let mass: Vec<f64> = (0..n).map(|i| joint.atom_mass(i)).collect();
    let loss: Vec<f64> = (0..n).map(|i| atom_loss(joint.weights(i))).collect();
    let total_loss: f64 = loss.iter().sum();
    let mut best = f64::INFINITY;
    for subset in 0u32..(1 << n) {
        let (mut m, mut saved) = (0.0, 0.0);
        for i in 0..n {
            if subset >> i & 1 == 1 {
                m += mass[i];
                saved += loss[i];
            }
        }
        if (m - gamma).abs() <= MASS_TOL {
            best = best.min(total_loss - saved);
        }
        for i in (0..n).filter(|i| subset >> i & 1 == 0) {
            let f = (gamma - m) / mass[i];
            if (-MASS_TOL..=1.0 + MASS_TOL).contains(&f) {
                best = best.min(total_loss - saved - f * loss[i]);
            }
        }
    }
    best
}

/// Vertex enumeration of the three-action LP with two equality constraints.
///
/// Each atom splits its mass over {class 2, abstain, class 1}. A basic
/// solution has at most two atoms off a corner: either two atoms on edges
/// or one atom in the interior of its simplex.
fn brute_force_np(joint: &DiscreteJoint, alpha1: f64, gamma: f64) -> Result<f64> {
    let n = joint.len();
    let (w1, w2) = (joint.class_mass(0), joint.class_mass(1));
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::invalid("both classes need positive mass"));
    }
    // contribution of atom i at corner c to (type I, abstained, type II)
    let contrib = |i: usize, c: usize| -> [f64; 3] {
        let w = joint.weights(i);
        match c {
            0 => [w[0] / w1, 0.0, 0.0],
            1 => [0.0, w[0] + w[1], 0.0],
            _ => [0.0, 0.0, w[1] / w2],
        }
    };
    let target = [alpha1 * (1.0 - gamma), gamma];
    let in_unit = |v: f64| (-1e-12..=1.0 + 1e-12).contains(&v);

    let mut best = f64::INFINITY;
    let mut corners = alloc::vec![0usize; n];
    loop {
        let mut base = [0.0; 3];
        for (i, &c) in corners.iter().enumerate() {
            let v = contrib(i, c);
            for d in 0..3 {
                base[d] += v[d];
            }
        }
        let rhs = [target[0] - base[0], target[1] - base[1]];
        if rhs[0].abs() <= MASS_TOL && rhs[1].abs() <= MASS_TOL {
            best = best.min(base[2]);
        }
        let dir = |i: usize, to: usize| -> [f64; 3] {
            let (a, b) = (contrib(i, corners[i]), contrib(i, to));
            [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
        };
        for i in 0..n {
            let others: [usize; 2] = match corners[i] {
                0 => [1, 2],
                1 => [0, 2],
                _ => [0, 1],
            };
            // one atom on an edge, the other constraint already tight
            for &to in &others {
                let d = dir(i, to);
                for k in 0..2 {
                    if d[k].abs() > 1e-15 {
                        let s = rhs[k] / d[k];
                        if in_unit(s) && (rhs[1 - k] - s * d[1 - k]).abs() <= MASS_TOL {
                            best = best.min(base[2] + s * d[2]);
                        }
                    }
                }
            }
            // one atom in the interior of its simplex
            let (da, db) = (dir(i, others[0]), dir(i, others[1]));
            if let Some((s, t)) = solve2(da, db, rhs) {
                if in_unit(s) && in_unit(t) && s + t <= 1.0 + 1e-12 {
                    best = best.min(base[2] + s * da[2] + t * db[2]);
                }
            }
            // two atoms on edges
            for j in i + 1..n {
                let others_j: [usize; 2] = match corners[j] {
                    0 => [1, 2],
                    1 => [0, 2],
                    _ => [0, 1],
                };
                for &ti in &others {
                    let di = dir(i, ti);
                    for &tj in &others_j {
                        let dj = dir(j, tj);
                        if let Some((s, t)) = solve2(di, dj, rhs) {
                            if in_unit(s) && in_unit(t) {
                                best = best.min(base[2] + s * di[2] + t * dj[2]);
                            }
                        }
                    }
                }
            }
        }
        // odometer over 3^n corner assignments
        let mut pos = 0;
        loop {
            if pos == n {
                return if best.is_finite() {
                    Ok(best.max(0.0))
                } else {
                    Err(Error::infeasible("no rule meets both equality constraints"))
                };
            }
            corners[pos] += 1;
            if corners[pos] < 3 {
                break;
            }
            corners[pos] = 0;
            pos += 1;
        }
    }
}

/// Solves `s a + t b = rhs` on the first two coordinates.
fn solve2(a: [f64; 3], b: [f64; 3], rhs: [f64; 2]) -> Option<(f64, f64)> {
    let det = a[0] * b[1] - a[1] * b[0];
    let scale = (a[0].abs() + a[1].abs()) * (b[0].abs() + b[1].abs());
    if det.abs() <= 1e-13 * scale || scale == 0.0 {
        return None;
    }
    let s = (rhs[0] * b[1] - rhs[1] * b[0]) / det;
    let t = (a[0] * rhs[1] - a[1] * rhs[0]) / det;
    Some((s, t))
}
