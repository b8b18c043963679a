//! Closed-form oracle for the symmetric two-component Gaussian mixture.
//!
//! Class 1 is `N(+delta, 1)`, class 2 is `N(-delta, 1)`, both with prior 1/2.
//! The Bayes posterior is `eta(x) = 1/(1 + exp(-2 delta x))`, so every
//! optimal abstention rule is symmetric in `x`: decide when `|x| >= t`,
//! abstain otherwise. For a threshold `t >= 0`
//!
//! ```text
//! gamma(t)   = Q(delta - t) - Q(delta + t)
//! 1 - gamma  = Q(t - delta) + Q(t + delta)
//! risk(t)    = Q(delta + t) / (1 - gamma(t))
//! ```
//!
//! with `Q` the standard normal upper tail. All solves run in log space so
//! the maps stay accurate when either `gamma` or `1 - gamma` is as small as
//! `1e-15` or far below.

use alloc::vec::Vec;

use crate::numerics::{
    bisect_monotone, ln_add_exp, ln_sub_exp, log_normal_tail, normal_tail, Bracket, RandomStream,
    RootFindConfig,
};
use crate::{Error, Result};

/// Largest threshold the solvers will search.
const T_SEARCH_MAX: f64 = 1.0e6;
/// Log-space tolerance used by the solvers.
const LOG_TOL: f64 = 1e-13;

/// Symmetric mixture with centers at `+delta` and `-delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmSpec {
    delta: f64,
}

impl GmmSpec {
    /// Half-separation `delta > 0` between the two centers.
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain {
                what: "delta must be positive and finite",
                value: delta,
            });
        }
        Ok(Self { delta })
    }

    /// Half-separation between the centers.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Bayes error without abstention, `Q(delta)`.
    pub fn bayes_risk(&self) -> f64 {
        normal_tail(self.delta)
    }

    /// Class-1 posterior `eta(x)`.
    pub fn eta(&self, x: f64) -> f64 {
        1.0 / (1.0 + libm::exp(-2.0 * self.delta * x))
    }

    /// Draws `n` labelled observations; each record takes one fair label
    /// draw then one normal draw from `rng`.
    pub fn sample(&self, rng: &mut RandomStream, n: usize) -> (Vec<f64>, Vec<u8>) {
        let mut xs = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let label = if rng.bernoulli_half() { 1 } else { 2 };
            let center = if label == 1 { self.delta } else { -self.delta };
            xs.push(center + rng.standard_normal());
            labels.push(label);
        }
        (xs, labels)
    }
}

/// A point on the oracle's threshold / indecision / risk curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOperatingPoint {
    /// Symmetric threshold on the observation axis.
    pub t: f64,
    /// Indecision mass `P(|X| < t)`.
    pub gamma: f64,
    /// Decided mass `1 - gamma`, computed without cancellation.
    pub decided: f64,
    /// Conditional misclassification risk given a decision.
    pub risk: f64,
}

/// Log-space pieces of the operating point at `t`.
struct LogPoint {
    ln_error: f64,
    ln_decided: f64,
    ln_gamma: f64,
}

fn log_point(delta: f64, t: f64) -> LogPoint {
    let ln_error = log_normal_tail(delta + t);
    let ln_decided = ln_add_exp(ln_error, log_normal_tail(t - delta));
    let ln_gamma = ln_sub_exp(log_normal_tail(delta - t), ln_error);
    LogPoint {
        ln_error,
        ln_decided,
        ln_gamma,
    }
}

/// Evaluates the oracle at threshold `t >= 0`.
pub fn operating_point_at_t(spec: GmmSpec, t: f64) -> Result<OracleOperatingPoint> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "threshold t must be non-negative",
            value: t,
        });
    }
    if t.is_infinite() {
        return Ok(OracleOperatingPoint {
            t,
            gamma: 1.0,
            decided: 0.0,
            risk: 0.0,
        });
    }
    let lp = log_point(spec.delta, t);
    let decided = libm::exp(lp.ln_decided);
    let gamma = if decided > 0.5 {
        libm::exp(lp.ln_gamma)
    } else {
        1.0 - decided
    };
    Ok(OracleOperatingPoint {
        t,
        gamma,
        decided,
        risk: libm::exp(lp.ln_error - lp.ln_decided),
    })
}

/// Grows `[0, T]` until `reached(T)` holds.
fn search_bracket(mut reached: impl FnMut(f64) -> bool) -> Result<Bracket> {
    let mut high = 1.0;
    while !reached(high) {
        high *= 2.0;
        if high > T_SEARCH_MAX {
            return Err(Error::infeasible(
                "operating point lies beyond the searchable threshold range",
            ));
        }
    }
    Bracket::new(0.0, high)
}

fn solve_cfg(bracket: Bracket) -> RootFindConfig {
    RootFindConfig {
        abs_tol: LOG_TOL,
        max_iter: 400,
        bracket,
    }
}

/// Threshold whose indecision mass equals `gamma` (`0 <= gamma < 1`).
pub fn threshold_for_gamma(spec: GmmSpec, gamma: f64) -> Result<OracleOperatingPoint> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain {
            what: "gamma must lie in [0, 1)",
            value: gamma,
        });
    }
    if gamma == 0.0 {
        return operating_point_at_t(spec, 0.0);
    }
    if gamma > 0.5 {
        return threshold_for_decided(spec, 1.0 - gamma);
    }
    let delta = spec.delta;
    let target = libm::log(gamma);
    let bracket = search_bracket(|t| log_point(delta, t).ln_gamma >= target)?;
    let t = bisect_monotone(|t| log_point(delta, t).ln_gamma, target, &solve_cfg(bracket))?;
    operating_point_at_t(spec, t)
}

/// Threshold whose decided mass `1 - gamma` equals `decided` (`0 < decided <= 1`).
///
/// Use this form when the indecision mass is within a few ulps of one.
pub fn threshold_for_decided(spec: GmmSpec, decided: f64) -> Result<OracleOperatingPoint> {
    if !(decided > 0.0 && decided <= 1.0) {
        return Err(Error::Domain {
            what: "decided mass must lie in (0, 1]",
            value: decided,
        });
    }
    if decided == 1.0 {
        return operating_point_at_t(spec, 0.0);
    }
    let delta = spec.delta;
    let target = libm::log(decided);
    let bracket = search_bracket(|t| log_point(delta, t).ln_decided <= target)?;
    let t = bisect_monotone(|t| log_point(delta, t).ln_decided, target, &solve_cfg(bracket))?;
    operating_point_at_t(spec, t)
}

/// Smallest-indecision operating point whose conditional risk equals `target_risk`.
///
/// Returns the `t = 0` point when the Bayes error already meets the target.
pub fn gamma_for_target_risk(spec: GmmSpec, target_risk: f64) -> Result<OracleOperatingPoint> {
    if !(target_risk > 0.0) {
        return Err(Error::infeasible(
            "a conditional risk of zero needs the whole mass abstained",
        ));
    }
    if target_risk >= spec.bayes_risk() {
        return operating_point_at_t(spec, 0.0);
    }
    let delta = spec.delta;
    let ln_risk = |t: f64| {
        let lp = log_point(delta, t);
        lp.ln_error - lp.ln_decided
    };
    let target = libm::log(target_risk);
    let bracket = search_bracket(|t| ln_risk(t) <= target)?;
    let t = bisect_monotone(ln_risk, target, &solve_cfg(bracket))?;
    operating_point_at_t(spec, t)
}

fn check_exponent_domain(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) || c == 0.5 {
        return Err(Error::Domain {
            what: "c must lie in (0, 1) and differ from 1/2",
            value: c,
        });
    }
    Ok(())
}

/// Critical indecision exponent `m*(c)`.
///
/// `(c - 1/(4c))^2` below one half, `(2c - 1)^2` above.
pub fn m_star(c: f64) -> Result<f64> {
    check_exponent_domain(c)?;
    Ok(if c < 0.5 {
        let v = c - 1.0 / (4.0 * c);
        v * v
    } else {
        let v = 2.0 * c - 1.0;
        v * v
    })
}

/// Finite-`delta` correction `eps = ln(4 pi L) / (2 L)` with `L = ln(1/mass)`.
pub fn exponent_correction(vanishing_mass: f64) -> Result<f64> {
    if !(vanishing_mass > 0.0 && vanishing_mass < 1.0) {
        return Err(Error::Domain {
            what: "vanishing mass must lie in (0, 1)",
            value: vanishing_mass,
        });
    }
    let l = -libm::log(vanishing_mass);
    if l <= 1.0 {
        return Err(Error::Domain {
            what: "ln(1/mass) must exceed 1 for the exponent correction",
            value: vanishing_mass,
        });
    }
    Ok(0.5 * libm::log(4.0 * core::f64::consts::PI * l) / l)
}

/// Finite-`delta` companion curve to [`m_star`].
///
/// `vanishing_mass` is the indecision quantity that tends to zero along the
/// parameterization: `gamma` itself when `c > 1/2`, and `1 - gamma` when
/// `c < 1/2`.
pub fn m_lower(c: f64, vanishing_mass: f64) -> Result<f64> {
    check_exponent_domain(c)?;
    let eps = exponent_correction(vanishing_mass)?;
    Ok(if c < 0.5 {
        let v = c - (1.0 - eps) / (4.0 * c);
        v * v
    } else {
        let v = 2.0 * c - 1.0 + eps;
        v * v
    })
}

/// Separation `delta(c) = c sqrt(2 ln(1/delta_target))`.
pub fn separation_for(c: f64, delta_target: f64) -> f64 {
    c * libm::sqrt(-2.0 * libm::log(delta_target))
}

/// Exponent of the oracle's minimal indecision at risk `delta_target`.
///
/// `ln(1/gamma)/ln(1/delta)` for `c > 1/2`, `ln(1/(1 - gamma))/ln(1/delta)`
/// for `c < 1/2`. Infinite when no indecision is needed.
pub fn optimal_exponent(c: f64, delta_target: f64) -> Result<(f64, OracleOperatingPoint)> {
    check_exponent_domain(c)?;
    let spec = GmmSpec::new(separation_for(c, delta_target))?;
    let point = gamma_for_target_risk(spec, delta_target)?;
    let ln_inv_delta = -libm::log(delta_target);
    let vanishing = if c > 0.5 { point.gamma } else { point.decided };
    Ok((-libm::log(vanishing) / ln_inv_delta, point))
}

/// Phase-transition grid description.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGridConfig {
    /// Target conditional risk.
    pub delta_target: f64,
    /// Separation parameters, strictly increasing in `(0, 1)`.
    pub c_grid: Vec<f64>,
    /// Indecision exponents, strictly increasing in `(0, 1)`.
    pub m_grid: Vec<f64>,
    /// Display range for the capped ratio.
    pub cap: (f64, f64),
    /// Cells with `|c - 1/2| <= dead_band` are skipped.
    pub dead_band: f64,
}

impl PhaseGridConfig {
    /// Uniform interior grids of `n_c` by `n_m` points with default cap and dead band.
    pub fn uniform(delta_target: f64, c_range: (f64, f64), n_c: usize, n_m: usize) -> Self {
        Self {
            delta_target,
            c_grid: interior_grid(c_range.0, c_range.1, n_c),
            m_grid: interior_grid(0.0, 1.0, n_m),
            cap: (0.5, 2.0),
            dead_band: 0.05,
        }
    }

    /// Checks the grid invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_target > 0.0 && self.delta_target < 1.0) {
            return Err(Error::Domain {
                what: "delta_target must lie in (0, 1)",
                value: self.delta_target,
            });
        }
        for (name, grid) in [("c_grid", &self.c_grid), ("m_grid", &self.m_grid)] {
            if grid.is_empty() {
                return Err(Error::invalid(alloc::format!("{name} is empty")));
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::invalid(alloc::format!("{name} is not strictly increasing")));
            }
            if grid.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
                return Err(Error::invalid(alloc::format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.cap.0 < self.cap.1) || !(self.dead_band >= 0.0) {
            return Err(Error::invalid("cap must be an increasing pair and dead_band >= 0"));
        }
        Ok(())
    }
}

/// `n` points `lo + (hi - lo) * i/(n + 1)`, `i = 1..=n`.
pub fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64)
        .collect()
}

/// Outcome of one phase-grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseCellValue {
    /// Cell solved.
    Resolved {
        /// Oracle operating point at the prescribed indecision mass.
        point: OracleOperatingPoint,
        /// `risk / delta_target`.
        ratio_raw: f64,
        /// Ratio clamped to the display cap.
        ratio_capped: f64,
    },
    /// The indecision mass is numerically one or the threshold solve failed.
    Unresolved,
    /// `c` lies in the dead band around one half.
    DeadBand,
}

/// One `(c, m)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    /// Separation parameter.
    pub c: f64,
    /// Indecision exponent.
    pub m: f64,
    /// Separation `delta(c)`.
    pub delta: f64,
    /// Cell outcome.
    pub value: PhaseCellValue,
}

/// Evaluates a single phase cell.
pub fn phase_cell(cfg: &PhaseGridConfig, c: f64, m: f64) -> PhaseCell {
    let delta = separation_for(c, cfg.delta_target);
    let mut cell = PhaseCell {
        c,
        m,
        delta,
        value: PhaseCellValue::DeadBand,
    };
    if (c - 0.5).abs() <= cfg.dead_band {
        return cell;
    }
    let Ok(spec) = GmmSpec::new(delta) else {
        cell.value = PhaseCellValue::Unresolved;
        return cell;
    };
    // delta^m is the vanishing quantity on both sides of c = 1/2
    let vanishing = libm::pow(cfg.delta_target, m);
    let solved = if c > 0.5 {
        if vanishing >= 1.0 {
            Err(Error::infeasible("gamma numerically one"))
        } else {
            threshold_for_gamma(spec, vanishing)
        }
    } else {
        threshold_for_decided(spec, vanishing)
    };
    cell.value = match solved {
        Ok(point) if point.decided > 0.0 && point.gamma < 1.0 => {
            let ratio_raw = point.risk / cfg.delta_target;
            PhaseCellValue::Resolved {
                point,
                ratio_raw,
                ratio_capped: ratio_raw.clamp(cfg.cap.0, cfg.cap.1),
            }
        }
        _ => PhaseCellValue::Unresolved,
    };
    cell
}

/// Evaluates every cell, rows ordered by `c` then `m`.
pub fn phase_grid(cfg: &PhaseGridConfig) -> Result<Vec<PhaseCell>> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.c_grid.len() * cfg.m_grid.len());
    for &c in &cfg.c_grid {
        for &m in &cfg.m_grid {
            cells.push(phase_cell(cfg, c, m));
        }
    }
    Ok(cells)
}
