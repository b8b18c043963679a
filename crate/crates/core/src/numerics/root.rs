//! Bisection on monotone scalar maps.

use crate::{Error, Result};

/// Closed search interval `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    /// Lower end.
    pub low: f64,
    /// Upper end.
    pub high: f64,
}

impl Bracket {
    /// Builds a bracket, rejecting empty or non-finite intervals.
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::Domain {
                what: "bracket requires finite low < high",
                value: high - low,
            });
        }
        Ok(Self { low, high })
    }
}

/// Stopping rule and search interval for [`bisect_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFindConfig {
    /// Stop once `|f(x) - target|` or the bracket width drops to this value.
    pub abs_tol: f64,
    /// Maximum number of halvings.
    pub max_iter: usize,
    /// Interval that must enclose the solution.
    pub bracket: Bracket,
}

impl RootFindConfig {
    /// Default tolerances (`1e-12`, 200 iterations) on the given bracket.
    pub fn on(bracket: Bracket) -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 200,
            bracket,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain {
                what: "abs_tol must be positive",
                value: self.abs_tol,
            });
        }
        Bracket::new(self.bracket.low, self.bracket.high).map(|_| ())
    }
}

/// Solves `f(x) = target` for a monotone `f` by bisection.
///
/// `f` may be increasing or decreasing. The returned point satisfies
/// `|f(x) - target| <= abs_tol` or lies in a final bracket no wider than
/// `abs_tol`.
pub fn bisect_monotone<F>(mut f: F, target: f64, cfg: &RootFindConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    let (mut lo, mut hi) = (cfg.bracket.low, cfg.bracket.high);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if (f_lo - target).abs() <= cfg.abs_tol {
        return Ok(lo);
    }
    if (f_hi - target).abs() <= cfg.abs_tol {
        return Ok(hi);
    }
    let increasing = f_hi >= f_lo;
    let enclosed = if increasing {
        f_lo <= target && target <= f_hi
    } else {
        f_hi <= target && target <= f_lo
    };
    if !enclosed {
        return Err(Error::BracketFailure {
            target,
            f_low: f_lo,
            f_high: f_hi,
        });
    }
    for _ in 0..cfg.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            // adjacent floats: the bracket cannot shrink further
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::Domain {
                what: "function returned NaN inside the bracket",
                value: mid,
            });
        }
        if (f_mid - target).abs() <= cfg.abs_tol || hi - lo <= cfg.abs_tol {
            return Ok(mid);
        }
        if (f_mid < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::IterationLimit {
        max_iter: cfg.max_iter,
        last_x: lo + 0.5 * (hi - lo),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_tail;

    fn cfg(low: f64, high: f64) -> RootFindConfig {
        RootFindConfig::on(Bracket::new(low, high).unwrap())
    }

    #[test]
    fn square_root_of_four() {
        let x = bisect_monotone(|x| x * x, 4.0, &cfg(0.0, 10.0)).unwrap();
        assert!((x - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn decreasing_function() {
        let x = bisect_monotone(|x| -x * x * x, -27.0, &cfg(0.0, 10.0)).unwrap();
        assert!((x - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn indecision_mass_at_unit_separation() {
        let f = |t: f64| normal_tail(1.0 - t) - normal_tail(1.0 + t);
        let t = bisect_monotone(f, 0.1, &cfg(0.0, 10.0)).unwrap();
        assert!((f(t) - 0.1).abs() <= 1e-12);
    }

    #[test]
    fn unbracketed_target() {
        let err = bisect_monotone(|x| x * x, 200.0, &cfg(0.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::BracketFailure { .. }));
    }

    #[test]
    fn iteration_limit() {
        let mut c = cfg(0.0, 10.0);
        c.max_iter = 3;
        c.abs_tol = 1e-15;
        let err = bisect_monotone(|x| x, 1.0 / 3.0, &c).unwrap_err();
        assert!(matches!(err, Error::IterationLimit { max_iter: 3, .. }));
    }

    #[test]
    fn invalid_config() {
        let mut c = cfg(0.0, 1.0);
        c.abs_tol = 0.0;
        assert!(bisect_monotone(|x| x, 0.5, &c).is_err());
        assert!(Bracket::new(1.0, 1.0).is_err());
    }
}
