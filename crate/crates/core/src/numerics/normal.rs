//! Standard normal tail, log-tail and upper quantile.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

/// `1/sqrt(2*pi)`.
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `2/sqrt(pi)`.
const FRAC_2_SQRT_PI: f64 = core::f64::consts::FRAC_2_SQRT_PI;
/// Low-order part of `1/sqrt(2)` beyond the double `FRAC_1_SQRT_2`.
const FRAC_1_SQRT_2_LO: f64 = -4.833_646_656_726_457e-17;
/// Beyond this point the erfc route underflows and the upper tail bound is returned.
const TAIL_CUTOFF: f64 = 40.0;
/// Largest argument for which `ln(normal_tail(t))` is evaluated directly.
const LOG_DIRECT_MAX: f64 = 37.0;

/// Standard normal density `phi(t)`.
pub fn normal_density(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * t * t)
}

/// Upper tail `P(xi >= t)` of a standard normal variable.
///
/// Computed as `erfc(t/sqrt 2)/2` with a first-order correction for the
/// rounding of `t/sqrt 2`, which keeps the relative error near machine
/// precision far into the tail. For `t > 40` the upper Mills-ratio bound
/// `exp(-t^2/2)/(sqrt(2 pi) t)` is returned (it underflows to zero there).
pub fn normal_tail(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t > TAIL_CUTOFF {
        return normal_density(t) / t;
    }
    if t < -TAIL_CUTOFF {
        return 1.0;
    }
    let z = t * FRAC_1_SQRT_2;
    // exact t/sqrt(2) = z + dz
    let dz = libm::fma(t, FRAC_1_SQRT_2, -z) + t * FRAC_1_SQRT_2_LO;
    let base = 0.5 * libm::erfc(z);
    base - 0.5 * FRAC_2_SQRT_PI * libm::exp(-z * z) * dz
}

/// Natural logarithm of [`normal_tail`], finite for every finite `t`.
pub fn log_normal_tail(t: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t < 0.0 {
        return libm::log1p(-normal_tail(-t));
    }
    if t <= LOG_DIRECT_MAX {
        return libm::log(normal_tail(t));
    }
    // Asymptotic expansion of the Mills ratio:
    // Q(t) = phi(t)/t * (1 - 1/t^2 + 3/t^4 - 15/t^6 + ...)
    let inv2 = 1.0 / (t * t);
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..=8 {
        term *= -((2 * k - 1) as f64) * inv2;
        series += term;
    }
    -0.5 * t * t - libm::log(t) - 0.5 * libm::log(2.0 * PI) + libm::log(series)
}

/// Upper quantile: the `x` with `normal_tail(x) == p`.
///
/// Uses Wichura's AS 241 rational approximation followed by one Newton
/// step on the tail, so `|normal_tail(x) - p| <= 1e-12`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "normal_quantile requires p in (0, 1)",
            value: p,
        });
    }
    // Q(x) = p  <=>  Phi(-x) = p
    let mut x = -inverse_cdf(p);
    let density = normal_density(x);
    if density > 0.0 {
        x += (normal_tail(x) - p) / density;
    }
    Ok(x)
}

/// AS 241 (PPND16): lower-tail inverse of the standard normal CDF.
fn inverse_cdf(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_049e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_445_9e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_879e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sandwich(t: f64) -> (f64, f64) {
        let lower = libm::exp(-0.5 * t * t) / (libm::sqrt(2.0 * PI) * (t + 1.0));
        let upper = libm::exp(-0.5 * t * t) / (libm::sqrt(2.0 * PI) * t);
        (lower, upper)
    }

    #[test]
    fn tail_at_zero_is_half() {
        assert_eq!(normal_tail(0.0), 0.5);
    }

    #[test]
    fn tail_at_one_matches_reference() {
        // erfc(1/sqrt 2)/2 evaluated at 40 digits, cross-checked by quadrature
        let reference = 0.158_655_253_931_457_05;
        assert!((normal_tail(1.0) - reference).abs() <= 1e-15);
    }

    #[test]
    fn tail_respects_mills_sandwich() {
        for &t in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let (lo, hi) = sandwich(t);
            let q = normal_tail(t);
            assert!(lo <= q && q <= hi, "t={t}: {lo} <= {q} <= {hi}");
        }
    }

    #[test]
    fn far_tail_uses_bound() {
        assert_eq!(normal_tail(50.0), sandwich(50.0).1);
        assert_eq!(normal_tail(-50.0), 1.0);
    }

    #[test]
    fn log_tail_continuous_across_switch() {
        let below = log_normal_tail(LOG_DIRECT_MAX);
        let above = log_normal_tail(LOG_DIRECT_MAX + 1e-9);
        assert!((below - above).abs() < 1e-6);
        // ln Q(-t) ~ -Q(t) for large t
        assert!((log_normal_tail(-10.0) + normal_tail(10.0)).abs() < 1e-30);
    }

    #[test]
    fn quantile_examples() {
        assert!(normal_quantile(0.5).unwrap().abs() < 1e-15);
        assert!((normal_quantile(0.158_655_25).unwrap() - 1.0).abs() < 1e-7);
        assert!((normal_quantile(0.9).unwrap() + 1.281_551_565_544_600_4).abs() < 1e-12);
    }

    #[test]
    fn quantile_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(normal_quantile(p), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn quantile_inverts_tail_on_centiles() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let x = normal_quantile(p).unwrap();
            assert!((normal_tail(x) - p).abs() <= 1e-12, "p={p}");
        }
        for p in [1e-300, 1e-100, 1e-15, 1e-7, 1.0 - 1e-12] {
            let x = normal_quantile(p).unwrap();
            assert!((normal_tail(x) - p).abs() <= 1e-12, "p={p}");
        }
    }
}
