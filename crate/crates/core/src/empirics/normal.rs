//! Standard normal distribution function and quantile.
//!
//! `erfc` follows the piecewise rational approximation of FreeBSD msun
//! `s_erf.c` (Copyright (C) 1993 Sun Microsystems, Inc.; permission to use,
//! copy, modify and distribute is freely granted provided this notice is
//! preserved). Each piece has relative error below 2^-57 on its interval.

use crate::math::{abs, exp, ln, sqrt, FRAC_1_SQRT_2PI, SQRT_2PI};

const ERX: f64 = 8.45062911510467529297e-01;

// [0, 0.84375]
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

// [0.84375, 1.25]
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

// [1.25, 1/0.35]
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

// [1/0.35, 28]
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = abs(x);
    let negative = x < 0.0;

    if ax < 0.84375 {
        if ax < 1.3877787807814457e-17 {
            return 1.0 - x;
        }
        let z = x * x;
        let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
        let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
        let y = r / s;
        return if x < 0.25 {
            1.0 - (x + x * y)
        } else {
            0.5 - (x * y + (x - 0.5))
        };
    }
    if ax < 1.25 {
        let s = ax - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        return if negative { 1.0 + ERX + p / q } else { 1.0 - ERX - p / q };
    }
    if ax >= 28.0 {
        return if negative { 2.0 } else { 0.0 };
    }
    if negative && ax >= 6.0 {
        return 2.0;
    }
    let s = 1.0 / (ax * ax);
    let (r, q) = if ax < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s * (SA1 + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // split x*x so the leading exponent is exact
    let z = f64::from_bits(ax.to_bits() & 0xffff_ffff_0000_0000);
    let tail = exp(-z * z - 0.5625) * exp((z - ax) * (z + ax) + r / q) / ax;
    if negative {
        2.0 - tail
    } else {
        tail
    }
}

/// Standard normal distribution function Φ.
///
/// Absolute error below 1e-15 everywhere; relative accuracy is kept in the
/// lower tail.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density φ.
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * x * x)
}

// Acklam's rational approximation, relative error 1.15e-9 before refinement.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

/// Lower-half quantile, `u` in (0, 0.5].
#[inline]
fn lower_quantile(u: f64) -> f64 {
    let x = if u < P_LOW {
        let q = sqrt(-2.0 * ln(u));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // one Halley step against the accurate Φ
    let e = std_normal_cdf(x) - u;
    let step = e * SQRT_2PI * exp(0.5 * x * x);
    x - step / (1.0 + 0.5 * x * step)
}

/// Standard normal quantile Φ⁻¹(u) for u in (0, 1).
///
/// Returns ±∞ at the endpoints and NaN outside [0, 1].
pub fn std_normal_quantile(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return f64::NAN;
    }
    if u == 0.0 {
        return f64::NEG_INFINITY;
    }
    if u == 1.0 {
        return f64::INFINITY;
    }
    if u <= 0.5 {
        lower_quantile(u)
    } else {
        // 1 - u is exact for u >= 0.5
        -lower_quantile(1.0 - u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // 30-digit values computed with mpmath.
    const REFERENCE: [(f64, f64); 8] = [
        (-8.0, 6.22096057427178412352e-16),
        (-5.0, 2.86651571879193911674e-7),
        (-1.5, 0.0668072012688580660045),
        (0.1, 0.539827837277028983669),
        (0.05, 0.519938805838372462702),
        (1.0, 0.841344746068542948585),
        (2.5, 0.993790334674223864833),
        (7.0, 0.999999999998720187456),
    ];

    #[test]
    fn cdf_reference_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        for (x, want) in REFERENCE {
            assert!((std_normal_cdf(x) - want).abs() <= 1e-15, "x = {x}");
        }
        // relative accuracy in the far lower tail
        let got = std_normal_cdf(-8.0);
        assert!(((got - 6.22096057427178412352e-16) / got).abs() < 1e-13);
    }

    #[test]
    fn erfc_special_values() {
        assert_eq!(erfc(0.0), 1.0);
        assert_eq!(erfc(40.0), 0.0);
        assert_eq!(erfc(-40.0), 2.0);
        assert!(erfc(f64::NAN).is_nan());
        assert!((erfc(1.0) - 0.157299207050285130658779364917).abs() < 1e-16);
    }

    #[test]
    fn quantile_endpoints() {
        assert_eq!(std_normal_quantile(0.5), 0.0);
        assert_eq!(std_normal_quantile(0.0), f64::NEG_INFINITY);
        assert_eq!(std_normal_quantile(1.0), f64::INFINITY);
        assert!(std_normal_quantile(1.5).is_nan());
        assert!((std_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-14);
        assert!((std_normal_quantile(1e-10) + 6.361340902404056).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn cdf_symmetry(x in -30.0f64..30.0) {
            let s = std_normal_cdf(x) + std_normal_cdf(-x);
            prop_assert!((s - 1.0).abs() <= 2e-16);
        }

        #[test]
        fn cdf_is_monotone(x in -10.0f64..10.0, dx in 0.0f64..1.0) {
            prop_assert!(std_normal_cdf(x) <= std_normal_cdf(x + dx));
        }

        #[test]
        fn quantile_inverts_cdf(u in 1e-300f64..1.0) {
            let x = std_normal_quantile(u);
            let back = std_normal_cdf(x);
            let tol = if u < 0.5 { 1e-13 * u } else { 2e-16 };
            prop_assert!((back - u).abs() <= tol + 1e-300, "u={u} x={x} back={back}");
        }
    }
}
