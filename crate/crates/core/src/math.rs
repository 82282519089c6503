//! Thin `libm` shims so the numeric code reads like ordinary float math
//! without pulling in `std`.

pub(crate) use libm::{exp, fabs as abs, log as ln, pow, sqrt};

pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// E|Z|^r for a standard normal Z, r > -1.
pub(crate) fn normal_abs_moment(r: f64) -> f64 {
    // 2^{r/2} Γ((r+1)/2) / √π
    exp(0.5 * r * core::f64::consts::LN_2 + ln_gamma(0.5 * (r + 1.0)) - 0.5 * ln(core::f64::consts::PI))
}
