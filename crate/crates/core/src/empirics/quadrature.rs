//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::abs;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_SEGMENTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    pub segments: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: abs((kronrod - gauss) * half),
    }
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate is below
/// `rel_tol · |value|` (or `abs_floor`, whichever is larger).
///
/// The interval with the largest error estimate is bisected each round.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64, abs_floor: f64) -> Result<QuadratureResult> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::contract("quadrature needs a finite interval with lo <= hi"));
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(gk15(&f, lo, hi));
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = (rel_tol * abs(value)).max(abs_floor);
        if error <= target && value.is_finite() {
            return Ok(QuadratureResult {
                value,
                abs_error: error,
                segments: segments.len(),
            });
        }
        if segments.len() >= MAX_SEGMENTS || !error.is_finite() || !value.is_finite() {
            return Err(Error::Quadrature {
                achieved: if value != 0.0 {
                    error / abs(value)
                } else {
                    f64::INFINITY
                },
                requested: rel_tol,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.lo + s.hi);
        if !(mid > s.lo && mid < s.hi) {
            return Err(Error::Quadrature {
                achieved: error / abs(value),
                requested: rel_tol,
            });
        }
        segments.push(gk15(&f, s.lo, mid));
        segments.push(gk15(&f, mid, s.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    #[test]
    fn polynomials_are_exact() {
        // Gauss and Kronrod rules agree through degree 13
        let r = integrate(|x| x.powi(12) + 3.0 * x.powi(5) - 1.0, -1.0, 1.0, 1e-13, 0.0).unwrap();
        assert_eq!(r.segments, 1);
        assert!((r.value - (2.0 / 13.0 - 2.0)).abs() < 1e-14);
        let r = integrate(|x| x.powi(22), -1.0, 1.0, 1e-13, 0.0).unwrap();
        assert!((r.value - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x| exp(-0.5 * x * x), -12.0, 12.0, 1e-12, 0.0).unwrap();
        assert!((r.value - crate::math::SQRT_2PI).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand_refines() {
        // ∫_0^1 1/(1e-4 + x²) dx = atan(100)/1e-2
        let r = integrate(|x| 1.0 / (1e-4 + x * x), 0.0, 1.0, 1e-10, 0.0).unwrap();
        let want = libm::atan(100.0) * 100.0;
        assert!(((r.value - want) / want).abs() < 1e-10);
        assert!(r.segments > 1);
    }

    #[test]
    fn reports_non_convergence() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10, 0.0).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
        let err = integrate(|_| f64::NAN, 0.0, 1.0, 1e-10, 0.0).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-8, 0.0).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-8, 0.0).is_err());
    }
}
