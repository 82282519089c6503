//! Martingale-difference models as pure step functions.
//!
//! A [`Model`] is an immutable, validated [`ModelSpec`]. Stepping takes the
//! current [`ModelState`] plus a slice of uniforms and returns the realized
//! increment together with its exact conditional second moment.

use alloc::format;
use alloc::string::String;

use crate::empirics::normal::{std_normal_cdf, std_normal_quantile};
use crate::empirics::quadrature::{integrate, QuadratureResult};
use crate::error::{Error, Result};
use crate::math::{abs, exp, ln, ln_gamma, normal_abs_moment, pow, sqrt, FRAC_1_SQRT_2PI};

/// Unit-variance two-point law.
///
/// Built from an atom hint `a` and its probability `q`; the other atom and
/// the common scale are solved so the law has mean 0 and variance 1. Only
/// the sign of `a` survives normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPoint {
    q: f64,
    first: f64,
    second: f64,
}

impl TwoPoint {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::config("two_point_q", format!("must lie in (0, 1), got {q}")));
        }
        if !a.is_finite() || a == 0.0 {
            return Err(Error::config(
                "two_point_a",
                format!("must be finite and nonzero, got {a}"),
            ));
        }
        let s = if a > 0.0 { 1.0 } else { -1.0 };
        Ok(Self {
            q,
            first: s * sqrt((1.0 - q) / q),
            second: -s * sqrt(q / (1.0 - q)),
        })
    }

    /// Probability of the first atom.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// The atoms `(first, second)` after normalization.
    pub fn atoms(&self) -> (f64, f64) {
        (self.first, self.second)
    }
}

/// Mean-0, variance-1 innovation laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDistribution {
    StandardNormal,
    Rademacher,
    TwoPointAsymmetric(TwoPoint),
    /// Student t with integer `nu >= 3` degrees of freedom, rescaled to unit
    /// variance. Drawn as `Z / sqrt(chi2_nu / nu)` from `nu + 1` normals.
    StudentLike {
        nu: u32,
    },
}

impl BaseDistribution {
    /// Uniforms consumed per scalar draw.
    pub fn draws(&self) -> usize {
        match self {
            BaseDistribution::StudentLike { nu } => *nu as usize + 1,
            _ => 1,
        }
    }

    /// Transforms `self.draws()` uniforms into one variate.
    #[inline]
    pub fn sample(&self, u: &[f64]) -> f64 {
        match self {
            BaseDistribution::StandardNormal => std_normal_quantile(u[0]),
            BaseDistribution::Rademacher => {
                if u[0] < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            BaseDistribution::TwoPointAsymmetric(tp) => {
                if u[0] < tp.q {
                    tp.first
                } else {
                    tp.second
                }
            }
            BaseDistribution::StudentLike { nu } => {
                let nu = *nu as usize;
                let z = std_normal_quantile(u[0]);
                let chi2: f64 = u[1..=nu]
                    .iter()
                    .map(|&v| {
                        let g = std_normal_quantile(v);
                        g * g
                    })
                    .sum();
                let nu = nu as f64;
                z / sqrt(chi2 / nu) * sqrt((nu - 2.0) / nu)
            }
        }
    }

    /// E|X|^r.
    pub fn abs_moment(&self, r: f64) -> Result<f64> {
        match self {
            BaseDistribution::StandardNormal => Ok(normal_abs_moment(r)),
            BaseDistribution::Rademacher => Ok(1.0),
            BaseDistribution::TwoPointAsymmetric(tp) => {
                Ok(tp.q * pow(abs(tp.first), r) + (1.0 - tp.q) * pow(abs(tp.second), r))
            }
            BaseDistribution::StudentLike { nu } => {
                let nu = f64::from(*nu);
                if r >= nu {
                    return Err(Error::InfiniteMoment {
                        order: r,
                        what: "Student-like base",
                    });
                }
                // ((nu-2)/nu)^{r/2} · nu^{r/2} Γ((r+1)/2) Γ((nu-r)/2) / (√π Γ(nu/2))
                let log_m = 0.5 * r * ln(nu - 2.0) + ln_gamma(0.5 * (r + 1.0)) + ln_gamma(0.5 * (nu - r))
                    - 0.5 * ln(core::f64::consts::PI)
                    - ln_gamma(0.5 * nu);
                Ok(exp(log_m))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            BaseDistribution::StandardNormal => "normal".into(),
            BaseDistribution::Rademacher => "rademacher".into(),
            BaseDistribution::TwoPointAsymmetric(tp) => {
                format!("two_point(sign={};q={})", if tp.first > 0.0 { "+" } else { "-" }, tp.q)
            }
            BaseDistribution::StudentLike { nu } => format!("student(nu={nu})"),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BaseDistribution::StudentLike { nu } if *nu < 3 => Err(Error::config(
                "student_nu",
                format!("needs at least 3 degrees of freedom for unit variance, got {nu}"),
            )),
            BaseDistribution::TwoPointAsymmetric(tp) => TwoPoint::new(tp.first, tp.q).map(|_| ()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Independent base draws scaled by `1/sqrt(n)`.
    IidScaled { base: BaseDistribution },
    /// `X_i = eps_i · g(X_{i-1}) / sqrt(n)` with
    /// `g(x) = sqrt(0.5 + 0.5·min(1, n·x²))`.
    MultiplicativeStationary { base: BaseDistribution },
    /// Gaussian prefix of variance `1/(n-1)` per step, then a symmetric
    /// two-point final increment `±alpha·f(S_{n-1})` with `f(x) = 1/x` for
    /// `x >= sqrt(alpha)/2` and 0 otherwise.
    Sharpness { alpha: f64 },
    /// Embedded martingale of the AR(1) least-squares error:
    /// `X_i = Y_i eps_{i+1} / (sigma · sqrt(sum_j E Y_j²))`.
    Ar1Noise {
        base: BaseDistribution,
        theta: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    /// Number of increments.
    pub horizon: usize,
}

impl ModelSpec {
    pub fn new(family: Family, horizon: usize) -> Self {
        Self { family, horizon }
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        Self {
            family: self.family,
            horizon,
        }
    }

    /// Stable textual name; contains no commas.
    pub fn label(&self) -> String {
        match &self.family {
            Family::IidScaled { base } => format!("iid_{}", base.label()),
            Family::MultiplicativeStationary { base } => format!("stationary_{}", base.label()),
            Family::Sharpness { alpha } => format!("sharpness(alpha={alpha})"),
            Family::Ar1Noise { base, theta, sigma } => {
                format!("ar1_{}(theta={theta};sigma={sigma})", base.label())
            }
        }
    }

    /// 64-bit FNV-1a of the label and horizon.
    pub fn fingerprint(&self) -> u64 {
        crate::fnv1a(format!("{}#{}", self.label(), self.horizon).as_bytes())
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.family {
            Family::Sharpness { alpha } => Some(alpha),
            _ => None,
        }
    }
}

/// Stepper state. Only meaningful together with the [`Model`] that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelState {
    step: usize,
    partial_sum: f64,
    last_increment: f64,
    level: f64,
}

impl ModelState {
    /// Number of increments realized so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn partial_sum(&self) -> f64 {
        self.partial_sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub increment: f64,
    pub conditional_second_moment: f64,
    pub new_state: ModelState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    inv_sqrt_n: f64,
    ar1_scale: f64,
    ar1_norm: f64,
}

impl Model {
    /// Validates `spec` and precomputes per-horizon constants.
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let n = spec.horizon;
        if n == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        let mut ar1_scale = 0.0;
        let mut ar1_norm = 0.0;
        match spec.family {
            Family::IidScaled { base } | Family::MultiplicativeStationary { base } => base.validate()?,
            Family::Sharpness { alpha } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::config("alpha", format!("must lie in (0, 1], got {alpha}")));
                }
                if n < 2 {
                    return Err(Error::config("horizon", "sharpness model needs at least 2 increments"));
                }
            }
            Family::Ar1Noise { base, theta, sigma } => {
                base.validate()?;
                if !(abs(theta) < 1.0) {
                    return Err(Error::config("theta", format!("must satisfy |theta| < 1, got {theta}")));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::config(
                        "sigma",
                        format!("must be positive and finite, got {sigma}"),
                    ));
                }
                let b = crate::applications::ar1_cumulative_second_moment(theta, sigma, n);
                ar1_norm = b;
                ar1_scale = 1.0 / (sigma * sqrt(b));
            }
        }
        Ok(Self {
            spec,
            inv_sqrt_n: 1.0 / sqrt(n as f64),
            ar1_scale,
            ar1_norm,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    pub fn initial_state(&self) -> ModelState {
        ModelState::default()
    }

    /// State reached after realizing `history` as the first increments.
    ///
    /// Not available for the AR(1) family, whose state is the latent level;
    /// use [`Model::ar1_state`] there.
    pub fn state_after(&self, history: &[f64]) -> Result<ModelState> {
        if matches!(self.spec.family, Family::Ar1Noise { .. }) {
            return Err(Error::contract("AR(1) state is not determined by increments"));
        }
        if history.len() > self.spec.horizon {
            return Err(Error::contract("history longer than the horizon"));
        }
        Ok(ModelState {
            step: history.len(),
            partial_sum: history.iter().sum(),
            last_increment: history.last().copied().unwrap_or(0.0),
            level: 0.0,
        })
    }

    /// AR(1) state before increment `step + 1`, with current observation
    /// `Y_{step+1} = level`. `step` must be at least 1.
    pub fn ar1_state(&self, step: usize, level: f64) -> Result<ModelState> {
        if !matches!(self.spec.family, Family::Ar1Noise { .. }) || step == 0 || step >= self.spec.horizon {
            return Err(Error::contract(
                "ar1_state needs an AR(1) model and 1 <= step < horizon",
            ));
        }
        Ok(ModelState {
            step,
            partial_sum: 0.0,
            last_increment: 0.0,
            level,
        })
    }

    /// Uniforms consumed by the step taken from a state at `step`.
    pub fn draws_for_step(&self, step: usize) -> usize {
        match self.spec.family {
            Family::IidScaled { base } | Family::MultiplicativeStationary { base } => base.draws(),
            Family::Sharpness { .. } => {
                if step + 1 == self.spec.horizon {
                    2
                } else {
                    1
                }
            }
            Family::Ar1Noise { base, .. } => {
                if step == 0 {
                    2 * base.draws()
                } else {
                    base.draws()
                }
            }
        }
    }

    /// Largest draw count of any step.
    pub fn max_draws(&self) -> usize {
        match self.spec.family {
            Family::IidScaled { base } | Family::MultiplicativeStationary { base } => base.draws(),
            Family::Sharpness { .. } => 2,
            Family::Ar1Noise { base, .. } => 2 * base.draws(),
        }
    }

    /// `sum_i E Y_i²` for the AR(1) family, 0 otherwise.
    pub fn ar1_normalizer(&self) -> f64 {
        self.ar1_norm
    }

    /// Advances one step.
    ///
    /// Sharpness consumes two uniforms on its final step: the first picks the
    /// sign, the second is reserved. AR(1) consumes noise for both `eps_1`
    /// and `eps_2` on its first step.
    #[inline]
    pub fn step(&self, state: &ModelState, draws: &[f64]) -> Result<StepOutcome> {
        let k = state.step;
        if k >= self.spec.horizon {
            return Err(Error::contract("stepping past the horizon"));
        }
        let needed = self.draws_for_step(k);
        if draws.len() < needed {
            return Err(Error::DrawsExhausted {
                needed,
                got: draws.len(),
            });
        }
        let (increment, csm, level) = match self.spec.family {
            Family::IidScaled { base } => (
                base.sample(draws) * self.inv_sqrt_n,
                1.0 / self.spec.horizon as f64,
                0.0,
            ),
            Family::MultiplicativeStationary { base } => {
                let n = self.spec.horizon as f64;
                let prev = state.last_increment;
                let g2 = 0.5 + 0.5 * (n * prev * prev).min(1.0);
                let x = base.sample(draws) * sqrt(g2) * self.inv_sqrt_n;
                (x, g2 / n, 0.0)
            }
            Family::Sharpness { alpha } => {
                let n = self.spec.horizon;
                if k + 1 < n {
                    let var = 1.0 / (n - 1) as f64;
                    (std_normal_quantile(draws[0]) * sqrt(var), var, 0.0)
                } else {
                    let jump = alpha * sharpness_f(alpha, state.partial_sum);
                    let x = if draws[0] < 0.5 { -jump } else { jump };
                    (x, jump * jump, 0.0)
                }
            }
            Family::Ar1Noise { base, theta, sigma } => {
                let d = base.draws();
                let (y, eps_next) = if k == 0 {
                    (sigma * base.sample(&draws[..d]), sigma * base.sample(&draws[d..2 * d]))
                } else {
                    (state.level, sigma * base.sample(&draws[..d]))
                };
                let x = y * eps_next * self.ar1_scale;
                (x, y * y / self.ar1_norm, theta * y + eps_next)
            }
        };
        Ok(StepOutcome {
            increment,
            conditional_second_moment: csm,
            new_state: ModelState {
                step: k + 1,
                partial_sum: state.partial_sum + increment,
                last_increment: increment,
                level,
            },
        })
    }
}

/// `f(x) = 1/x` on `[sqrt(alpha)/2, ∞)`, else 0.
#[inline]
pub fn sharpness_f(alpha: f64, x: f64) -> f64 {
    if x >= 0.5 * sqrt(alpha) {
        1.0 / x
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Exact,
    Quadrature,
    Unavailable,
}

/// Closed-form pieces of `N_n`. Both values are NaN when `method` is
/// `Unavailable`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub sum_abs_2p: f64,
    pub pred_var_term: f64,
    pub method: MomentMethod,
}

const J_REL_TOL: f64 = 1e-10;

/// `J(alpha, p) = (2π)^{-1/2} ∫_{sqrt(alpha)/2}^∞ (alpha/x)^{2p} e^{-x²/2} dx`,
/// the common value of `E|X_n|^{2p}` and `E|<S>_n - 1|^p` for the sharpness
/// model.
///
/// Integrated on `(a, max(10, a + 10))` after the substitution `x = a·e^t`;
/// the Gaussian tail beyond the upper limit is bounded analytically and
/// folded into the error estimate.
pub fn sharpness_moment_integral(alpha: f64, p: f64) -> Result<QuadratureResult> {
    if !(alpha > 0.0) || !(p > 0.0) {
        return Err(Error::contract("sharpness_moment_integral needs alpha > 0 and p > 0"));
    }
    let a = 0.5 * sqrt(alpha);
    let upper = (a + 10.0).max(10.0);
    let integrand = |t: f64| {
        let x = a * exp(t);
        pow(alpha / x, 2.0 * p) * FRAC_1_SQRT_2PI * exp(-0.5 * x * x) * x
    };
    let mut r = integrate(integrand, 0.0, ln(upper / a), J_REL_TOL, 0.0)?;
    let tail_bound = pow(alpha / upper, 2.0 * p) * std_normal_cdf(-upper);
    r.abs_error += tail_bound;
    if r.abs_error > 1e-8 * r.value {
        return Err(Error::Quadrature {
            achieved: r.abs_error / r.value,
            requested: 1e-8,
        });
    }
    Ok(r)
}

/// Closed-form `sum_i E|X_i|^{2p}` and `E|<S>_n - 1|^p` where available.
pub fn closed_form_moments(spec: &ModelSpec, p: f64) -> Result<MomentReport> {
    if !(p > 1.0) {
        return Err(Error::config("p", format!("p must exceed 1, got {p}")));
    }
    let n = spec.horizon as f64;
    match spec.family {
        Family::IidScaled { base } => Ok(MomentReport {
            sum_abs_2p: pow(n, 1.0 - p) * base.abs_moment(2.0 * p)?,
            pred_var_term: 0.0,
            method: MomentMethod::Exact,
        }),
        Family::Sharpness { alpha } => {
            let j = sharpness_moment_integral(alpha, p)?.value;
            Ok(MomentReport {
                sum_abs_2p: pow(n - 1.0, 1.0 - p) * normal_abs_moment(2.0 * p) + j,
                pred_var_term: j,
                method: MomentMethod::Quadrature,
            })
        }
        // <S>_n is random for both, no closed form
        Family::MultiplicativeStationary { .. } | Family::Ar1Noise { .. } => Ok(MomentReport {
            sum_abs_2p: f64::NAN,
            pred_var_term: f64::NAN,
            method: MomentMethod::Unavailable,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Substream;
    use alloc::vec;

    fn iid(base: BaseDistribution, n: usize) -> Model {
        Model::new(ModelSpec::new(Family::IidScaled { base }, n)).unwrap()
    }

    #[test]
    fn rademacher_increments_are_half() {
        let m = iid(BaseDistribution::Rademacher, 4);
        let mut st = m.initial_state();
        for k in 0..4 {
            let u = [(k as f64 + 0.3) / 4.0];
            let out = m.step(&st, &u).unwrap();
            assert_eq!(out.increment.abs(), 0.5);
            assert_eq!(out.conditional_second_moment, 0.25);
            st = out.new_state;
        }
        assert!(m.step(&st, &[0.5]).is_err());
    }

    #[test]
    fn normal_increments_have_variance_one_over_n() {
        let m = iid(BaseDistribution::StandardNormal, 100);
        let out = m.step(&m.initial_state(), &[0.9]).unwrap();
        assert_eq!(out.conditional_second_moment, 0.01);
    }

    #[test]
    fn two_point_is_normalized() {
        let tp = TwoPoint::new(3.0, 0.2).unwrap();
        let (a, b) = tp.atoms();
        let mean = 0.2 * a + 0.8 * b;
        let var = 0.2 * a * a + 0.8 * b * b;
        assert!(mean.abs() < 1e-15);
        assert!((var - 1.0).abs() < 1e-15);
        assert!(a > 0.0 && b < 0.0);
        assert!(TwoPoint::new(-1.0, 0.5).unwrap().atoms().0 < 0.0);
    }

    #[test]
    fn invalid_parameters_name_their_field() {
        let field = |e: Error| match e {
            Error::Config { field, .. } => field,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(field(TwoPoint::new(1.0, 1.0).unwrap_err()), "two_point_q");
        assert_eq!(field(TwoPoint::new(1.0, 0.0).unwrap_err()), "two_point_q");
        assert_eq!(field(TwoPoint::new(0.0, 0.5).unwrap_err()), "two_point_a");
        let sharp = |alpha, n| Model::new(ModelSpec::new(Family::Sharpness { alpha }, n));
        assert_eq!(field(sharp(0.0, 10).unwrap_err()), "alpha");
        assert_eq!(field(sharp(1.5, 10).unwrap_err()), "alpha");
        assert_eq!(field(sharp(0.5, 1).unwrap_err()), "horizon");
        let ar = |theta, sigma| {
            Model::new(ModelSpec::new(
                Family::Ar1Noise {
                    base: BaseDistribution::StandardNormal,
                    theta,
                    sigma,
                },
                10,
            ))
        };
        assert_eq!(field(ar(1.0, 1.0).unwrap_err()), "theta");
        assert_eq!(field(ar(0.5, 0.0).unwrap_err()), "sigma");
        let st = Model::new(ModelSpec::new(
            Family::IidScaled {
                base: BaseDistribution::StudentLike { nu: 2 },
            },
            10,
        ));
        assert_eq!(field(st.unwrap_err()), "student_nu");
        assert_eq!(
            field(Model::new(ModelSpec::new(Family::Sharpness { alpha: 0.5 }, 0)).unwrap_err()),
            "horizon"
        );
    }

    #[test]
    fn sharpness_two_step_model() {
        let m = Model::new(ModelSpec::new(Family::Sharpness { alpha: 1.0 }, 2)).unwrap();
        // first increment is N(0, 1)
        let out = m.step(&m.initial_state(), &[0.975]).unwrap();
        assert!((out.increment - 1.959963984540054).abs() < 1e-14);
        assert_eq!(out.conditional_second_moment, 1.0);
        assert_eq!(sharpness_f(1.0, 0.5), 2.0);
        assert_eq!(sharpness_f(1.0, 0.4999), 0.0);
        assert_eq!(sharpness_f(1.0, 2.0), 0.5);
    }

    #[test]
    fn sharpness_final_step() {
        let m = Model::new(ModelSpec::new(Family::Sharpness { alpha: 0.01 }, 3)).unwrap();
        let st = m.state_after(&[0.1, 0.2]).unwrap();
        assert_eq!(m.draws_for_step(2), 2);
        assert!(matches!(
            m.step(&st, &[0.1]),
            Err(Error::DrawsExhausted { needed: 2, got: 1 })
        ));
        let down = m.step(&st, &[0.1, 0.7]).unwrap();
        let up = m.step(&st, &[0.9, 0.7]).unwrap();
        let jump = 0.01 * sharpness_f(0.01, st.partial_sum());
        assert_eq!(down.increment, -jump);
        assert_eq!(up.increment, jump);
        assert!((up.conditional_second_moment - 1.1111111111111112e-3).abs() < 1e-15);

        let st = m.state_after(&[0.005, 0.005]).unwrap();
        let out = m.step(&st, &[0.9, 0.1]).unwrap();
        assert_eq!(out.increment, 0.0);
        assert_eq!(out.conditional_second_moment, 0.0);

        // boundary belongs to the support
        let st = m.state_after(&[0.05]).unwrap();
        let st = ModelState { step: 2, ..st };
        let out = m.step(&st, &[0.9, 0.1]).unwrap();
        assert!((out.increment - 0.01 / 0.05).abs() < 1e-15);
    }

    #[test]
    fn sharpness_prefix_has_unit_total_variance() {
        let n = 17;
        let m = Model::new(ModelSpec::new(Family::Sharpness { alpha: 0.04 }, n)).unwrap();
        let s = Substream::new(3, 0);
        let mut st = m.initial_state();
        let mut pv = 0.0;
        let mut buf = [0.0; 2];
        for k in 0..n - 1 {
            s.fill(k as u32, &mut buf);
            let out = m.step(&st, &buf).unwrap();
            pv += out.conditional_second_moment;
            st = out.new_state;
        }
        assert!((pv - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stationary_conditional_moment_follows_g() {
        let n = 50;
        let m = Model::new(ModelSpec::new(
            Family::MultiplicativeStationary {
                base: BaseDistribution::StandardNormal,
            },
            n,
        ))
        .unwrap();
        let first = m.step(&m.initial_state(), &[0.8]).unwrap();
        assert!((first.conditional_second_moment - 0.5 / 50.0).abs() < 1e-17);
        let st = m.state_after(&[1.0]).unwrap();
        assert_eq!(m.step(&st, &[0.8]).unwrap().conditional_second_moment, 1.0 / 50.0);
        let st = m.state_after(&[0.1]).unwrap();
        let g2 = 0.5 + 0.5 * 50.0 * 0.01;
        assert!((m.step(&st, &[0.8]).unwrap().conditional_second_moment - g2 / 50.0).abs() < 1e-17);
    }

    #[test]
    fn moments_for_iid_families() {
        let spec = ModelSpec::new(
            Family::IidScaled {
                base: BaseDistribution::Rademacher,
            },
            4,
        );
        let r = closed_form_moments(&spec, 2.0).unwrap();
        assert!((r.sum_abs_2p - 0.25).abs() < 1e-15);
        assert_eq!(r.pred_var_term, 0.0);
        assert_eq!(r.method, MomentMethod::Exact);

        let spec = ModelSpec::new(
            Family::IidScaled {
                base: BaseDistribution::StandardNormal,
            },
            1,
        );
        let r = closed_form_moments(&spec, 1.0 + 1e-12).unwrap();
        assert!((r.sum_abs_2p - 1.0).abs() < 1e-10);
        assert!(closed_form_moments(&spec, 1.0).is_err());

        let spec = ModelSpec::new(
            Family::IidScaled {
                base: BaseDistribution::StudentLike { nu: 4 },
            },
            8,
        );
        assert!(matches!(
            closed_form_moments(&spec, 2.0),
            Err(Error::InfiniteMoment { .. })
        ));
        // E t_5^4 scaled to unit variance: 3(nu-2)/(nu-4) = 9
        let five = BaseDistribution::StudentLike { nu: 5 };
        assert!((five.abs_moment(4.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((five.abs_moment(2.0).unwrap() - 1.0).abs() < 1e-13);

        let stat = ModelSpec::new(
            Family::MultiplicativeStationary {
                base: BaseDistribution::StandardNormal,
            },
            8,
        );
        assert_eq!(
            closed_form_moments(&stat, 2.0).unwrap().method,
            MomentMethod::Unavailable
        );
    }

    #[test]
    fn sharpness_moments_use_quadrature() {
        let spec = ModelSpec::new(Family::Sharpness { alpha: 0.01 }, 11);
        let r = closed_form_moments(&spec, 2.0).unwrap();
        let j = sharpness_moment_integral(0.01, 2.0).unwrap().value;
        assert_eq!(r.method, MomentMethod::Quadrature);
        assert_eq!(r.pred_var_term, j);
        assert!((r.sum_abs_2p - (3.0 / 10.0 + j)).abs() < 1e-14);
    }

    #[test]
    fn stepping_is_deterministic() {
        let m = Model::new(ModelSpec::new(
            Family::IidScaled {
                base: BaseDistribution::StudentLike { nu: 5 },
            },
            9,
        ))
        .unwrap();
        let u = vec![0.11, 0.52, 0.73, 0.94, 0.35, 0.66];
        let a = m.step(&m.initial_state(), &u).unwrap();
        let b = m.step(&m.initial_state(), &u).unwrap();
        assert_eq!(a.increment.to_bits(), b.increment.to_bits());
        assert_eq!(a, b);
    }
}
