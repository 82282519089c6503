use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, pow, sqrt};
use crate::models::{closed_form_moments, Model, MomentMethod};
use crate::rng::{derive_seed, Substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NnMethod {
    Exact,
    Quadrature,
    MonteCarloPlugIn,
}

impl NnMethod {
    pub fn name(&self) -> &'static str {
        match self {
            NnMethod::Exact => "exact",
            NnMethod::Quadrature => "quadrature",
            NnMethod::MonteCarloPlugIn => "monte_carlo",
        }
    }
}

/// `N_n = sum_i E|X_i|^{2p} + E|<S>_n - 1|^p` and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnEstimate {
    pub sum_abs_2p: f64,
    pub pred_var_term: f64,
    pub total: f64,
    pub p: f64,
    pub method: NnMethod,
    /// Standard error of `total`; 0 for deterministic methods.
    pub mc_std_error: f64,
    /// Standard errors of the two terms separately.
    pub term_std_errors: (f64, f64),
}

impl NnEstimate {
    /// Averages per-path plug-in terms `(sum_i |X_i|^{2p}, |<S>_n - 1|^p)`.
    pub fn from_plug_in(p: f64, terms: &[(f64, f64)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::config("plug_in_m", "plug-in needs at least one path"));
        }
        let m = terms.len() as f64;
        let mean = |f: &dyn Fn(&(f64, f64)) -> f64| terms.iter().map(f).sum::<f64>() / m;
        let a = mean(&|t| t.0);
        let b = mean(&|t| t.1);
        let tot = a + b;
        let se = |f: &dyn Fn(&(f64, f64)) -> f64, mu: f64| {
            if terms.len() < 2 {
                return 0.0;
            }
            let ss: f64 = terms.iter().map(|t| (f(t) - mu) * (f(t) - mu)).sum();
            sqrt(ss / (m - 1.0) / m)
        };
        Ok(Self {
            sum_abs_2p: a,
            pred_var_term: b,
            total: tot,
            p,
            method: NnMethod::MonteCarloPlugIn,
            mc_std_error: se(&|t| t.0 + t.1, tot),
            term_std_errors: (se(&|t| t.0, a), se(&|t| t.1, b)),
        })
    }
}

/// Seed of the plug-in paths; kept apart from the statistic's own stream.
pub fn plug_in_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, "nn-plug-in")
}

/// `(sum_i |X_i|^{2p}, |<S>_n - 1|^p)` on one simulated path.
pub fn plug_in_terms(model: &Model, p: f64, stream: &Substream, draws: &mut Vec<f64>) -> Result<(f64, f64)> {
    let mut sum_abs = 0.0;
    let mut pv = 0.0;
    draws.resize(model.max_draws(), 0.0);
    let mut state = model.initial_state();
    for k in 0..model.horizon() {
        let need = model.draws_for_step(k);
        stream.fill(k as u32, &mut draws[..need]);
        let out = model.step(&state, &draws[..need])?;
        sum_abs += pow(abs(out.increment), 2.0 * p);
        pv += out.conditional_second_moment;
        state = out.new_state;
    }
    Ok((sum_abs, pow(abs(pv - 1.0), p)))
}

/// Monte Carlo plug-in estimate from `m_plug` paths (sequential).
pub fn estimate_nn_plug_in(model: &Model, p: f64, m_plug: usize, master_seed: u64) -> Result<NnEstimate> {
    check_p(p)?;
    let seed = plug_in_seed(master_seed);
    let mut draws = Vec::new();
    let terms = (0..m_plug as u64)
        .map(|r| plug_in_terms(model, p, &Substream::new(seed, r), &mut draws))
        .collect::<Result<Vec<_>>>()?;
    NnEstimate::from_plug_in(p, &terms)
}

/// Closed form when the model has one, otherwise `None`.
pub fn estimate_nn_closed_form(model: &Model, p: f64) -> Result<Option<NnEstimate>> {
    check_p(p)?;
    let r = closed_form_moments(model.spec(), p)?;
    let method = match r.method {
        MomentMethod::Exact => NnMethod::Exact,
        MomentMethod::Quadrature => NnMethod::Quadrature,
        MomentMethod::Unavailable => return Ok(None),
    };
    Ok(Some(NnEstimate {
        sum_abs_2p: r.sum_abs_2p,
        pred_var_term: r.pred_var_term,
        total: r.sum_abs_2p + r.pred_var_term,
        p,
        method,
        mc_std_error: 0.0,
        term_std_errors: (0.0, 0.0),
    }))
}

/// `N_n` for the model's horizon: closed form where available, Monte Carlo
/// plug-in over `m_plug` paths otherwise.
pub fn estimate_nn(model: &Model, p: f64, m_plug: usize, master_seed: u64) -> Result<NnEstimate> {
    match estimate_nn_closed_form(model, p)? {
        Some(est) => Ok(est),
        None => estimate_nn_plug_in(model, p, m_plug, master_seed),
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::config("p", alloc::format!("p must exceed 1, got {p}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BaseDistribution, Family, ModelSpec};

    fn model(family: Family, n: usize) -> Model {
        Model::new(ModelSpec::new(family, n)).unwrap()
    }

    #[test]
    fn rademacher_exact() {
        let m = model(
            Family::IidScaled {
                base: BaseDistribution::Rademacher,
            },
            4,
        );
        let est = estimate_nn(&m, 2.0, 10, 0).unwrap();
        assert_eq!(est.method, NnMethod::Exact);
        assert!((est.total - 0.25).abs() < 1e-15);
        assert_eq!(est.pred_var_term, 0.0);
        assert_eq!(est.mc_std_error, 0.0);
        // plug-in agrees exactly: every path has sum |X|^4 = 4/16
        let plug = estimate_nn_plug_in(&m, 2.0, 50, 0).unwrap();
        assert!((plug.total - 0.25).abs() < 1e-15);
        assert!(plug.mc_std_error < 1e-15);
    }

    #[test]
    fn iid_plug_in_has_no_variance_term() {
        let m = model(
            Family::IidScaled {
                base: BaseDistribution::StandardNormal,
            },
            16,
        );
        let plug = estimate_nn_plug_in(&m, 1.5, 200, 4).unwrap();
        assert!(plug.pred_var_term < 1e-40);
    }

    #[test]
    fn stationary_falls_back_to_plug_in() {
        let m = model(
            Family::MultiplicativeStationary {
                base: BaseDistribution::StandardNormal,
            },
            16,
        );
        let est = estimate_nn(&m, 1.5, 500, 4).unwrap();
        assert_eq!(est.method, NnMethod::MonteCarloPlugIn);
        assert!(est.mc_std_error > 0.0);
        assert!((est.total - est.sum_abs_2p - est.pred_var_term).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_p() {
        let m = model(
            Family::IidScaled {
                base: BaseDistribution::Rademacher,
            },
            4,
        );
        assert!(estimate_nn(&m, 1.0, 10, 0).unwrap_err().is_config());
        assert!(NnEstimate::from_plug_in(2.0, &[]).is_err());
    }
}
