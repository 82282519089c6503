//! Berry–Esseen bound evaluation, ratio diagnostics and rate fits.

use alloc::vec::Vec;

use crate::empirics::{dkw_band, kolmogorov_distance, std_normal_cdf, EmpiricalSample, NnEstimate};
use crate::error::{Error, Result};
use crate::math::{abs, ln, pow};
use crate::path::Statistic;

/// `N_n^{1/(2p+1)}`, the bound without its constant.
pub fn berry_esseen_core(nn_total: f64, p: f64) -> f64 {
    debug_assert!(nn_total >= 0.0 && p > 1.0);
    if nn_total == 0.0 {
        return 0.0;
    }
    pow(nn_total, 1.0 / (2.0 * p + 1.0))
}

/// One experiment cell: observed distance, its DKW band, and the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEvaluation {
    pub n: usize,
    pub p: f64,
    pub alpha: Option<f64>,
    pub statistic: Statistic,
    pub delta_hat: f64,
    pub delta_band: f64,
    pub nn: NnEstimate,
    pub bound_core: f64,
    /// `delta_hat / bound_core`.
    pub ratio: f64,
    /// `max(0, delta_hat - band) / bound_core`.
    pub ratio_lo: f64,
    /// `(delta_hat + band) / bound_core`.
    pub ratio_hi: f64,
}

impl BoundEvaluation {
    /// Measures `sample` against Φ and pairs it with `nn`.
    pub fn evaluate(
        n: usize,
        alpha: Option<f64>,
        statistic: Statistic,
        sample: &EmpiricalSample,
        nn: NnEstimate,
        delta: f64,
    ) -> Self {
        let delta_hat = kolmogorov_distance(sample, &std_normal_cdf);
        let delta_band = dkw_band(sample.len(), delta);
        let bound_core = berry_esseen_core(nn.total, nn.p);
        Self {
            n,
            p: nn.p,
            alpha,
            statistic,
            delta_hat,
            delta_band,
            nn,
            bound_core,
            ratio: delta_hat / bound_core,
            ratio_lo: (delta_hat - delta_band).max(0.0) / bound_core,
            ratio_hi: (delta_hat + delta_band) / bound_core,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `max_ratio / min_ratio`.
    pub spread: f64,
    /// Smallest spread consistent with every band:
    /// `max(ratio_lo) / min(ratio_hi)`, floored at 1.
    pub widened_spread: f64,
}

/// Summarizes `delta_hat / bound_core` across a grid.
pub fn ratio_series(evals: &[BoundEvaluation]) -> Result<RatioReport> {
    if evals.len() < 2 {
        return Err(Error::contract("ratio series needs at least 2 grid points"));
    }
    let first = &evals[0];
    if evals.iter().any(|e| e.p != first.p) {
        return Err(Error::contract("ratio series mixes values of p"));
    }
    if evals.iter().any(|e| e.statistic != first.statistic) {
        return Err(Error::contract("ratio series mixes statistics"));
    }
    let fold =
        |f: fn(&BoundEvaluation) -> f64, pick: fn(f64, f64) -> f64, init: f64| evals.iter().map(f).fold(init, pick);
    let max_ratio = fold(|e| e.ratio, f64::max, f64::NEG_INFINITY);
    let min_ratio = fold(|e| e.ratio, f64::min, f64::INFINITY);
    let max_lo = fold(|e| e.ratio_lo, f64::max, f64::NEG_INFINITY);
    let min_hi = fold(|e| e.ratio_hi, f64::min, f64::INFINITY);
    Ok(RatioReport {
        max_ratio,
        min_ratio,
        spread: max_ratio / min_ratio,
        widened_spread: (max_lo / min_hi).max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual on the log scale.
    pub residual_max: f64,
}

/// Ordinary least squares of `ln delta` on `ln n`.
pub fn fit_rate(ns: &[f64], deltas: &[f64]) -> Result<RateFit> {
    if ns.len() != deltas.len() {
        return Err(Error::contract("fit_rate: ns and deltas differ in length"));
    }
    if ns.len() < 3 {
        return Err(Error::contract("fit_rate needs at least 3 points"));
    }
    if ns.iter().chain(deltas).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::contract("fit_rate needs positive finite inputs"));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| ln(n)).collect();
    let ys: Vec<f64> = deltas.iter().map(|&d| ln(d)).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::contract("fit_rate needs at least two distinct n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_max = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| abs(y - (intercept + slope * x)))
        .fold(0.0, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        residual_max,
    })
}
