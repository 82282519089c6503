//! Student's t-statistic and the AR(1) least-squares estimator.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, pow, sqrt};
use crate::models::BaseDistribution;
use crate::path::MartingalePath;
use crate::rng::Substream;

/// `sqrt(n) · mean / sd` with the `n - 1` variance denominator.
pub fn student_t(observations: &[f64]) -> Result<f64> {
    let n = observations.len();
    if n < 2 {
        return Err(Error::contract("student_t needs at least 2 observations"));
    }
    let nf = n as f64;
    let mean = observations.iter().sum::<f64>() / nf;
    let ss: f64 = observations.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(ss > 0.0) {
        return Err(Error::Degenerate("sample variance is zero"));
    }
    Ok(sqrt(nf) * mean / sqrt(ss / (nf - 1.0)))
}

/// `S_n / sqrt([S]_n)` of raw observations.
pub fn self_normalized_sum(observations: &[f64]) -> Result<f64> {
    let s: f64 = observations.iter().sum();
    let q: f64 = observations.iter().map(|x| x * x).sum();
    if !(q > 0.0) {
        return Err(Error::Degenerate("[S]_n = 0"));
    }
    Ok(s / sqrt(q))
}

/// Maps the self-normalized sum to Student's t: `W·sqrt((n-1)/(n-W²))`.
pub fn t_from_self_normalized(w: f64, n: usize) -> f64 {
    let n = n as f64;
    w * sqrt((n - 1.0) / (n - w * w))
}

/// Whether `{T_n > x}` and `{W > x·sqrt(n/(n+x²-1))}` agree on this sample.
///
/// Defined for `x >= 0` only; the negative side follows by sign symmetry.
pub fn t_identity_check(observations: &[f64], x: f64) -> Result<bool> {
    if !(x >= 0.0) {
        return Err(Error::contract("t_identity_check needs x >= 0"));
    }
    let t = student_t(observations)?;
    let w = self_normalized_sum(observations)?;
    let n = observations.len() as f64;
    // n + x² - 1 > 0 for n >= 2
    let threshold = x * sqrt(n / (n + x * x - 1.0));
    Ok((t > x) == (w > threshold))
}

/// An AR(1) trajectory `Y_{k+1} = theta·Y_k + eps_{k+1}` from `Y_0 = 0`.
///
/// Holds `Y_0..=Y_{n+1}` and `eps_1..=eps_{n+1}` so the least-squares
/// estimator over `i = 1..=n` can use `Y_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Path {
    observations: Vec<f64>,
    noise: Vec<f64>,
    theta: f64,
    sigma: f64,
}

impl Ar1Path {
    /// Runs the recursion over `noise = (eps_1, ..., eps_{n+1})`.
    pub fn from_noise(theta: f64, sigma: f64, noise: Vec<f64>) -> Result<Self> {
        if noise.len() < 2 {
            return Err(Error::contract("AR(1) path needs at least two noise terms"));
        }
        if !(sigma > 0.0) {
            return Err(Error::config("sigma", "must be positive"));
        }
        let mut observations = Vec::with_capacity(noise.len() + 1);
        observations.push(0.0);
        let mut y = 0.0;
        for &e in &noise {
            y = theta * y + e;
            observations.push(y);
        }
        Ok(Self {
            observations,
            noise,
            theta,
            sigma,
        })
    }

    /// Number of regression terms `n`.
    pub fn n(&self) -> usize {
        self.noise.len() - 1
    }

    /// `Y_0, ..., Y_{n+1}`.
    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    /// `eps_1, ..., eps_{n+1}`.
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `sum_{i=1}^n Y_i²`.
    pub fn sum_sq(&self) -> f64 {
        self.observations[1..=self.n()].iter().map(|y| y * y).sum()
    }
}

/// Simulates `n` regression terms with noise `sigma · base`.
///
/// Noise layout on the substream: step 0 carries `eps_1` then `eps_2`,
/// step `k >= 1` carries `eps_{k+2}`. This matches the AR(1) model's
/// stepping, so both see the same noise for the same stream.
pub fn ar1_simulate(theta: f64, sigma: f64, base: BaseDistribution, n: usize, stream: &Substream) -> Result<Ar1Path> {
    if n == 0 {
        return Err(Error::config("horizon", "AR(1) needs n >= 1"));
    }
    let d = base.draws();
    let mut buf = alloc::vec![0.0; 2 * d];
    let mut noise = Vec::with_capacity(n + 1);
    stream.fill(0, &mut buf);
    noise.push(sigma * base.sample(&buf[..d]));
    noise.push(sigma * base.sample(&buf[d..]));
    for k in 1..n {
        stream.fill(k as u32, &mut buf[..d]);
        noise.push(sigma * base.sample(&buf[..d]));
    }
    Ar1Path::from_noise(theta, sigma, noise)
}

/// `sum Y_i Y_{i+1} / sum Y_i²` over `i = 1..=n`.
pub fn ls_estimator(path: &Ar1Path) -> Result<f64> {
    let y = path.observations();
    let n = path.n();
    let den = path.sum_sq();
    if !(den > 0.0) {
        return Err(Error::Degenerate("sum of squared observations is zero"));
    }
    let num: f64 = (1..=n).map(|i| y[i] * y[i + 1]).sum();
    Ok(num / den)
}

/// `(theta_hat - theta) · sqrt(sum Y_i²) / sigma` with the configured theta.
pub fn ar1_self_normalized(path: &Ar1Path) -> Result<f64> {
    let theta_hat = ls_estimator(path)?;
    Ok((theta_hat - path.theta) * sqrt(path.sum_sq()) / path.sigma)
}

/// The martingale `X_i = Y_i eps_{i+1} / (sigma sqrt(B))` with conditional
/// second moments `Y_i² / B`, where `B = sum_{i=1}^n E Y_i²`.
pub fn embedded_martingale(path: &Ar1Path) -> Result<MartingalePath> {
    let n = path.n();
    let b = ar1_cumulative_second_moment(path.theta, path.sigma, n);
    let scale = 1.0 / (path.sigma * sqrt(b));
    let y = path.observations();
    let eps = path.noise();
    // eps_{i+1} sits at noise index i
    let inc: Vec<f64> = (1..=n).map(|i| y[i] * eps[i] * scale).collect();
    let csm: Vec<f64> = (1..=n).map(|i| y[i] * y[i] / b).collect();
    MartingalePath::from_parts(inc, &csm)
}

/// `E Y_n² = sigma² (1 - theta^{2n}) / (1 - theta²)`; summed directly when
/// `|theta| >= 1`.
pub fn ar1_second_moment(theta: f64, sigma: f64, n: usize) -> f64 {
    let t2 = theta * theta;
    if abs(theta) < 1.0 {
        sigma * sigma * (1.0 - pow(t2, n as f64)) / (1.0 - t2)
    } else {
        let mut acc = 0.0;
        let mut w = 1.0;
        for _ in 0..n {
            acc += w;
            w *= t2;
        }
        sigma * sigma * acc
    }
}

/// `sum_{i=1}^n E Y_i²`.
pub fn ar1_cumulative_second_moment(theta: f64, sigma: f64, n: usize) -> f64 {
    let t2 = theta * theta;
    if abs(theta) < 1.0 {
        let nf = n as f64;
        sigma * sigma / (1.0 - t2) * (nf - t2 * (1.0 - pow(t2, nf)) / (1.0 - t2))
    } else {
        (1..=n).map(|i| ar1_second_moment(theta, sigma, i)).sum()
    }
}
