use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, ln, pow, sqrt};
use crate::path::Statistic;

/// Where a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub model_fingerprint: u64,
    pub statistic: Statistic,
    pub master_seed: u64,
}

/// Sorted replicate values of a scalar statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    degenerate_count: usize,
    provenance: Provenance,
}

impl EmpiricalSample {
    /// Sorts `values`; fails on an empty or non-finite sample.
    pub fn new(mut values: Vec<f64>, degenerate_count: usize, provenance: Provenance) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::contract("empirical sample needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("empirical sample contains a non-finite value"));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            values,
            degenerate_count,
            provenance,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate_count
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Right-continuous empirical CDF at `x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Empirical `q`-quantile (lower order statistic).
    pub fn quantile(&self, q: f64) -> f64 {
        let m = self.values.len();
        let idx = (libm::ceil(q * m as f64) as usize).clamp(1, m) - 1;
        self.values[idx]
    }
}

/// A reference distribution function.
///
/// Plain closures are taken as continuous; discontinuous references
/// override [`Cdf::left_limit`].
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    /// `F(x-)`.
    fn left_limit(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

impl Cdf for EmpiricalSample {
    fn cdf(&self, x: f64) -> f64 {
        self.ecdf(x)
    }

    fn left_limit(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v < x) as f64 / self.values.len() as f64
    }
}

/// `sup_x |F_m(x) - F(x)|` for the right-continuous empirical CDF `F_m`.
///
/// For continuous `F` this is the maximum over order statistics `w_(i)` of
/// `max(|i/m - F(w_(i))|, |(i-1)/m - F(w_(i))|)`; ties are grouped so the
/// value is exact for discontinuous references too.
pub fn kolmogorov_distance<C: Cdf + ?Sized>(sample: &EmpiricalSample, reference: &C) -> f64 {
    let v = sample.values();
    let m = v.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let w = v[i];
        let mut j = i + 1;
        while j < v.len() && v[j] == w {
            j += 1;
        }
        let below = i as f64 / m;
        let above = j as f64 / m;
        sup = sup
            .max(abs(below - reference.left_limit(w)))
            .max(abs(above - reference.cdf(w)));
        i = j;
    }
    sup
}

/// DKW half-width `sqrt(ln(2/delta) / (2m))`.
pub fn dkw_band(m: usize, delta: f64) -> f64 {
    sqrt(ln(2.0 / delta) / (2.0 * m as f64))
}

/// Mean of `|value|^r`.
pub fn moment_abs(sample: &EmpiricalSample, r: f64) -> f64 {
    sample.values().iter().map(|&v| pow(abs(v), r)).sum::<f64>() / sample.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirics::normal::{std_normal_cdf, std_normal_quantile};
    use alloc::vec;

    const PROV: Provenance = Provenance {
        model_fingerprint: 1,
        statistic: Statistic::SelfNormalized,
        master_seed: 2,
    };

    fn sample(v: Vec<f64>) -> EmpiricalSample {
        EmpiricalSample::new(v, 0, PROV).unwrap()
    }

    #[test]
    fn construction_sorts_and_validates() {
        let s = sample(vec![3.0, -1.0, 2.0]);
        assert_eq!(s.values(), &[-1.0, 2.0, 3.0]);
        assert!(EmpiricalSample::new(vec![], 0, PROV).is_err());
        assert!(EmpiricalSample::new(vec![f64::NAN], 0, PROV).is_err());
        assert_eq!(s.ecdf(2.0), 2.0 / 3.0);
        assert_eq!(s.ecdf(-5.0), 0.0);
        assert_eq!(s.quantile(0.5), 2.0);
    }

    #[test]
    fn kolmogorov_single_point() {
        assert_eq!(kolmogorov_distance(&sample(vec![0.0]), &std_normal_cdf), 0.5);
    }

    #[test]
    fn kolmogorov_quantile_construction() {
        for m in [1usize, 10, 1000] {
            let v = (1..=m)
                .map(|i| std_normal_quantile((i as f64 - 0.5) / m as f64))
                .collect();
            let d = kolmogorov_distance(&sample(v), &std_normal_cdf);
            assert!((d - 0.5 / m as f64).abs() < 1e-12, "m={m} d={d}");
        }
    }

    #[test]
    fn kolmogorov_against_own_ecdf_is_zero() {
        let s = sample(vec![0.3, -1.2, 0.3, 2.0, 5.5]);
        assert_eq!(kolmogorov_distance(&s, &s), 0.0);
    }

    #[test]
    fn kolmogorov_handles_ties() {
        // F_m jumps from 0 to 1 at 0 regardless of multiplicity
        let d = kolmogorov_distance(&sample(vec![0.0; 7]), &std_normal_cdf);
        assert_eq!(d, 0.5);
    }

    #[test]
    fn dkw_values() {
        let two_e2 = 2.0 * libm::exp(-2.0);
        assert!((dkw_band(1, two_e2) - 1.0).abs() < 1e-15);
        assert!((dkw_band(800, 0.01) - 0.057_545_185_325).abs() < 1e-12);
        assert!(dkw_band(10_000, 0.01) < dkw_band(100, 0.01));
    }

    #[test]
    fn absolute_moments() {
        assert_eq!(moment_abs(&sample(vec![-1.0, 1.0]), 3.0), 1.0);
        assert_eq!(moment_abs(&sample(vec![0.0]), 2.5), 0.0);
        assert_eq!(moment_abs(&sample(vec![1.0, 2.0]), 2.0), 2.5);
    }
}
