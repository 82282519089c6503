//! Numeric kernels against high-precision reference tables.

use selfnorm_core::empirics::normal::std_normal_quantile;
use selfnorm_core::empirics::normal::{erfc, std_normal_cdf};
use selfnorm_core::empirics::{kolmogorov_distance, EmpiricalSample, Provenance};
use selfnorm_core::models::sharpness_moment_integral;
use selfnorm_core::Statistic;

fn table(name: &str) -> Vec<Vec<f64>> {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{path}: {e}"))
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn phi_matches_fixture_table() {
    let rows = table("phi_table.tsv");
    assert_eq!(rows.len(), 200);
    let mut worst = 0.0f64;
    for r in &rows {
        let err = (std_normal_cdf(r[0]) - r[1]).abs();
        worst = worst.max(err);
        // left tail stays relatively accurate too
        if r[0] < -1.0 {
            assert!(
                err <= 1e-13 * r[1],
                "x = {}: {} vs {}",
                r[0],
                std_normal_cdf(r[0]),
                r[1]
            );
        }
    }
    assert!(worst <= 1e-15, "worst absolute error {worst:e}");
}

#[test]
fn phi_symmetry_on_fixture_abscissae() {
    for r in table("phi_table.tsv") {
        let x = r[0];
        assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 2e-16);
        assert!((erfc(x) + erfc(-x) - 2.0).abs() <= 4e-16);
    }
}

#[test]
fn sharpness_integral_matches_incomplete_gamma() {
    for r in table("sharpness_j.tsv") {
        let (alpha, p, want) = (r[0], r[1], r[2]);
        let got = sharpness_moment_integral(alpha, p).unwrap();
        let rel = (got.value - want).abs() / want;
        assert!(
            rel <= 1e-9,
            "alpha={alpha} p={p}: {} vs {want} (rel {rel:e})",
            got.value
        );
        assert!(got.abs_error <= 1e-8 * got.value);
    }
}

#[test]
fn sharpness_integral_order_in_alpha() {
    // J(alpha, p) / alpha^{p+1/2} -> 2^{2p-1} / ((2p-1) sqrt(2 pi))
    for p in [1.25, 1.5, 2.0] {
        let limit = 2f64.powf(2.0 * p - 1.0) / ((2.0 * p - 1.0) * (2.0 * std::f64::consts::PI).sqrt());
        let scaled: Vec<f64> = [1e-4, 1e-6, 1e-8]
            .iter()
            .map(|&a: &f64| sharpness_moment_integral(a, p).unwrap().value / a.powf(p + 0.5))
            .collect();
        let (lo, hi) = scaled
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi / lo - 1.0 < 0.02, "p={p}: {scaled:?}");
        assert!(
            (scaled[2] / limit - 1.0).abs() < 1e-3,
            "p={p}: {} vs {limit}",
            scaled[2]
        );
    }
}

fn provenance() -> Provenance {
    Provenance {
        model_fingerprint: 0,
        statistic: Statistic::SelfNormalized,
        master_seed: 0,
    }
}

#[test]
fn quantile_construction_is_half_step() {
    for m in [1usize, 10, 1000] {
        let values = (1..=m)
            .map(|i| std_normal_quantile((i as f64 - 0.5) / m as f64))
            .collect();
        let s = EmpiricalSample::new(values, 0, provenance()).unwrap();
        let d = kolmogorov_distance(&s, &std_normal_cdf);
        assert!((d - 0.5 / m as f64).abs() <= 1e-12, "m={m}: {d}");
    }
}
