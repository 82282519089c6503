//! Fast invariant suite behind the `selftest` subcommand.

use selfnorm_core::applications::{
    ar1_self_normalized, ar1_simulate, embedded_martingale, student_t, t_identity_check,
};
use selfnorm_core::empirics::normal::std_normal_quantile;
use selfnorm_core::empirics::{dkw_band, kolmogorov_distance, std_normal_cdf, EmpiricalSample, Provenance};
use selfnorm_core::path::{replicate_statistic, variance_normalized};
use selfnorm_core::rng::philox4x32;
use selfnorm_core::{berry_esseen_core, BaseDistribution, Family, Model, ModelSpec, Statistic, Substream};

use crate::parallel::Runner;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn run(runner: &Runner) -> Vec<Check> {
    let mut out = Vec::new();

    let x = philox4x32([0; 4], [0; 2]);
    out.push(check(
        "philox known answer",
        x == [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8],
        format!("{x:08x?}"),
    ));

    let phi = std_normal_cdf(0.1);
    out.push(check(
        "normal cdf",
        (phi - 0.539_827_837_277_029).abs() < 1e-15 && std_normal_cdf(0.0) == 0.5,
        format!("Phi(0.1) = {phi:?}"),
    ));

    let prov = Provenance {
        model_fingerprint: 0,
        statistic: Statistic::SelfNormalized,
        master_seed: 0,
    };
    let m = 1000;
    let s = EmpiricalSample::new(
        (1..=m)
            .map(|i| std_normal_quantile((i as f64 - 0.5) / m as f64))
            .collect(),
        0,
        prov,
    )
    .expect("finite quantiles");
    let d = kolmogorov_distance(&s, &std_normal_cdf);
    out.push(check(
        "kolmogorov half step",
        (d - 0.0005).abs() <= 1e-12,
        format!("{d:?}"),
    ));

    let band = dkw_band(800, 0.01);
    out.push(check(
        "dkw band",
        (band - 0.057_545_185_325).abs() < 1e-11,
        format!("{band:?}"),
    ));

    let core = berry_esseen_core(0.25, 2.0);
    out.push(check(
        "bound core",
        (core - 0.757_858_283_255_199).abs() < 1e-14,
        format!("{core:?}"),
    ));

    let spec = ModelSpec::new(
        Family::IidScaled {
            base: BaseDistribution::Rademacher,
        },
        4,
    );
    let nn = selfnorm_core::empirics::estimate_nn(&Model::new(spec).expect("valid"), 2.0, 1, 0);
    out.push(check(
        "N_n closed form",
        nn.as_ref().is_ok_and(|e| (e.total - 0.25).abs() < 1e-15),
        format!("{:?}", nn.map(|e| e.total)),
    ));

    let mut ok = true;
    for r in 0..2000u64 {
        let mut obs = [0.0; 7];
        Substream::new(1, r).fill(0, &mut obs);
        obs.iter_mut().for_each(|u| *u = std_normal_quantile(*u));
        if student_t(&obs).is_ok() {
            ok &= [0.0, 0.5, 1.0, 2.0]
                .iter()
                .all(|&x| t_identity_check(&obs, x).unwrap_or(false));
        }
    }
    out.push(check("t identity", ok, "2000 samples of size 7".into()));

    let mut worst = 0.0f64;
    for r in 0..200u64 {
        let path = ar1_simulate(0.5, 1.0, BaseDistribution::StandardNormal, 50, &Substream::new(2, r));
        if let Ok(path) = path {
            if let (Ok(a), Ok(b)) = (
                ar1_self_normalized(&path),
                embedded_martingale(&path).and_then(|p| variance_normalized(&p)),
            ) {
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    out.push(check(
        "ar1 embedded martingale",
        worst <= 1e-12,
        format!("max rel diff {worst:e}"),
    ));

    let model = Model::new(ModelSpec::new(
        Family::IidScaled {
            base: BaseDistribution::StandardNormal,
        },
        32,
    ))
    .expect("valid");
    let seq = replicate_statistic(&model, 32, Statistic::SelfNormalized, 5000, 3);
    let par = runner.replicate(&model, Statistic::SelfNormalized, 5000, 3);
    let same = matches!((&seq, &par), (Ok(a), Ok(b)) if a.values() == b.values());
    out.push(check(
        "parallel determinism",
        same,
        format!("{} workers", runner.workers()),
    ));
    out
}
