//! Simulation core for Berry–Esseen experiments on self-normalized
//! martingales.
//!
//! Everything here is pure computation over `alloc`: martingale-difference
//! models, path simulation, the normal law and Kolmogorov distances, `N_n`
//! evaluation, the bound diagnostics, and the Student-t / AR(1)
//! applications. IO, configuration and parallel fan-out live in
//! `selfnorm-lab`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod applications;
pub mod bounds;
pub mod empirics;
mod error;
mod math;
pub mod models;
pub mod path;
pub mod rng;

pub use bounds::{berry_esseen_core, fit_rate, ratio_series, BoundEvaluation, RateFit, RatioReport};
pub use empirics::{EmpiricalSample, NnEstimate, NnMethod};
pub use error::{Error, Result};
pub use models::{BaseDistribution, Family, Model, ModelSpec, ModelState, StepOutcome, TwoPoint};
pub use path::{MartingalePath, Statistic};
pub use rng::Substream;

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
