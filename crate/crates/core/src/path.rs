//! Trajectory simulation and the two normalized statistics.

use alloc::vec::Vec;

use crate::applications;
use crate::empirics::sample::{EmpiricalSample, Provenance};
use crate::error::{Error, Result};
use crate::math::{abs, sqrt};
use crate::models::{Family, Model};
use crate::rng::Substream;

/// Degenerate replicates above this fraction abort an experiment.
pub const MAX_DEGENERATE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// `S_n / sqrt([S]_n)`
    SelfNormalized,
    /// `S_n / sqrt(<S>_n)`
    VarianceNormalized,
    /// Student's t of the increments.
    StudentT,
    /// `(theta_hat - theta) · sqrt(sum Y_i²) / sigma` for AR(1) models.
    Ar1SelfNormalized,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::SelfNormalized => "self_normalized",
            Statistic::VarianceNormalized => "variance_normalized",
            Statistic::StudentT => "student_t",
            Statistic::Ar1SelfNormalized => "ar1_self_normalized",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Self::SelfNormalized,
            Self::VarianceNormalized,
            Self::StudentT,
            Self::Ar1SelfNormalized,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// One realized trajectory with its running sums and variations.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePath {
    increments: Vec<f64>,
    partial_sums: Vec<f64>,
    quadratic_variation: Vec<f64>,
    predictable_variation: Vec<f64>,
}

impl MartingalePath {
    /// Builds a path from increments and their conditional second moments.
    pub fn from_parts(increments: Vec<f64>, conditional_second_moments: &[f64]) -> Result<Self> {
        if increments.len() != conditional_second_moments.len() {
            return Err(Error::contract("increments and conditional moments differ in length"));
        }
        if conditional_second_moments.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::contract("conditional second moments must be nonnegative"));
        }
        let n = increments.len();
        let mut partial_sums = Vec::with_capacity(n);
        let mut quadratic_variation = Vec::with_capacity(n);
        let mut predictable_variation = Vec::with_capacity(n);
        let (mut s, mut q, mut v) = (0.0, 0.0, 0.0);
        for (&x, &c) in increments.iter().zip(conditional_second_moments) {
            s += x;
            q += x * x;
            v += c;
            partial_sums.push(s);
            quadratic_variation.push(q);
            predictable_variation.push(v);
        }
        Ok(Self {
            increments,
            partial_sums,
            quadratic_variation,
            predictable_variation,
        })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// `[S]_k` for k = 1..=n.
    pub fn quadratic_variation(&self) -> &[f64] {
        &self.quadratic_variation
    }

    /// `<S>_k` for k = 1..=n.
    pub fn predictable_variation(&self) -> &[f64] {
        &self.predictable_variation
    }

    pub fn summary(&self) -> PathSummary {
        PathSummary {
            n: self.len(),
            sum: self.partial_sums.last().copied().unwrap_or(0.0),
            quadratic_variation: self.quadratic_variation.last().copied().unwrap_or(0.0),
            predictable_variation: self.predictable_variation.last().copied().unwrap_or(0.0),
        }
    }
}

/// Terminal values of a path, accumulated without storing it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathSummary {
    pub n: usize,
    pub sum: f64,
    pub quadratic_variation: f64,
    pub predictable_variation: f64,
}

impl PathSummary {
    pub fn self_normalized(&self) -> Result<f64> {
        if !(self.quadratic_variation > 0.0) {
            return Err(Error::Degenerate("[S]_n = 0"));
        }
        Ok(self.sum / sqrt(self.quadratic_variation))
    }

    pub fn variance_normalized(&self) -> Result<f64> {
        if !(self.predictable_variation > 0.0) {
            return Err(Error::Degenerate("<S>_n = 0"));
        }
        Ok(self.sum / sqrt(self.predictable_variation))
    }
}

fn check_horizon(model: &Model, n: usize) -> Result<()> {
    if n != model.horizon() {
        return Err(Error::config(
            "horizon",
            alloc::format!("path length {n} does not match model horizon {}", model.horizon()),
        ));
    }
    Ok(())
}

/// Runs the model for `n` steps on `stream`, visiting each outcome.
fn drive<F: FnMut(f64, f64)>(model: &Model, stream: &Substream, draws: &mut Vec<f64>, mut visit: F) -> Result<()> {
    draws.resize(model.max_draws(), 0.0);
    let mut state = model.initial_state();
    for k in 0..model.horizon() {
        let need = model.draws_for_step(k);
        stream.fill(k as u32, &mut draws[..need]);
        let out = model.step(&state, &draws[..need])?;
        visit(out.increment, out.conditional_second_moment);
        state = out.new_state;
    }
    Ok(())
}

/// Simulates a full trajectory of length `n` (which must equal the horizon).
pub fn simulate_path(model: &Model, n: usize, stream: &Substream) -> Result<MartingalePath> {
    check_horizon(model, n)?;
    let mut inc = Vec::with_capacity(n);
    let mut csm = Vec::with_capacity(n);
    let mut draws = Vec::new();
    drive(model, stream, &mut draws, |x, c| {
        inc.push(x);
        csm.push(c);
    })?;
    MartingalePath::from_parts(inc, &csm)
}

/// Streaming counterpart of [`simulate_path`]; identical terminal values.
pub fn simulate_summary(model: &Model, stream: &Substream, draws: &mut Vec<f64>) -> Result<PathSummary> {
    let mut s = PathSummary {
        n: model.horizon(),
        ..PathSummary::default()
    };
    drive(model, stream, draws, |x, c| {
        s.sum += x;
        s.quadratic_variation += x * x;
        s.predictable_variation += c;
    })?;
    Ok(s)
}

/// `S_n / sqrt([S]_n)`.
pub fn self_normalized(path: &MartingalePath) -> Result<f64> {
    path.summary().self_normalized()
}

/// `S_n / sqrt(<S>_n)`.
pub fn variance_normalized(path: &MartingalePath) -> Result<f64> {
    path.summary().variance_normalized()
}

/// Reusable per-worker buffers for [`replicate_one`].
#[derive(Debug, Default)]
pub struct Scratch {
    draws: Vec<f64>,
    increments: Vec<f64>,
}

/// Checks that `statistic` is defined for `model`.
pub fn check_compatible(model: &Model, statistic: Statistic) -> Result<()> {
    let is_ar1 = matches!(model.spec().family, Family::Ar1Noise { .. });
    if statistic == Statistic::Ar1SelfNormalized && !is_ar1 {
        return Err(Error::config("statistic", "ar1_self_normalized requires an ar1 model"));
    }
    if statistic == Statistic::StudentT && model.horizon() < 2 {
        return Err(Error::config("horizon", "student_t needs at least 2 observations"));
    }
    Ok(())
}

/// Evaluates the statistic on replication `replication` of `master_seed`.
///
/// Returns `Err(Error::Degenerate)` when the statistic is undefined on the
/// realized path; callers count those.
pub fn replicate_one(
    model: &Model,
    statistic: Statistic,
    master_seed: u64,
    replication: u64,
    scratch: &mut Scratch,
) -> Result<f64> {
    let stream = Substream::new(master_seed, replication);
    match statistic {
        Statistic::SelfNormalized => simulate_summary(model, &stream, &mut scratch.draws)?.self_normalized(),
        Statistic::VarianceNormalized => simulate_summary(model, &stream, &mut scratch.draws)?.variance_normalized(),
        Statistic::StudentT => {
            scratch.increments.clear();
            let inc = &mut scratch.increments;
            drive(model, &stream, &mut scratch.draws, |x, _| inc.push(x))?;
            applications::student_t(&scratch.increments)
        }
        Statistic::Ar1SelfNormalized => {
            let Family::Ar1Noise { base, theta, sigma } = model.spec().family else {
                return Err(Error::config("statistic", "ar1_self_normalized requires an ar1 model"));
            };
            let path = applications::ar1_simulate(theta, sigma, base, model.horizon(), &stream)?;
            applications::ar1_self_normalized(&path)
        }
    }
}

/// Folds per-replication outcomes (in replication order) into a sample.
///
/// Degenerate outcomes are counted; any other error is returned.
pub fn collect_replicates<I>(outcomes: I, provenance: Provenance) -> Result<EmpiricalSample>
where
    I: IntoIterator<Item = Result<f64>>,
{
    let mut values = Vec::new();
    let mut degenerate = 0usize;
    for r in outcomes {
        match r {
            Ok(v) => values.push(v),
            Err(Error::Degenerate(_)) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    let total = values.len() + degenerate;
    if degenerate as f64 > MAX_DEGENERATE_FRACTION * total as f64 {
        return Err(Error::Aborted { degenerate, total });
    }
    EmpiricalSample::new(values, degenerate, provenance)
}

/// `m` independent replicates of `statistic`, sorted ascending.
///
/// Sequential; the harness crate fans the same per-replication function out
/// across workers and produces identical samples.
pub fn replicate_statistic(
    model: &Model,
    n: usize,
    statistic: Statistic,
    m: usize,
    master_seed: u64,
) -> Result<EmpiricalSample> {
    check_horizon(model, n)?;
    check_compatible(model, statistic)?;
    if m == 0 {
        return Err(Error::config("m", "replication count must be at least 1"));
    }
    let mut scratch = Scratch::default();
    let provenance = Provenance {
        model_fingerprint: model.spec().fingerprint(),
        statistic,
        master_seed,
    };
    collect_replicates(
        (0..m as u64).map(|r| replicate_one(model, statistic, master_seed, r, &mut scratch)),
        provenance,
    )
}

/// Cauchy–Schwarz: `|S_n| <= sqrt(n [S]_n)`.
pub fn within_cauchy_schwarz(value: f64, n: usize) -> bool {
    abs(value) <= sqrt(n as f64) * (1.0 + 4.0 * f64::EPSILON)
}
