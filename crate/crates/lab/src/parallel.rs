//! Deterministic fan-out of replications over a rayon pool.
//!
//! Replications are cut into fixed-size chunks whose results are gathered
//! in chunk order, so the merged sample does not depend on the number of
//! workers or on scheduling.

use rayon::prelude::*;
use selfnorm_core::empirics::nn::{plug_in_seed, plug_in_terms};
use selfnorm_core::empirics::{EmpiricalSample, NnEstimate, Provenance};
use selfnorm_core::path::{check_compatible, collect_replicates, replicate_one, Scratch};
use selfnorm_core::{Error as CoreError, Model, Statistic, Substream};

use crate::error::{LabError, Result};

const CHUNK: u64 = 2048;

pub struct Runner {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Runner {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(LabError::config("WORKERS", "must be a positive integer"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| LabError::config("WORKERS", e.to_string()))?;
        Ok(Self { pool, workers })
    }

    /// Sized by the `WORKERS` environment variable, else the available cores.
    pub fn from_env() -> Result<Self> {
        match std::env::var("WORKERS") {
            Ok(v) => {
                let w = v
                    .trim()
                    .parse()
                    .map_err(|_| LabError::config("WORKERS", "must be a positive integer"))?;
                Self::new(w)
            }
            Err(_) => Self::new(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Parallel counterpart of `replicate_statistic`; same sample.
    pub fn replicate(
        &self,
        model: &Model,
        statistic: Statistic,
        m: usize,
        master_seed: u64,
    ) -> Result<EmpiricalSample, CoreError> {
        check_compatible(model, statistic)?;
        if m == 0 {
            return Err(CoreError::Config {
                field: "m",
                reason: "replication count must be at least 1".into(),
            });
        }
        let m = m as u64;
        let chunks: Vec<(Vec<f64>, usize)> = self.pool.install(|| {
            (0..m.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut scratch = Scratch::default();
                    let end = ((c + 1) * CHUNK).min(m);
                    let mut values = Vec::with_capacity((end - c * CHUNK) as usize);
                    let mut degenerate = 0;
                    for r in c * CHUNK..end {
                        match replicate_one(model, statistic, master_seed, r, &mut scratch) {
                            Ok(v) => values.push(v),
                            Err(CoreError::Degenerate(_)) => degenerate += 1,
                            Err(e) => return Err(e),
                        }
                    }
                    Ok((values, degenerate))
                })
                .collect::<Result<Vec<_>, CoreError>>()
        })?;
        let degenerate: usize = chunks.iter().map(|c| c.1).sum();
        let outcomes = chunks
            .into_iter()
            .flat_map(|(v, _)| v.into_iter().map(Ok))
            .chain(std::iter::repeat_with(|| Err(CoreError::Degenerate("path"))).take(degenerate));
        let provenance = Provenance {
            model_fingerprint: model.spec().fingerprint(),
            statistic,
            master_seed,
        };
        collect_replicates(outcomes, provenance)
    }

    /// Parallel counterpart of `estimate_nn_plug_in`; same estimate.
    pub fn plug_in(&self, model: &Model, p: f64, m_plug: usize, master_seed: u64) -> Result<NnEstimate, CoreError> {
        let seed = plug_in_seed(master_seed);
        let terms = self.pool.install(|| {
            (0..m_plug as u64)
                .into_par_iter()
                .map_init(Vec::new, |draws, r| {
                    plug_in_terms(model, p, &Substream::new(seed, r), draws)
                })
                .collect::<Result<Vec<_>, CoreError>>()
        })?;
        NnEstimate::from_plug_in(p, &terms)
    }

    /// `N_n` for the model: closed form when available, plug-in otherwise.
    pub fn estimate_nn(&self, model: &Model, p: f64, m_plug: usize, master_seed: u64) -> Result<NnEstimate, CoreError> {
        match selfnorm_core::empirics::nn::estimate_nn_closed_form(model, p)? {
            Some(nn) => Ok(nn),
            None => self.plug_in(model, p, m_plug, master_seed),
        }
    }
}
