//! Deterministic batched execution.
//!
//! Work is cut into batches of fixed size; batch `i` always draws from stream
//! `i` of the run seed and results are merged in batch order, so output does
//! not depend on the number of workers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};

pub const DEFAULT_BATCH: u64 = 4096;

/// Replication budget and execution knobs shared by all estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub reps: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    pub batch_size: u64,
}

impl McConfig {
    pub fn new(reps: u64, seed: u64) -> Self {
        McConfig { reps, seed, workers: 0, batch_size: DEFAULT_BATCH }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_reps(mut self, reps: u64) -> Self {
        self.reps = reps;
        self
    }

    /// Same knobs, different seed.
    pub fn reseeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Run `f(rng, count)` over consecutive batches covering `cfg.reps`
/// replications and return the per-batch results in batch order.
pub fn run_batched<T, F>(cfg: &McConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync,
{
    if cfg.reps == 0 {
        return Err(Error::Parameter("replication count must be positive".into()));
    }
    let size = cfg.batch_size.max(1);
    let batches = cfg.reps.div_ceil(size);
    let job = || -> Vec<T> {
        (0..batches)
            .into_par_iter()
            .map(|i| {
                let count = size.min(cfg.reps - i * size);
                let mut rng = stream(cfg.seed, i);
                f(&mut rng, count)
            })
            .collect()
    };
    if cfg.workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn results_independent_of_workers() {
        let cfg = McConfig { reps: 10_000, seed: 11, workers: 1, batch_size: 333 };
        let sum = |c: &McConfig| -> f64 {
            run_batched(c, |rng, n| (0..n).map(|_| rng.random::<f64>()).sum::<f64>())
                .unwrap()
                .into_iter()
                .sum()
        };
        let a = sum(&cfg);
        let b = sum(&cfg.with_workers(3));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
