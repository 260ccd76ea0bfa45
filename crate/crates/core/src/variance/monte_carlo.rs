//! Reproducible Monte Carlo over random lattice placements.
//!
//! Replicate i draws from `ChaCha8Rng::seed_from_u64(seed)` on stream i, so
//! the sample does not depend on how replicates are spread over workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default number of batches behind the standard errors.
pub const BATCHES: usize = 20;
/// Smallest replicate count accepted by the variance drivers.
pub const MIN_REPLICATES: usize = 100;

/// The generator of replicate `index`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates `replicate` for indices 0..n in parallel (on the current rayon
/// pool) and returns the values in index order.
pub fn replicate_values<F>(n: usize, seed: u64, replicate: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| replicate(&mut replicate_rng(seed, i)))
        .collect()
}

/// Runs `job` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send, F: FnOnce() -> T + Send>(workers: usize, job: F) -> Result<T> {
    if workers == 0 {
        return Err(Error::domain("workers", "need at least one worker"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported {
            message: format!("cannot start worker pool: {e}"),
        })?;
    Ok(pool.install(job))
}

pub(crate) fn check_replicates(n: usize) -> Result<()> {
    if n < MIN_REPLICATES {
        return Err(Error::domain(
            "replicates",
            format!("need at least {MIN_REPLICATES} replicates, got {n}"),
        ));
    }
    Ok(())
}
