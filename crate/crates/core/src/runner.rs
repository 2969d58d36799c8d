//! Deterministic parallel execution of independent trials.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weights::derive_trial_seed;

/// Runs `trial(index, seed)` for `index in 0..trials` on `workers` threads.
///
/// Seeds come from [`derive_trial_seed`] and results are returned in index
/// order, so the output does not depend on `workers`.
pub fn run_trials<T, F>(workers: usize, trials: usize, master_seed: u64, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    if workers == 1 {
        return Ok((0..trials)
            .map(|i| trial(i, derive_trial_seed(master_seed, i as u64)))
            .collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| trial(i, derive_trial_seed(master_seed, i as u64)))
            .collect()
    }))
}
