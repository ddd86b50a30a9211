//! Parallel replicate runner with per-replicate RNG streams.

use rayon::prelude::*;

use crate::numerics::RngStream;

/// The two streams a replicate gets: one for the count source, one for the estimator.
pub struct ReplicateStreams {
    pub index: u64,
    pub source: RngStream,
    pub estimator: RngStream,
}

impl ReplicateStreams {
    pub fn new(seed: u64, index: u64) -> Self {
        Self {
            index,
            source: RngStream::for_replicate(seed, index, 0),
            estimator: RngStream::for_replicate(seed, index, 1),
        }
    }
}

/// Runs `f` for replicates `0..n` in parallel; results come back in index order
/// and do not depend on the thread count.
pub fn run_replicates<T, F>(seed: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(ReplicateStreams) -> T + Sync + Send,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(ReplicateStreams::new(seed, i)))
        .collect()
}
