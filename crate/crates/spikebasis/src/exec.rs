//! Deterministic reductions with optional data parallelism.
//!
//! Reductions here fix the shape of the reduction tree from the input length
//! alone, so a sum computed on one thread is bit-identical to the same sum
//! computed across a rayon pool. Disabling the `parallel` feature swaps in
//! the sequential walk of the same tree.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this length a block is summed left-to-right.
const BLOCK: usize = 64;

/// Minimum length worth splitting across threads.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 4096;

/// Pairwise summation. The split points depend only on `values.len()`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    {
        pairwise_sum_par(values)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairwise_sum_seq(values)
    }
}

/// Sequential walk of the pairwise reduction tree.
pub fn pairwise_sum_seq(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_seq(&values[..mid]) + pairwise_sum_seq(&values[mid..])
}

/// Parallel walk of the same tree via `rayon::join`.
#[cfg(feature = "parallel")]
pub fn pairwise_sum_par(values: &[f64]) -> f64 {
    if values.len() < PAR_THRESHOLD {
        return pairwise_sum_seq(values);
    }
    let mid = values.len() / 2;
    let (a, b) = rayon::join(
        || pairwise_sum_par(&values[..mid]),
        || pairwise_sum_par(&values[mid..]),
    );
    a + b
}

/// Maps `f` over `0..count`, preserving index order in the output.
///
/// Each element is computed independently, so the parallel and sequential
/// paths produce identical vectors.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
