//! Execution strategy for the data-parallel loops (minibatch gradients,
//! evaluation sweeps, independent trainings).
//!
//! Every helper returns results in input order, and reductions are always
//! performed sequentially over fixed-size chunks, so numerical results are
//! bit-identical between [`ExecMode::Sequential`] and [`ExecMode::Parallel`]
//! and independent of the thread count. Without the `parallel` feature the
//! parallel mode falls back to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a data-parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// True when the loop will actually be dispatched to the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Splits `items` into chunks of `chunk_size`, maps each chunk with `f`
/// and returns the per-chunk results in order.
///
/// Callers fold the returned partials sequentially; because the chunk
/// boundaries are fixed the summation order never depends on scheduling.
pub fn map_chunks<T, R, F>(mode: ExecMode, items: &[T], chunk_size: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    let chunk_size = chunk_size.max(1);
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_chunks(chunk_size).map(f).collect();
    }
    let _ = mode;
    items.chunks(chunk_size).map(f).collect()
}

/// Element-wise sum of equally sized partial vectors, folded left to right.
pub fn sum_partials(partials: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut total = vec![0.0; len];
    for part in partials {
        debug_assert_eq!(part.len(), len);
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}
