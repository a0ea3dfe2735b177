//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon global pool; without it every call is sequential.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Like [`map`], with at most `jobs` items in flight at once.
pub fn map_jobs<T, U, F>(exec: Execution, jobs: usize, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel if jobs > 1 => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
                Err(e) => {
                    log::warn!("thread pool unavailable ({e}), running sequentially");
                    items.iter().map(f).collect()
                }
            }
        }
        _ => {
            let _ = jobs;
            items.iter().map(f).collect()
        }
    }
}

/// Splits `0..total` into chunks of `chunk`, folds each with `f` and
/// combines the partial results with `combine`.
///
/// `combine` must be associative for the result to be independent of the
/// execution mode.
pub fn fold_range<A, F, C>(exec: Execution, total: u64, chunk: u64, f: F, combine: C) -> Option<A>
where
    A: Send,
    F: Fn(Range<u64>) -> A + Sync + Send,
    C: Fn(A, A) -> A + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks: Vec<Range<u64>> = (0..total.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(total))
        .collect();
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            chunks.into_par_iter().map(f).reduce_with(combine)
        }
        _ => chunks.into_iter().map(f).reduce(combine),
    }
}
