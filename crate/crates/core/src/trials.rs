//! Independent-trial driver. With the `parallel` feature trials are spread
//! over the rayon pool; without it they run in order on the calling thread.
//! Either way results come back indexed by trial, so output does not depend
//! on scheduling.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `f(0), ..., f(count - 1)` and collects the results in index order.
/// Stops at the first error (by index).
pub fn run_trials<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
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

/// Like [`run_trials`] but always sequential, for comparison and for
/// callers that already run inside a parallel section.
pub fn run_trials_sequential<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..count).map(f).collect()
}

/// Whether [`run_trials`] dispatches to rayon in this build.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
