//! Parallel/sequential execution helpers.
//!
//! Grid classification, field evaluation, and center scans are all
//! index-parallel maps with order-preserving collection, so results are
//! deterministic regardless of thread count. `map_indexed` dispatches to
//! rayon when the `parallel` feature is enabled; `map_indexed_seq` is the
//! always-available sequential kernel (also used as the benchmark
//! baseline).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

/// Sequential twin of [`map_indexed`].
pub fn map_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
