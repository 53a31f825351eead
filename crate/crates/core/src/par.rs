//! Data-parallel map helpers.
//!
//! With the `parallel` feature (the default) [`map_collect`] runs on the
//! rayon pool; without it the same call runs sequentially. Output order
//! always matches input order, so results are identical either way and all
//! reductions over the mapped values stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_collect<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map_collect`], available in every build so the
/// benchmarks can compare both paths.
pub fn map_collect_seq<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    F: Fn(&I) -> T,
{
    items.iter().map(f).collect()
}
