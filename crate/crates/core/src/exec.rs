//! Data-parallel map over independent work items.
//!
//! Sweep grids and validity maps are embarrassingly parallel: each item is a
//! pure function of its parameters. With the `parallel` feature (default)
//! the map runs on the rayon pool; without it, sequentially. Output order is
//! the input order either way, so results are bit-identical across feature
//! sets and thread counts.

#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Send + Sync,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Send + Sync,
{
    items.iter().map(f).collect()
}
