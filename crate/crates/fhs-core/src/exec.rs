//! Data-parallel execution helpers.
//!
//! Workloads with independent units (multistart descents, validator
//! lattices, sweep points, Cholesky column updates) go through these
//! helpers. With the `parallel` feature they fan out over rayon; without it
//! (or with [`ExecMode::Sequential`]) they run in order on the calling
//! thread. Results are collected in index order either way, so outputs are
//! identical across modes and thread counts.

/// How to run an independent batch of work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Fan out over the rayon pool. Falls back to sequential execution when
    /// the `parallel` feature is disabled.
    #[default]
    Parallel,
    /// Run items in index order on the calling thread.
    Sequential,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `0..count`, collecting results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..count).map(f).collect()
}

/// Applies `f` to every element of `items` in place.
pub fn for_each_mut<T, F>(mode: ExecMode, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        items.par_iter_mut().for_each(f);
        return;
    }
    let _ = mode;
    items.iter_mut().for_each(f);
}
