//! Runtime selection between the sequential and rayon execution paths.

/// How data-parallel loops are executed.
///
/// Both variants run the same batched algorithms and produce byte-identical
/// results; the choice only affects wall-clock time. `Rayon` is the default
/// when the `parallel` feature (on by default) is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    /// Plain iterators on the calling thread.
    Sequential,
    /// rayon work-stealing across the global (or an explicitly built) pool.
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}

/// Maps `op` over `items`, sequentially or via rayon, preserving order.
pub(crate) fn map_ordered<T, U, F>(par: Parallelism, items: Vec<T>, op: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match par {
        Parallelism::Sequential => items.into_iter().map(op).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            items.into_par_iter().map(op).collect()
        }
    }
}
