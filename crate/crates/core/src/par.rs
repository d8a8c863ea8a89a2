//! Data-parallel map with a sequential fallback when the `parallel` feature is off.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled. Output order
/// always matches input order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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

/// Always sequential; used by the bench as the baseline.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
