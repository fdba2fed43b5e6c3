//! Order-stable batch maps, data-parallel when the `parallel` feature is on.
//!
//! Every call site in this crate maps independent, deterministic computations
//! over a slice, so the parallel and sequential variants produce identical
//! output. `map_collect` dispatches on the feature; the explicit `_seq` / `_par`
//! variants exist for the benchmark suite, which compares both on one build.

/// Map over a slice, collecting results in input order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_collect_par(items, f)
}

/// Map over a slice, collecting results in input order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    map_collect_seq(items, f)
}

/// Sequential variant, always available.
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Rayon variant; collection preserves input order.
#[cfg(feature = "parallel")]
pub fn map_collect_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Map over an index range, collecting results in order.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map over an index range, collecting results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}
