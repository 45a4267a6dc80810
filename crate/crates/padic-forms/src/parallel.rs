//! Tiny switch between rayon and sequential execution.
//!
//! With the `parallel` feature (default) the helpers fan work out over a
//! rayon pool; without it they run plain iterators.  Callers never depend on
//! ordering beyond what these functions guarantee (results come back in
//! input order).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
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

/// Applies `f` over `items` and returns some produced value, stopping the
/// scan as soon as one is found.  Which value is returned when several items
/// produce one is unspecified; callers must only rely on "found vs none".
pub fn find_map<T, R, F>(items: &[T], f: F) -> Option<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().find_map_any(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().find_map(f)
    }
}

/// Maps `f` over an index range and folds the results with `reduce`,
/// starting from `identity` (which must be a true identity for `reduce`).
pub fn map_reduce<R, F, G>(len: usize, identity: R, f: F, reduce: G) -> R
where
    R: Send + Sync + Clone,
    F: Fn(usize) -> R + Sync + Send,
    G: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .map(f)
            .reduce(|| identity.clone(), &reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).fold(identity, reduce)
    }
}
