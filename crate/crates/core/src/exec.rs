//! Order-preserving evaluation of independent tasks.
//!
//! The heavy inner loops of this crate (forward solves at collocation nodes,
//! importance-weight evaluation, parameter sweeps) are data parallel. With the
//! `parallel` feature (default) they run on the rayon pool; without it they
//! run sequentially. Results are always returned in index order, so reductions
//! performed afterwards are deterministic regardless of thread count.

/// Evaluates `f` at every index in `0..n` and collects results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Evaluates `f` at every index in `0..n` and collects results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Always-sequential twin of [`map_indexed`]; the benchmark suite uses it to
/// measure the speedup of the data-parallel path on the same workload.
pub fn map_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
