//! Data-parallel helpers with a sequential fallback.
//!
//! Every call site collects per-index results into a `Vec` and reduces in
//! fixed index order afterwards, so outputs are identical whichever
//! backend runs and however many threads the pool has.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps `f` over chunk ranges of `0..n` with fixed chunk boundaries.
///
/// Chunking does not depend on the number of worker threads, so a
/// deterministic reduction over the returned per-chunk values stays
/// deterministic under any pool size.
pub(crate) fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    assert!(chunk > 0);
    let ranges: Vec<_> = (0..n.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(n))
        .collect();
    map_indexed(ranges.len(), |i| f(ranges[i].clone()))
}
