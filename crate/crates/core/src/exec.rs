//! Parallel-or-sequential iteration helpers.
//!
//! Every helper hands each closure invocation a disjoint piece of the output,
//! so the result never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the crate was built with rayon support.
pub const PARALLEL: bool = cfg!(feature = "parallel");

/// Calls `f(index, chunk)` for every `size`-element chunk of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], size: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(size > 0, "chunk size must be positive");
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(size).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(size).enumerate().for_each(|(i, c)| f(i, c));
}

/// Like [`for_each_chunk_mut`] but walks two buffers in lockstep.
pub fn for_each_chunk_pair_mut<A, B, F>(a: &mut [A], a_size: usize, b: &mut [B], b_size: usize, f: F)
where
    A: Send,
    B: Send,
    F: Fn(usize, &mut [A], &mut [B]) + Sync + Send,
{
    assert!(a_size > 0 && b_size > 0, "chunk size must be positive");
    #[cfg(feature = "parallel")]
    a.par_chunks_mut(a_size)
        .zip(b.par_chunks_mut(b_size))
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
    #[cfg(not(feature = "parallel"))]
    a.chunks_mut(a_size)
        .zip(b.chunks_mut(b_size))
        .enumerate()
        .for_each(|(i, (x, y))| f(i, x, y));
}

/// Maps `0..n` through `f`, collecting results in index order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Worker threads available to the helpers above.
pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    return 1;
}
