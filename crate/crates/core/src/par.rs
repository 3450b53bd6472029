//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run the same closures in order. Every helper writes each output slot
//! from exactly one closure invocation, so results are bit-identical in both
//! modes and for any thread count. Reductions are never parallelized.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f(chunk_index, chunk)` to consecutive `chunk`-sized pieces of `data`.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Applies `f(index, item)` to every element of `data`.
pub fn for_each_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    #[cfg(not(feature = "parallel"))]
    data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Collects `f(0), f(1), ..., f(n-1)` in index order.
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

/// Zips two equal-length slices, writing `f(i, &a[i], &mut out[i])`.
pub fn zip_with<A, T, F>(a: &[A], out: &mut [T], f: F)
where
    A: Sync,
    T: Send,
    F: Fn(usize, &A, &mut T) + Sync + Send,
{
    debug_assert_eq!(a.len(), out.len());
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .zip(a.par_iter())
        .enumerate()
        .for_each(|(i, (o, x))| f(i, x, o));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut()
        .zip(a.iter())
        .enumerate()
        .for_each(|(i, (o, x))| f(i, x, o));
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
