//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the current
//! rayon pool; without it everything runs on the calling thread. Every
//! helper returns results in index order and each item is computed
//! independently, so output is identical for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ordered map over `0..count`.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Fill `out` in chunks of `chunk` elements; `f(index, chunk)`.
pub fn for_each_chunk<F>(out: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    if chunk == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
