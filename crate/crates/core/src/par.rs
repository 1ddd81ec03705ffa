//! Replica-level data parallelism.
//!
//! With the `parallel` feature (on by default) replicas are spread over a
//! rayon pool; without it everything runs on the calling thread. Both paths
//! return results in index order, so output never depends on scheduling.

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_sequential(n, f)
}

/// Sequential reference path, always available.
pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps over `0..n` in contiguous chunks, handing each chunk a reusable
/// scratch value built by `init`. Results are in index order.
pub fn map_chunked<S, T, I, F>(n: usize, chunk: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    let parts = map_indexed(chunks, |c| {
        let mut scratch = init();
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        (lo..hi).map(|i| f(&mut scratch, i)).collect::<Vec<T>>()
    });
    parts.into_iter().flatten().collect()
}

/// Runs `f` inside a pool with `threads` workers (or the global pool when
/// `None`). Without the `parallel` feature the thread count is ignored.
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}
