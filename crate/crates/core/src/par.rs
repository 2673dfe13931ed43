//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here splits its index range into chunks of a fixed size,
//! reduces each chunk sequentially with compensated summation and then folds
//! the per-chunk partials in index order. The chunk boundaries never depend on
//! the number of worker threads, so results are bit-identical whether the
//! `parallel` feature is on or off and whatever the pool size.

use crate::numeric::CompensatedSum;

/// Chunk length used by all reductions.
pub const CHUNK: usize = 2048;

/// Evaluates `f` on `0..n` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f` on every chunk of a mutable slice; chunk `c` covers
/// `c * chunk .. (c + 1) * chunk`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(c, part)| f(c, part));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(c, part)| f(c, part));
    }
}

fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK)
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partials = map_indexed(chunk_count(n), |c| {
        let mut acc = CompensatedSum::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            acc.add(f(i));
        }
        acc.value()
    });
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// Deterministic sums of `f(i)` and `f(i)^2` over `0..n`.
pub fn sum_and_squares<F>(n: usize, f: F) -> (f64, f64)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partials = map_indexed(chunk_count(n), |c| {
        let mut acc = CompensatedSum::default();
        let mut sq = CompensatedSum::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let v = f(i);
            acc.add(v);
            sq.add(v * v);
        }
        (acc.value(), sq.value())
    });
    let mut acc = CompensatedSum::default();
    let mut sq = CompensatedSum::default();
    for (a, b) in partials {
        acc.add(a);
        sq.add(b);
    }
    (acc.value(), sq.value())
}

/// Maximum of `f(i)` over `0..n`, or `None` when `n == 0`.
pub fn max<F>(n: usize, f: F) -> Option<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(chunk_count(n), |c| {
        (c * CHUNK..((c + 1) * CHUNK).min(n))
            .map(&f)
            .fold(f64::NEG_INFINITY, f64::max)
    })
    .into_iter()
    .reduce(f64::max)
}

/// Runs `op` on a pool of `jobs` workers. Without the `parallel` feature the
/// job count is ignored.
pub fn with_jobs<R, F>(jobs: usize, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
        {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        op()
    }
}
