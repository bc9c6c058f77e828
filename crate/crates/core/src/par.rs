//! Internal fan-out for embarrassingly parallel index ranges.
//!
//! The env var `ULAM_THREADS` caps the worker count (default: available
//! parallelism). Results are merged in index order, so output never
//! depends on the thread count.

use std::sync::OnceLock;

pub(crate) fn thread_count() -> usize {
    static COUNT: OnceLock<usize> = OnceLock::new();
    *COUNT.get_or_init(|| {
        let available = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        match std::env::var("ULAM_THREADS") {
            Ok(v) => v.parse::<usize>().ok().filter(|&t| t >= 1).unwrap_or(1),
            Err(_) => available,
        }
        .max(1)
    })
}

/// Applies `f` to contiguous subranges of `0..len` on up to
/// `thread_count()` workers and concatenates the results in range order.
pub(crate) fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> Vec<R> + Sync,
{
    let threads = thread_count().min(len.max(1));
    if threads <= 1 || len < 64 {
        return f(0..len);
    }
    let chunk = len.div_ceil(threads);
    let mut pieces: Vec<Vec<R>> = Vec::with_capacity(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(len);
                let f = &f;
                scope.spawn(move || f(lo..hi.max(lo)))
            })
            .collect();
        for h in handles {
            pieces.push(h.join().expect("worker panicked"));
        }
    });
    let mut out = Vec::with_capacity(len);
    for p in pieces {
        out.extend(p);
    }
    out
}
