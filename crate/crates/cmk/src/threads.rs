//! Deterministic chunked parallelism for per-node loops.
//!
//! The worker count is capped by the `CMK_THREADS` environment variable.
//! Results are written into disjoint output slices, so the output is
//! bit-identical regardless of how many workers run.

use std::sync::OnceLock;

fn worker_count() -> usize {
    static N: OnceLock<usize> = OnceLock::new();
    *N.get_or_init(|| {
        let avail = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
        match std::env::var("CMK_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
            Some(n) if n >= 1 => n.min(avail),
            _ => avail,
        }
    })
}

/// Fills `out[i] = f(i)` for all `i`, splitting the index range across
/// workers. `f` must be pure (it runs concurrently and in no fixed order).
pub fn par_map_into<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let len = out.len();
    let workers = worker_count().min(len.max(1));
    if workers <= 1 || len < 2048 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    let chunk = len.div_ceil(workers);
    std::thread::scope(|scope| {
        let mut rest = out;
        let mut start = 0;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            let base = start;
            let fref = &f;
            scope.spawn(move || {
                for (i, slot) in head.iter_mut().enumerate() {
                    *slot = fref(base + i);
                }
            });
            rest = tail;
            start += take;
        }
    });
}
