//! Loop guardrails and deterministic worker partitioning.
//!
//! Every enumeration-heavy operation declares its iteration count up front
//! and refuses to run past [`Budget::max_ops`]. Operations whose outer loop
//! is embarrassingly parallel split it across [`Budget::workers`] scoped
//! threads; all reductions are integer sums, elementwise histogram sums or
//! bitset unions, so results are identical for any worker count.

use crate::error::{Error, Result};

/// Default loop-iteration guardrail (overridable via CLI / env).
pub const DEFAULT_MAX_OPS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Hard cap on the number of inner-loop iterations of a single operation.
    pub max_ops: u64,
    /// Worker threads for the partitionable counting loops.
    pub workers: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_ops: DEFAULT_MAX_OPS, workers: 1 }
    }
}

impl Budget {
    pub fn with_workers(workers: usize) -> Self {
        Budget { workers: workers.max(1), ..Budget::default() }
    }

    /// Errors with `TooLarge` if `needed` iterations exceed the cap.
    pub fn check(&self, needed: u128) -> Result<()> {
        if needed > self.max_ops as u128 {
            return Err(Error::TooLarge { needed, limit: self.max_ops });
        }
        Ok(())
    }
}

/// Splits `0..n` into at most `workers` contiguous chunks.
pub(crate) fn chunk_ranges(n: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    let workers = workers.max(1).min(n.max(1));
    let base = n / workers;
    let extra = n % workers;
    let mut out = Vec::with_capacity(workers);
    let mut start = 0;
    for w in 0..workers {
        let len = base + usize::from(w < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Runs `map` over chunks of `0..n` on scoped threads and returns the partial
/// results in chunk order. With one worker everything runs on the caller's
/// thread.
pub(crate) fn run_chunked<T, F>(n: usize, workers: usize, map: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
{
    let ranges = chunk_ranges(n, workers);
    if ranges.len() <= 1 {
        return ranges.into_iter().map(map).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| scope.spawn(|| map(r)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}
