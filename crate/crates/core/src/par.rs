//! Range partitioning shared by the verifiers and scanners.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Splits `lo..=hi` into consecutive blocks of at most `size` values.
pub(crate) fn blocks(lo: u64, hi: u64, size: u64) -> Vec<(u64, u64)> {
    let size = size.max(1);
    let mut out = Vec::new();
    let mut start = lo;
    loop {
        let end = start.saturating_add(size - 1).min(hi);
        out.push((start, end));
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

/// Runs `work` on every block, in order when `threads <= 1` and on a rayon
/// pool otherwise. Results come back in block order either way; `progress`
/// receives the upper end of each finished block.
pub(crate) fn run_blocks<R, F>(
    lo: u64,
    hi: u64,
    block: u64,
    threads: usize,
    work: F,
    progress: &(dyn Fn(u64) + Sync),
) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64, u64) -> Result<R> + Sync,
{
    let parts = blocks(lo, hi, block);
    let step = |&(a, b): &(u64, u64)| {
        let r = work(a, b)?;
        progress(b);
        Ok(r)
    };
    if threads <= 1 {
        return parts.iter().map(step).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| parts.par_iter().map(step).collect())
}
