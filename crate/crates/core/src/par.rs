//! Bounded parallel map for independent solves.

use rayon::prelude::*;

/// Maps `f` over `items` with at most `jobs` worker threads, keeping order.
/// `jobs <= 1` runs inline on the calling thread.
pub fn map<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("falling back to sequential evaluation: {e}");
            items.iter().map(f).collect()
        }
    }
}
