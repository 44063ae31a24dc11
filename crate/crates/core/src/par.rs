//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it, or with [`Strategy::Sequential`], the same closures run in
//! order on the calling thread. Results are always returned in input order,
//! so reductions downstream are deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    /// `Parallel` degrades to `Sequential` when the feature is off.
    pub fn effective(self) -> Strategy {
        if cfg!(feature = "parallel") {
            self
        } else {
            Strategy::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(strategy: Strategy, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match strategy.effective() {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Maps `f` over `lo..hi`, preserving order.
pub fn map_range<R, F>(strategy: Strategy, lo: u64, hi: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    match strategy.effective() {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => (lo..hi).into_par_iter().map(f).collect(),
        _ => (lo..hi).map(f).collect(),
    }
}

/// Number of worker threads the strategy will use.
pub fn worker_count(strategy: Strategy) -> usize {
    match strategy.effective() {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => rayon::current_num_threads(),
        _ => 1,
    }
}

/// Configures the global pool. Only the first call has any effect.
pub fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map(Strategy::Sequential, &items, |x| x * x);
        let b = map(Strategy::Parallel, &items, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(map_range(Strategy::Parallel, 5, 10, |x| x), vec![5, 6, 7, 8, 9]);
    }
}
