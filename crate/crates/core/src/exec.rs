//! Data-parallel map used by sweeps, bracket scans and window scans.
//!
//! With the `parallel` feature (default) `Execution::Parallel` dispatches to
//! rayon; without it every map runs sequentially. Results are always
//! collected in input order, so outputs do not depend on the execution mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// True when maps actually fan out over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Runs `f` with parallel maps limited to `threads` workers. Without the
/// `parallel` feature, or if the pool cannot be built, `f` runs as is.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
        {
            return pool.install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let xs: Vec<u64> = (0..257).collect();
        let a = Execution::Sequential.map(&xs, |x| x * x + 1);
        let b = Execution::Parallel.map(&xs, |x| x * x + 1);
        assert_eq!(a, b);
        assert_eq!(a[10], 101);
    }

    #[test]
    fn pool_size_does_not_change_results() {
        let xs: Vec<u64> = (0..100).collect();
        let a = with_threads(1, || Execution::Parallel.map(&xs, |x| x + 1));
        let b = with_threads(3, || Execution::Parallel.map(&xs, |x| x + 1));
        assert_eq!(a, b);
    }
}
