use ecgid_core::experiments::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Runs jobs on a fixed-size rayon pool. Results come back in job order,
/// so output does not depend on the thread count.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `threads == 0` uses all available cores.
    pub fn new(threads: usize) -> Self {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        Pool { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        self.pool.install(|| jobs.into_par_iter().map(f).collect())
    }
}
