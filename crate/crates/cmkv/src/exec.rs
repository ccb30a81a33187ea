//! Rayon-backed [`Executor`].

use cmkv_core::Executor;
use rayon::prelude::*;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CMKV_WORKERS";

/// Worker count from [`WORKERS_ENV`], else the number of available cores.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// A dedicated thread pool. Output never depends on the worker count.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.workers() == 1 {
            return (0..count).map(task).collect();
        }
        self.pool.install(|| (0..count).into_par_iter().map(task).collect())
    }

    fn for_each_row<F>(&self, data: &mut [f64], width: usize, task: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        if width == 0 {
            return;
        }
        if self.workers() == 1 {
            data.chunks_mut(width).enumerate().for_each(|(k, row)| task(k, row));
            return;
        }
        self.pool.install(|| data.par_chunks_mut(width).enumerate().for_each(|(k, row)| task(k, row)));
    }
}
