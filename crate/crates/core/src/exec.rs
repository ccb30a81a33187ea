//! Pluggable data-parallel execution.
//!
//! Every parallel section in the crate is phrased as "compute item `i`
//! independently" or "fill row `k` of an output buffer", so the result is the
//! same for any implementation of [`Executor`].

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `task(i)` for `i in 0..count`, results in index order.
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Calls `task(row_index, row)` for consecutive rows of width `width`.
    fn for_each_row<F>(&self, data: &mut [f64], width: usize, task: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(task).collect()
    }

    fn for_each_row<F>(&self, data: &mut [f64], width: usize, task: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        if width == 0 {
            return;
        }
        for (k, row) in data.chunks_mut(width).enumerate() {
            task(k, row);
        }
    }
}
