//! Exact evaluation for compactly supported kernels on a uniform grid.
//!
//! In scaled coordinates the support is the ball of radius `R`, so with cells
//! of side `R` every atom within range of a query sits in one of the `3^d`
//! cells around it. Atoms are sorted by cell; each query walks its
//! neighbouring cells in key order with compensated per-query sums. When only
//! kernel sums are needed each cell is a contiguous run of sorted coordinates.

use alloc::vec;
use alloc::vec::Vec;

use super::pairs::{BlockPlan, PairKernel};
use crate::exec::Executor;
use crate::kernels::Profile;
use crate::math::CompensatedSum;

const QUERY_CHUNK: usize = 256;

pub(crate) fn block_sums<E: Executor>(plan: &BlockPlan<'_>, exec: &E) -> Vec<f64> {
    let n = plan.n();
    let d = plan.d();
    let width = plan.width();
    let radius = libm::sqrt(plan.support2());
    let coords = plan.coords();
    let cell_of = |k: usize, out: &mut [i64]| {
        for c in 0..d {
            out[c] = libm::floor(coords[k * d + c] / radius) as i64;
        }
    };
    let mut keys = vec![0i64; n * d];
    for k in 0..n {
        cell_of(k, &mut keys[k * d..(k + 1) * d]);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        keys[a * d..(a + 1) * d]
            .cmp(&keys[b * d..(b + 1) * d])
            .then(a.cmp(&b))
    });
    let sorted_keys: Vec<&[i64]> = order.iter().map(|&k| &keys[k * d..(k + 1) * d]).collect();

    let offsets: Vec<Vec<i64>> = neighbour_offsets(d);
    let chunks = n.div_ceil(QUERY_CHUNK);
    if let (true, PairKernel::Radial(profile)) = (plan.sums_only(), plan.kernel()) {
        let sorted: Vec<f64> = order.iter().flat_map(|&k| coords[k * d..(k + 1) * d].iter().copied()).collect();
        let cells = Cells { d, coords, keys: &keys, sorted_keys: &sorted_keys, sorted: &sorted, offsets: &offsets };
        // One copy of the loop per profile keeps the branch out of it.
        let parts = match profile {
            Profile::Gaussian => exec.map(chunks, |c| cells.sums(c, n, |r2| Profile::Gaussian.eval(r2))),
            Profile::Epanechnikov => exec.map(chunks, |c| cells.sums(c, n, |r2| Profile::Epanechnikov.eval(r2))),
            Profile::Uniform => exec.map(chunks, |c| cells.sums(c, n, |r2| Profile::Uniform.eval(r2))),
        };
        return parts.concat();
    }
    let parts = exec.map(chunks, |chunk| {
        let queries = chunk * QUERY_CHUNK..((chunk + 1) * QUERY_CHUNK).min(n);
        let mut out = vec![0.0; queries.len() * width];
        let mut scratch = plan.scratch();
        let mut row = vec![0.0; width];
        let mut sums = vec![CompensatedSum::new(); width];
        let mut target = vec![0i64; d];
        for (a, k) in queries.enumerate() {
            sums.iter_mut().for_each(|s| *s = CompensatedSum::new());
            let home = &keys[k * d..(k + 1) * d];
            for offset in &offsets {
                for c in 0..d {
                    target[c] = home[c] + offset[c];
                }
                let lo = sorted_keys.partition_point(|key| *key < &target[..]);
                let hi = lo + sorted_keys[lo..].partition_point(|key| *key == &target[..]);
                for &l in &order[lo..hi] {
                    let weight = plan.pair_weight(k, l, &mut scratch);
                    if weight == 0.0 {
                        continue;
                    }
                    row.iter_mut().for_each(|v| *v = 0.0);
                    plan.accumulate(k, l, weight, &mut row, &mut scratch);
                    for (s, v) in sums.iter_mut().zip(&row) {
                        s.add(*v);
                    }
                }
            }
            for (slot, s) in out[a * width..(a + 1) * width].iter_mut().zip(&sums) {
                *slot = s.value();
            }
        }
        out
    });
    parts.concat()
}

/// Atoms sorted by cell, for the kernel-sums-only path.
struct Cells<'a> {
    d: usize,
    coords: &'a [f64],
    keys: &'a [i64],
    sorted_keys: &'a [&'a [i64]],
    /// Scaled coordinates in cell order, so each cell is one contiguous run.
    sorted: &'a [f64],
    offsets: &'a [Vec<i64>],
}

impl Cells<'_> {
    #[inline(always)]
    fn sums<F: Fn(f64) -> f64>(&self, chunk: usize, n: usize, profile: F) -> Vec<f64> {
        let d = self.d;
        let queries = chunk * QUERY_CHUNK..((chunk + 1) * QUERY_CHUNK).min(n);
        let mut out = Vec::with_capacity(queries.len());
        let mut target = vec![0i64; d];
        for k in queries {
            let home = &self.keys[k * d..(k + 1) * d];
            let x = &self.coords[k * d..(k + 1) * d];
            let mut sum = CompensatedSum::new();
            for offset in self.offsets {
                for c in 0..d {
                    target[c] = home[c] + offset[c];
                }
                let lo = self.sorted_keys.partition_point(|key| *key < &target[..]);
                let hi = lo + self.sorted_keys[lo..].partition_point(|key| *key == &target[..]);
                if lo < hi {
                    sum.add(run_sum(x, &self.sorted[lo * d..hi * d], &profile));
                }
            }
            out.push(sum.value());
        }
        out
    }
}

/// `Σ κ(|x - y|²)` over the atoms `y` of one cell, in four fixed lanes.
#[inline(always)]
fn run_sum<F: Fn(f64) -> f64>(x: &[f64], atoms: &[f64], profile: &F) -> f64 {
    let mut lanes = [0.0; 4];
    if let [x0] = *x {
        let chunks = atoms.chunks_exact(4);
        let tail: f64 = chunks.remainder().iter().map(|y| profile((x0 - y) * (x0 - y))).sum();
        for chunk in chunks {
            for c in 0..4 {
                let t = x0 - chunk[c];
                lanes[c] += profile(t * t);
            }
        }
        return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail;
    }
    for (i, y) in atoms.chunks_exact(x.len()).enumerate() {
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        lanes[i % 4] += profile(r2);
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3])
}

/// `{-1, 0, 1}^d` in lexicographic order.
fn neighbour_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-1..=1).map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o);
                    v
                })
            })
            .collect();
    }
    out
}
