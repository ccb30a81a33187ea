//! Exact all-pairs evaluation in symmetric tiles.
//!
//! Tile `(I, J)` with `I ≤ J` covers particles `I·T..` against atoms `J·T..`
//! and, by symmetry of the kernel, the transposed pairs as well. Tiles are
//! processed in waves `J = 0, 1, …`; the tiles of a wave run in parallel and
//! their partial sums are merged in a fixed order, so the result does not
//! depend on the executor.

use alloc::vec;
use alloc::vec::Vec;

use super::pairs::{BlockPlan, PairKernel, PAIR_TILE};
use crate::exec::Executor;
use crate::kernels::Profile;
use crate::math::CompensatedSum;

pub(crate) fn block_sums<E: Executor>(plan: &BlockPlan<'_>, exec: &E) -> Vec<f64> {
    let n = plan.n();
    let width = plan.width();
    let tiles = n.div_ceil(PAIR_TILE);
    let mut acc = vec![CompensatedSum::new(); n * width];
    for wave in 0..tiles {
        let parts = exec.map(wave + 1, |tile| compute_tile(plan, tile, wave));
        for (tile, (rows, cols)) in parts.into_iter().enumerate() {
            merge(&mut acc, tile * PAIR_TILE * width, &rows);
            if tile != wave {
                merge(&mut acc, wave * PAIR_TILE * width, &cols);
            }
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

fn merge(acc: &mut [CompensatedSum], start: usize, part: &[f64]) {
    for (slot, v) in acc[start..start + part.len()].iter_mut().zip(part) {
        slot.add(*v);
    }
}

fn range(tile: usize, n: usize) -> core::ops::Range<usize> {
    tile * PAIR_TILE..((tile + 1) * PAIR_TILE).min(n)
}

/// Row sums for tile `row_tile` and, off the diagonal, column sums for tile
/// `col_tile`.
fn compute_tile(plan: &BlockPlan<'_>, row_tile: usize, col_tile: usize) -> (Vec<f64>, Vec<f64>) {
    let n = plan.n();
    let width = plan.width();
    let rows = range(row_tile, n);
    let cols = range(col_tile, n);
    let diagonal = row_tile == col_tile;
    let mut row_sums = vec![0.0; rows.len() * width];
    let mut col_sums = if diagonal {
        Vec::new()
    } else {
        vec![0.0; cols.len() * width]
    };
    if plan.sums_only() && plan.d() == 1 {
        if let PairKernel::Radial(profile) = plan.kernel() {
            // One copy of the loop per profile, so the profile branch is gone
            // from the inner loop.
            let x = plan.coords();
            match profile {
                Profile::Gaussian => sums_only_1d(
                    x,
                    |r2| Profile::Gaussian.eval(r2),
                    rows,
                    cols,
                    diagonal,
                    &mut row_sums,
                    &mut col_sums,
                ),
                Profile::Epanechnikov => sums_only_1d(
                    x,
                    |r2| Profile::Epanechnikov.eval(r2),
                    rows,
                    cols,
                    diagonal,
                    &mut row_sums,
                    &mut col_sums,
                ),
                Profile::Uniform => sums_only_1d(
                    x,
                    |r2| Profile::Uniform.eval(r2),
                    rows,
                    cols,
                    diagonal,
                    &mut row_sums,
                    &mut col_sums,
                ),
            }
            return (row_sums, col_sums);
        }
    }
    let mut scratch = plan.scratch();
    for (a, k) in rows.clone().enumerate() {
        let start = if diagonal { k } else { cols.start };
        for l in start..cols.end {
            let weight = plan.pair_weight(k, l, &mut scratch);
            let b = l - cols.start;
            plan.accumulate(
                k,
                l,
                weight,
                &mut row_sums[a * width..(a + 1) * width],
                &mut scratch,
            );
            if l == k {
                continue;
            }
            if diagonal {
                // Row `l` lives in the same tile.
                plan.accumulate(
                    l,
                    k,
                    weight,
                    &mut row_sums[b * width..(b + 1) * width],
                    &mut scratch,
                );
            } else {
                plan.accumulate(
                    l,
                    k,
                    weight,
                    &mut col_sums[b * width..(b + 1) * width],
                    &mut scratch,
                );
            }
        }
    }
    (row_sums, col_sums)
}

/// Kernel sums only, scalar blocks: the hot path of the denominator.
#[inline(always)]
fn sums_only_1d<F: Fn(f64) -> f64>(
    x: &[f64],
    profile: F,
    rows: core::ops::Range<usize>,
    cols: core::ops::Range<usize>,
    diagonal: bool,
    row_sums: &mut [f64],
    col_sums: &mut [f64],
) {
    let mut weights = [0.0; PAIR_TILE];
    let targets = &x[cols.clone()];
    for (a, k) in rows.clone().enumerate() {
        let xk = x[k];
        let (skip, w) = if diagonal {
            let skip = k - cols.start;
            (skip, &mut weights[skip..targets.len()])
        } else {
            (0, &mut weights[..targets.len()])
        };
        for (slot, &y) in w.iter_mut().zip(&targets[skip..]) {
            let t = xk - y;
            *slot = profile(t * t);
        }
        let mut lanes = [0.0; 4];
        let chunks = w.chunks_exact(4);
        let tail: f64 = chunks.remainder().iter().sum();
        for chunk in chunks {
            for c in 0..4 {
                lanes[c] += chunk[c];
            }
        }
        row_sums[a] += (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail;
        if diagonal {
            // Entries after the self pair also belong to later rows of this tile.
            for (b, v) in w.iter().enumerate().skip(1) {
                row_sums[a + b] += v;
            }
        } else {
            for (slot, v) in col_sums.iter_mut().zip(w.iter()) {
                *slot += v;
            }
        }
    }
}
