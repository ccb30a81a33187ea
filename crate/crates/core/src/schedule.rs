//! Bandwidth/floor schedule and the error bound it balances.
//!
//! With `h = (¼ log n)^{-r/(dr+4)}` and `ε = h^{2/r} √C`, the bound
//! `C√k (e^{C/(h^d ε²)} / (√(n h^d) ε) + h + ε^{r/2})` decays like
//! `(log n)^{-r/(dr+4)}`. `C` is not known; it is an input.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::{self, log, pow, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulePoint {
    pub n: f64,
    pub d: usize,
    pub r: f64,
    pub c: f64,
    pub h: f64,
    pub epsilon: f64,
}

fn check_common(d: usize, r: f64, c: f64) -> Result<()> {
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", "must lie in (0, 1)"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("C", "must be positive and finite"));
    }
    Ok(())
}

/// `n` is real so that, e.g., `n = e⁴` can be used directly.
pub fn schedule(n: f64, d: usize, r: f64, c: f64) -> Result<SchedulePoint> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(invalid("n", "must exceed 1 so that log n > 0"));
    }
    check_common(d, r, c)?;
    let h = pow(0.25 * log(n), -rate_exponent(d, r));
    let epsilon = pow(h, 2.0 / r) * sqrt(c);
    Ok(SchedulePoint { n, d, r, c, h, epsilon })
}

/// `r / (d r + 4)`.
pub fn rate_exponent(d: usize, r: f64) -> f64 {
    r / (d as f64 * r + 4.0)
}

/// `C √k (log n)^{-r/(dr+4)}`.
pub fn theorem_rate(n: f64, d: usize, k: usize, r: f64, c: f64) -> f64 {
    c * sqrt(k as f64) * pow(log(n), -rate_exponent(d, r))
}

/// The bound at `(h, ε)`. The exponential term is formed in log space, so
/// the result is `+∞` exactly when the true value overflows.
pub fn rate_bound(h: f64, epsilon: f64, n: f64, d: usize, k: usize, r: f64, c: f64) -> Result<f64> {
    if !(h > 0.0 && epsilon > 0.0 && n > 0.0) {
        return Err(invalid("h, epsilon, n", "must be positive"));
    }
    if k == 0 {
        return Err(invalid("k", "must be positive"));
    }
    check_common(d, r, c)?;
    let hd = pow(h, d as f64);
    let log_first = c / (hd * epsilon * epsilon) - 0.5 * log(n * hd) - log(epsilon);
    let first = math::exp(log_first);
    Ok(c * sqrt(k as f64) * (first + h + pow(epsilon, 0.5 * r)))
}

/// Log-spaced search grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateGrid {
    pub h: (f64, f64),
    pub epsilon: (f64, f64),
    pub points: (usize, usize),
}

impl RateGrid {
    fn axis(range: (f64, f64), points: usize) -> Vec<f64> {
        let (lo, hi) = (log(range.0), log(range.1));
        if points == 1 {
            return alloc::vec![range.0];
        }
        // Endpoints exactly, so a grid edge never rounds past the range.
        (0..points)
            .map(|i| match i {
                0 => range.0,
                i if i == points - 1 => range.1,
                i => math::exp(lo + (hi - lo) * i as f64 / (points - 1) as f64),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptimum {
    pub h: f64,
    pub epsilon: f64,
    pub value: f64,
    /// The minimiser sits on the edge of the grid, so the true optimum may
    /// lie outside it.
    pub on_boundary: bool,
}

/// Exhaustive search; ties keep the first point in `(h, ε)` order.
pub fn optimize_rate(n: f64, d: usize, k: usize, r: f64, c: f64, grid: &RateGrid) -> Result<RateOptimum> {
    let (ph, pe) = grid.points;
    if ph == 0 || pe == 0 {
        return Err(invalid("grid", "needs at least one point per axis"));
    }
    for (lo, hi) in [grid.h, grid.epsilon] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid("grid", "ranges must satisfy 0 < lo <= hi < inf"));
        }
    }
    let hs = RateGrid::axis(grid.h, ph);
    let es = RateGrid::axis(grid.epsilon, pe);
    let mut best = (f64::INFINITY, 0, 0);
    for (i, &h) in hs.iter().enumerate() {
        for (j, &e) in es.iter().enumerate() {
            let v = rate_bound(h, e, n, d, k, r, c)?;
            if v < best.0 {
                best = (v, i, j);
            }
        }
    }
    let (value, i, j) = best;
    let on_boundary = (ph > 1 && (i == 0 || i == ph - 1)) || (pe > 1 && (j == 0 || j == pe - 1));
    Ok(RateOptimum { h: hs[i], epsilon: es[j], value, on_boundary })
}
