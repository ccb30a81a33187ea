//! Numeric building blocks shared by every module.
//!
//! Everything here is platform-independent: transcendental functions come
//! from `libm` or from the table-driven [`exp`] below, never from the host
//! C library, so simulations are bit-reproducible across machines.

use alloc::vec::Vec;

pub use libm::{erfc, fabs, log, log1p, pow, sqrt, tanh};

/// `2^(i/64)` for `i = 0..64`, correctly rounded.
static EXP2_TABLE: [f64; 64] = [
    f64::from_bits(0x3ff0000000000000),
    f64::from_bits(0x3ff02c9a3e778061),
    f64::from_bits(0x3ff059b0d3158574),
    f64::from_bits(0x3ff0874518759bc8),
    f64::from_bits(0x3ff0b5586cf9890f),
    f64::from_bits(0x3ff0e3ec32d3d1a2),
    f64::from_bits(0x3ff11301d0125b51),
    f64::from_bits(0x3ff1429aaea92de0),
    f64::from_bits(0x3ff172b83c7d517b),
    f64::from_bits(0x3ff1a35beb6fcb75),
    f64::from_bits(0x3ff1d4873168b9aa),
    f64::from_bits(0x3ff2063b88628cd6),
    f64::from_bits(0x3ff2387a6e756238),
    f64::from_bits(0x3ff26b4565e27cdd),
    f64::from_bits(0x3ff29e9df51fdee1),
    f64::from_bits(0x3ff2d285a6e4030b),
    f64::from_bits(0x3ff306fe0a31b715),
    f64::from_bits(0x3ff33c08b26416ff),
    f64::from_bits(0x3ff371a7373aa9cb),
    f64::from_bits(0x3ff3a7db34e59ff7),
    f64::from_bits(0x3ff3dea64c123422),
    f64::from_bits(0x3ff4160a21f72e2a),
    f64::from_bits(0x3ff44e086061892d),
    f64::from_bits(0x3ff486a2b5c13cd0),
    f64::from_bits(0x3ff4bfdad5362a27),
    f64::from_bits(0x3ff4f9b2769d2ca7),
    f64::from_bits(0x3ff5342b569d4f82),
    f64::from_bits(0x3ff56f4736b527da),
    f64::from_bits(0x3ff5ab07dd485429),
    f64::from_bits(0x3ff5e76f15ad2148),
    f64::from_bits(0x3ff6247eb03a5585),
    f64::from_bits(0x3ff6623882552225),
    f64::from_bits(0x3ff6a09e667f3bcd),
    f64::from_bits(0x3ff6dfb23c651a2f),
    f64::from_bits(0x3ff71f75e8ec5f74),
    f64::from_bits(0x3ff75feb564267c9),
    f64::from_bits(0x3ff7a11473eb0187),
    f64::from_bits(0x3ff7e2f336cf4e62),
    f64::from_bits(0x3ff82589994cce13),
    f64::from_bits(0x3ff868d99b4492ed),
    f64::from_bits(0x3ff8ace5422aa0db),
    f64::from_bits(0x3ff8f1ae99157736),
    f64::from_bits(0x3ff93737b0cdc5e5),
    f64::from_bits(0x3ff97d829fde4e50),
    f64::from_bits(0x3ff9c49182a3f090),
    f64::from_bits(0x3ffa0c667b5de565),
    f64::from_bits(0x3ffa5503b23e255d),
    f64::from_bits(0x3ffa9e6b5579fdbf),
    f64::from_bits(0x3ffae89f995ad3ad),
    f64::from_bits(0x3ffb33a2b84f15fb),
    f64::from_bits(0x3ffb7f76f2fb5e47),
    f64::from_bits(0x3ffbcc1e904bc1d2),
    f64::from_bits(0x3ffc199bdd85529c),
    f64::from_bits(0x3ffc67f12e57d14b),
    f64::from_bits(0x3ffcb720dcef9069),
    f64::from_bits(0x3ffd072d4a07897c),
    f64::from_bits(0x3ffd5818dcfba487),
    f64::from_bits(0x3ffda9e603db3285),
    f64::from_bits(0x3ffdfc97337b9b5f),
    f64::from_bits(0x3ffe502ee78b3ff6),
    f64::from_bits(0x3ffea4afa2a490da),
    f64::from_bits(0x3ffefa1bee615a27),
    f64::from_bits(0x3fff50765b6e4540),
    f64::from_bits(0x3fffa7c1819e90d8),
];

/// Natural exponential.
///
/// Table-driven (`2^(k/64)` times a degree-6 polynomial on a reduced
/// argument of magnitude at most `ln2/128`). Relative error stays below
/// `5e-16` on `[-708, 709]`; outside that range, and for non-finite input,
/// it defers to `libm::exp`. About three times faster than `libm::exp`,
/// which matters in the pairwise kernel loop.
#[inline(always)]
pub fn exp(x: f64) -> f64 {
    const N_LOG2E: f64 = 64.0 * core::f64::consts::LOG2_E;
    const LN2_HI_N: f64 = 6.931_471_803_691_238_164_90e-1 / 64.0;
    const LN2_LO_N: f64 = 1.908_214_929_270_587_700_02e-10 / 64.0;
    // 1.5 * 2^52: adding it rounds to an integer held in the low mantissa bits.
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    if !(x > -708.0 && x < 709.0) {
        return libm::exp(x);
    }
    let t = x * N_LOG2E + SHIFT;
    let kf = t - SHIFT;
    let r = (x - kf * LN2_HI_N) - kf * LN2_LO_N;
    let p = 1.0
        + r * (1.0
            + r * (0.5
                + r * (1.0 / 6.0 + r * (1.0 / 24.0 + r * (1.0 / 120.0 + r * (1.0 / 720.0))))));
    let ki = t.to_bits().wrapping_sub(SHIFT.to_bits()) as i64;
    let idx = (ki & 63) as usize;
    let e = ki >> 6;
    p * EXP2_TABLE[idx] * f64::from_bits(((e + 1023) as u64) << 52)
}

/// `e^x` for `x ≤ 0`, branch-free so that loops over it vectorize. Values
/// below `e^{-708}` flush to zero; relative error is a few ulp.
#[inline(always)]
pub fn exp_nonpositive(x: f64) -> f64 {
    const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    let xc = if x < -708.0 { -708.0 } else { x };
    let t = xc * core::f64::consts::LOG2_E + SHIFT;
    let kf = t - SHIFT;
    let r = (xc - kf * LN2_HI) - kf * LN2_LO;
    // Taylor polynomial to degree 13 on |r| ≤ ln2/2.
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    let scale = f64::from_bits(t.to_bits().wrapping_sub(SHIFT.to_bits()).wrapping_add(1023) << 52);
    let v = p * scale;
    if x < -708.0 {
        0.0
    } else {
        v
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline(always)]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline(always)]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * exp(-0.5 * x * x)
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile (Wichura's AS241, about 1e-16 relative accuracy).
///
/// Returns `-inf`/`+inf` at 0/1 and NaN outside `[0, 1]`.
pub fn normal_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if fabs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_672_7e3 * r + 3.343_057_558_358_812_810_5e4) * r
            + 6.726_577_092_700_870_085_3e4)
            * r
            + 4.592_195_393_154_987_145_7e4)
            * r
            + 1.373_169_376_550_946_112_5e4)
            * r
            + 1.971_590_950_306_551_442_7e3)
            * r
            + 1.331_416_678_917_843_774_5e2)
            * r
            + 3.387_132_872_796_366_608_0;
        let den = ((((((5.226_495_278_852_854_561_0e3 * r + 2.872_908_573_572_194_267_4e4) * r
            + 3.930_789_580_009_271_061_0e4)
            * r
            + 2.121_379_430_158_659_586_7e4)
            * r
            + 5.394_196_021_424_751_107_7e3)
            * r
            + 6.871_870_074_920_579_083_0e2)
            * r
            + 4.231_333_070_160_091_125_2e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = sqrt(-log(tail));
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414_076_4e-4 * r + 2.272_384_498_926_918_458_33e-2)
            * r
            + 2.417_807_251_774_506_117_7e-1)
            * r
            + 1.270_458_252_452_368_382_58)
            * r
            + 3.647_848_324_763_204_605_04)
            * r
            + 5.769_497_221_460_691_405_5)
            * r
            + 4.630_337_846_156_545_295_9)
            * r
            + 1.423_437_110_749_683_577_34;
        let den = ((((((1.050_750_071_644_416_843_24e-9 * r + 5.475_938_084_995_344_946e-4)
            * r
            + 1.519_866_656_361_645_719_66e-2)
            * r
            + 1.481_039_764_274_800_745_9e-1)
            * r
            + 6.897_673_349_851_000_045_5e-1)
            * r
            + 1.676_384_830_183_803_849_4)
            * r
            + 2.053_191_626_637_758_821_87)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_132_65e-7 * r + 2.711_555_568_743_487_578_15e-5)
            * r
            + 1.242_660_947_388_078_438_6e-3)
            * r
            + 2.653_218_952_657_612_309_3e-2)
            * r
            + 2.965_605_718_285_048_912_3e-1)
            * r
            + 1.784_826_539_917_291_335_8)
            * r
            + 5.463_784_911_164_114_369_9)
            * r
            + 6.657_904_643_501_103_777_2;
        let den = ((((((2.044_263_103_389_939_785_64e-15 * r + 1.421_511_758_316_445_888_7e-7)
            * r
            + 1.846_318_317_510_054_681_8e-5)
            * r
            + 7.868_691_311_456_132_591e-4)
            * r
            + 1.487_536_129_085_061_485_25e-2)
            * r
            + 1.369_298_809_227_358_053_1e-1)
            * r
            + 5.998_322_065_558_879_376_9e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Composite trapezoid rule with `intervals` equal subintervals.
pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let step = (hi - lo) / intervals as f64;
    let mut acc = CompensatedSum::new();
    acc.add(0.5 * f(lo));
    for k in 1..intervals {
        acc.add(f(lo + step * k as f64));
    }
    acc.add(0.5 * f(hi));
    acc.value() * step
}

/// Composite Simpson rule; `intervals` is rounded up to an even number.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let intervals = (intervals.max(2) + 1) & !1;
    let step = (hi - lo) / intervals as f64;
    let mut acc = CompensatedSum::new();
    acc.add(f(lo));
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(lo + step * k as f64));
    }
    acc.add(f(hi));
    acc.value() * step / 3.0
}

/// Simpson weights and nodes on `[lo, hi]`, for tensor-product rules.
pub(crate) fn simpson_nodes(lo: f64, hi: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let intervals = (intervals.max(2) + 1) & !1;
    let step = (hi - lo) / intervals as f64;
    let mut nodes = Vec::with_capacity(intervals + 1);
    let mut weights = Vec::with_capacity(intervals + 1);
    for k in 0..=intervals {
        nodes.push(lo + step * k as f64);
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weights.push(w * step / 3.0);
    }
    (nodes, weights)
}

/// Lower-triangular Cholesky factor of a row-major symmetric matrix.
///
/// Returns `None` unless the matrix is positive definite.
pub fn cholesky(matrix: &[f64], dim: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(matrix.len(), dim * dim);
    let mut l = alloc::vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = matrix[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * dim + i] = sqrt(s);
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular row-major `L`.
pub(crate) fn forward_solve(l: &[f64], dim: usize, b: &[f64]) -> Vec<f64> {
    let mut y = alloc::vec![0.0; dim];
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * y[k];
        }
        y[i] = s / l[i * dim + i];
    }
    y
}

/// Solves `L^T x = y` for lower-triangular row-major `L`.
pub(crate) fn backward_solve(l: &[f64], dim: usize, y: &[f64]) -> Vec<f64> {
    let mut x = alloc::vec![0.0; dim];
    for i in (0..dim).rev() {
        let mut s = y[i];
        for k in i + 1..dim {
            s -= l[k * dim + i] * x[k];
        }
        x[i] = s / l[i * dim + i];
    }
    x
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let mut even = 1.0; // V_0
    let mut odd = 2.0; // V_1
    if d == 0 {
        return even;
    }
    let mut k = 1;
    while k < d {
        k += 1;
        let next = 2.0 * core::f64::consts::PI / k as f64;
        if k % 2 == 0 {
            even *= next;
        } else {
            odd *= next;
        }
    }
    if d % 2 == 0 {
        even
    } else {
        odd
    }
}

/// `(1+u) ln(1+u) - u`, accurate for small `|u|`.
pub(crate) fn entropy_gap(u: f64) -> f64 {
    if fabs(u) < 1e-3 {
        // u^2/2 - u^3/6 + u^4/12 - u^5/20 + u^6/30
        let u2 = u * u;
        u2 * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 12.0 + u * (-1.0 / 20.0 + u * (1.0 / 30.0)))))
    } else {
        (1.0 + u) * log1p(u) - u
    }
}

#[cfg(test)]
#[path = "../tests/unit/math.rs"]
mod tests;
