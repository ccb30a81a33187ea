//! Counter-based random numbers.
//!
//! Every Gaussian increment is a pure function of `(seed, domain, particle,
//! slot, step)`: the tuple is the Philox-4x32-10 counter, the seed is the key.
//! Nothing depends on evaluation order, worker count or ensemble size, so
//! growing `n` leaves the first particles' noise untouched.

use crate::math::normal_quantile;

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// The Philox-4x32 bijection with 10 rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Independent stream families sharing one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Domain {
    /// Draws from the initial law.
    Init = 1,
    /// Brownian increments of the time stepper.
    Noise = 2,
    /// Auxiliary Monte Carlo (assumption checks, random test instances).
    Auxiliary = 3,
}

/// Largest per-particle slot index (`block * d + component`).
pub const MAX_SLOT: u32 = (1 << 28) - 1;

/// Counter address of a single draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamAddress {
    pub domain: Domain,
    pub particle: u64,
    pub slot: u32,
    pub step: u32,
}

impl StreamAddress {
    fn counter(&self) -> [u32; 4] {
        debug_assert!(self.slot <= MAX_SLOT);
        [
            self.particle as u32,
            (self.particle >> 32) as u32,
            self.step,
            ((self.domain as u32) << 28) | (self.slot & MAX_SLOT),
        ]
    }
}

/// Keyed access to the counter-based generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseKey {
    key: [u32; 2],
}

impl NoiseKey {
    pub fn new(seed: u64) -> Self {
        Self {
            key: [seed as u32, (seed >> 32) as u32],
        }
    }

    /// Raw 128 output bits for an address.
    pub fn block(&self, addr: StreamAddress) -> [u32; 4] {
        philox4x32(addr.counter(), self.key)
    }

    /// Uniform draw in the open interval (0, 1) with 53 random bits.
    pub fn uniform(&self, addr: StreamAddress) -> f64 {
        let w = self.block(addr);
        bits_to_open_unit(((w[0] as u64) << 32) | w[1] as u64)
    }

    /// Standard normal draw via the inverse distribution function.
    pub fn normal(&self, addr: StreamAddress) -> f64 {
        normal_quantile(self.uniform(addr))
    }
}

#[inline]
fn bits_to_open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Sequential generator over one `(domain, particle, slot)` lane; each call
/// advances the `step` coordinate of the counter.
///
/// Used where a variable number of draws is needed (rejection sampling,
/// random test instances). Still a pure function of the lane and the call
/// index.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: NoiseKey,
    domain: Domain,
    particle: u64,
    slot: u32,
    position: u64,
    buffer: [u32; 4],
    used: usize,
}

impl CounterRng {
    pub fn new(seed: u64, domain: Domain, particle: u64, slot: u32) -> Self {
        Self {
            key: NoiseKey::new(seed),
            domain,
            particle,
            slot: slot & MAX_SLOT,
            position: 0,
            buffer: [0; 4],
            used: 4,
        }
    }

    pub fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            // Lanes with more than 2^32 blocks spill into the next slot.
            let slot = self.slot.wrapping_add((self.position >> 32) as u32) & MAX_SLOT;
            self.buffer = self.key.block(StreamAddress {
                domain: self.domain,
                particle: self.particle,
                slot,
                step: self.position as u32,
            });
            self.position += 1;
            self.used = 0;
        }
        let v = self.buffer[self.used];
        self.used += 1;
        v
    }

    pub fn next_u64(&mut self) -> u64 {
        ((self.next_u32() as u64) << 32) | self.next_u32() as u64
    }

    /// Uniform in (0, 1).
    pub fn uniform(&mut self) -> f64 {
        bits_to_open_unit(self.next_u64())
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    /// Uniform integer in `0..bound` (`bound > 0`), by rejection.
    pub fn below(&mut self, bound: u32) -> u32 {
        let zone = u32::MAX - (u32::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u32();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Standard exponential draw.
    pub fn exponential(&mut self) -> f64 {
        -crate::math::log(self.uniform())
    }
}

#[cfg(test)]
#[path = "../tests/unit/rng.rs"]
mod tests;
