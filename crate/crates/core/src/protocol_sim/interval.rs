//! Biased bits from uniform bits by the interval algorithm.
//!
//! The uniform source is read lazily as the binary expansion of a point
//! `U` in `[0, 1)`. The sampler keeps the current output frame `[0, R)` and
//! the dyadic interval `[lo, lo + w)` known to contain `U`, all as integers
//! in a common scale. Each output symbol splits the frame, reads source bits
//! until the known interval falls on one side, and renormalises.

use crate::error::{Error, Result};
use crate::extractor::Bits;

/// Source of independent fair bits.
pub trait BitSource {
    fn next_bit(&mut self) -> Option<bool>;
}

impl<I: Iterator<Item = bool>> BitSource for I {
    fn next_bit(&mut self) -> Option<bool> {
        self.next()
    }
}

/// Fair bits drawn 64 at a time from an RNG.
pub struct RngBits<R> {
    rng: R,
    word: u64,
    left: u32,
}

impl<R: rand::RngCore> RngBits<R> {
    pub fn new(rng: R) -> Self {
        Self {
            rng,
            word: 0,
            left: 0,
        }
    }
}

impl<R: rand::RngCore> BitSource for RngBits<R> {
    fn next_bit(&mut self) -> Option<bool> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        Some(b)
    }
}

const RENORM_BELOW: u128 = 1 << 62;
const RENORM_SHIFT: u32 = 62;

/// Stateful sampler of i.i.d. bits equal to one with probability `gamma`.
///
/// The split of a frame of size `R >= 2^62` gives the one-symbol
/// `floor(R * gamma_fixed / 2^64)` points, where `gamma_fixed` is `gamma`
/// rounded to a multiple of `2^-64`; the realised bias therefore matches
/// `gamma` to within `2^-61`.
#[derive(Debug, Clone)]
pub struct IntervalSampler {
    gamma_fixed: u64,
    frame: u128,
    lo: u128,
    width: u128,
    consumed: u64,
}

impl IntervalSampler {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Domain {
                what: "gamma",
                value: gamma,
                range: "(0, 1)",
            });
        }
        let gamma_fixed = (gamma * 2f64.powi(64)).round().min(u64::MAX as f64) as u64;
        Ok(Self {
            gamma_fixed: gamma_fixed.max(1),
            frame: 1 << RENORM_SHIFT,
            lo: 0,
            width: 1 << RENORM_SHIFT,
            consumed: 0,
        })
    }

    /// Uniform bits read so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    fn ones_region(&self) -> u128 {
        let g = self.gamma_fixed as u128;
        let hi = self.frame >> 64;
        let lo = self.frame & (u64::MAX as u128);
        hi * g + ((lo * g) >> 64)
    }

    fn scale(&mut self, shift: u32) {
        self.frame <<= shift;
        self.lo <<= shift;
        self.width <<= shift;
    }

    pub fn sample<S: BitSource + ?Sized>(&mut self, source: &mut S) -> Result<bool> {
        if self.frame < RENORM_BELOW {
            self.scale(RENORM_SHIFT);
        }
        // [0, split) emits 0, [split, frame) emits 1
        let mut split = self.frame - self.ones_region();
        loop {
            if self.lo + self.width <= split {
                self.frame = split;
                return Ok(false);
            }
            if self.lo >= split {
                self.lo -= split;
                self.frame -= split;
                return Ok(true);
            }
            if self.width == 1 {
                if self.frame >= 1 << 126 {
                    return Err(Error::invalid("interval sampler ran out of precision"));
                }
                self.scale(1);
                split <<= 1;
            }
            self.read(source)?;
        }
    }

    fn read<S: BitSource + ?Sized>(&mut self, source: &mut S) -> Result<()> {
        let bit = source.next_bit().ok_or(Error::SourceExhausted)?;
        self.consumed += 1;
        self.width >>= 1;
        if bit {
            self.lo += self.width;
        }
        Ok(())
    }
}

/// Draws `count` bits of bias `gamma` and reports how many uniform bits
/// were consumed.
pub fn biased_bits<S: BitSource + ?Sized>(
    gamma: f64,
    count: usize,
    source: &mut S,
) -> Result<(Bits, u64)> {
    let mut sampler = IntervalSampler::new(gamma)?;
    let mut out = Bits::zeros(count);
    for i in 0..count {
        if sampler.sample(source)? {
            out.set(i, true);
        }
    }
    Ok((out, sampler.consumed()))
}
