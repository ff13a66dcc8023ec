//! Seeded simulation of the spot-checking protocol.
//!
//! Randomness comes from ChaCha8 with one stream per role (round type,
//! Alice's input, Bob's input, device). Rounds are grouped in fixed chunks
//! of [`CHUNK_ROUNDS`]; chunk `c` reads every stream from word offset
//! `c * 2^24`, so a chunk's rounds depend only on the seed and the chunk
//! index. Chunks are simulated in parallel and merged in order, and the
//! result does not depend on how chunks are scheduled.

use std::ops::Range;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::device::DeviceModel;
use super::interval::{BitSource, IntervalSampler, RngBits};
use super::tally::TrialTally;
use crate::error::{Error, Result};
use crate::extractor::Bits;

pub const CHUNK_ROUNDS: u64 = 1 << 16;
const CHUNK_WORDS: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
enum Role {
    RoundType = 0,
    AliceInput = 1,
    BobInput = 2,
    Device = 3,
}

fn stream(seed: u64, role: Role, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role as u64);
    rng.set_word_pos(chunk as u128 * CHUNK_WORDS);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Score {
    NoTest,
    Lose,
    Win,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub test: bool,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    /// Bob's output; zero on generation rounds.
    pub b: u8,
    pub score: Score,
}

/// Raw output strings: Alice's output on every round and Bob's output on
/// test rounds only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawOutputs {
    pub alice: Bits,
    pub bob_test: Bits,
}

impl RawOutputs {
    /// Extractor input `A || B_test`.
    pub fn extractor_input(&self) -> Bits {
        let mut v = self.alice.clone();
        v.extend(&self.bob_test);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub keep_records: bool,
    pub keep_outputs: bool,
    /// Records and outputs are only kept for runs of at most this many rounds.
    pub record_limit: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            keep_records: false,
            keep_outputs: false,
            record_limit: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub n: u64,
    pub gamma: f64,
    pub omega_exp: f64,
    pub delta: f64,
    pub model: DeviceModel,
    pub seed: u64,
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Domain {
                what: "gamma",
                value: self.gamma,
                range: "(0, 1]",
            });
        }
        if !self.delta.is_finite() || !self.omega_exp.is_finite() {
            return Err(Error::invalid("omega_exp and delta must be finite"));
        }
        self.model.validate()
    }

    pub fn chunks(&self) -> u64 {
        self.n.div_ceil(CHUNK_ROUNDS)
    }

    /// Number of wins needed to pass.
    pub fn threshold(&self) -> f64 {
        self.n as f64 * self.gamma * (self.omega_exp - self.delta)
    }

    /// Simulates the rounds of chunks `range`.
    pub fn simulate_chunks(&self, range: Range<u64>, opts: &SimOptions) -> Result<Partial> {
        self.validate()?;
        let keep = self.n <= opts.record_limit;
        let cdf = self.cdf()?;
        let mut part = Partial {
            records: (keep && opts.keep_records).then(Vec::new),
            outputs: (keep && opts.keep_outputs).then(RawOutputs::default),
            ..Partial::default()
        };
        for c in range {
            let start = c * CHUNK_ROUNDS;
            let end = (start + CHUNK_ROUNDS).min(self.n);
            if start >= end {
                break;
            }
            self.run_chunk(c, end - start, &cdf, &mut part)?;
        }
        Ok(part)
    }

    fn cdf(&self) -> Result<[[[f64; 3]; 2]; 2]> {
        let mut cdf = [[[0.0; 3]; 2]; 2];
        for x in 0..2u8 {
            for y in 0..2u8 {
                let p = self.model.setting_distribution(x, y)?;
                let c = &mut cdf[x as usize][y as usize];
                c[0] = p[0][0];
                c[1] = c[0] + p[0][1];
                c[2] = c[1] + p[1][0];
            }
        }
        Ok(cdf)
    }

    fn run_chunk(
        &self,
        chunk: u64,
        rounds: u64,
        cdf: &[[[f64; 3]; 2]; 2],
        part: &mut Partial,
    ) -> Result<()> {
        let mut round_bits = RngBits::new(stream(self.seed, Role::RoundType, chunk));
        let mut alice_in = RngBits::new(stream(self.seed, Role::AliceInput, chunk));
        let mut bob_in = RngBits::new(stream(self.seed, Role::BobInput, chunk));
        let mut device = stream(self.seed, Role::Device, chunk);
        let mut sampler = if self.gamma < 1.0 {
            Some(IntervalSampler::new(self.gamma)?)
        } else {
            None
        };
        for _ in 0..rounds {
            let test = match sampler.as_mut() {
                Some(s) => s.sample(&mut round_bits)?,
                None => true,
            };
            let (x, y) = if test {
                part.uniform_bits += 2;
                (
                    alice_in.next_bit().ok_or(Error::SourceExhausted)? as u8,
                    bob_in.next_bit().ok_or(Error::SourceExhausted)? as u8,
                )
            } else {
                (0, 0)
            };
            let u = (device.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let c = &cdf[x as usize][y as usize];
            let (a, b) = if u < c[0] {
                (0u8, 0u8)
            } else if u < c[1] {
                (0, 1)
            } else if u < c[2] {
                (1, 0)
            } else {
                (1, 1)
            };
            let score = if test {
                part.tally.test[x as usize][y as usize][a as usize][b as usize] += 1;
                if a ^ b == x & y {
                    Score::Win
                } else {
                    Score::Lose
                }
            } else {
                part.tally.generation[a as usize][b as usize] += 1;
                Score::NoTest
            };
            if let Some(out) = part.outputs.as_mut() {
                out.alice.push(a == 1);
                if test {
                    out.bob_test.push(b == 1);
                }
            }
            if let Some(rec) = part.records.as_mut() {
                rec.push(RoundRecord {
                    test,
                    x,
                    y,
                    a,
                    b: if test { b } else { 0 },
                    score,
                });
            }
        }
        if let Some(s) = sampler {
            part.uniform_bits += s.consumed();
        }
        Ok(())
    }
}

/// Result of simulating a contiguous range of chunks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partial {
    pub tally: TrialTally,
    pub uniform_bits: u64,
    pub records: Option<Vec<RoundRecord>>,
    pub outputs: Option<RawOutputs>,
}

impl Partial {
    /// Appends a partial that covers the chunks right after `self`.
    pub fn merge(mut self, next: Partial) -> Partial {
        self.tally += &next.tally;
        self.uniform_bits += next.uniform_bits;
        if let (Some(a), Some(b)) = (self.records.as_mut(), next.records) {
            a.extend(b);
        }
        if let (Some(a), Some(b)) = (self.outputs.as_mut(), next.outputs) {
            a.alice.extend(&b.alice);
            a.bob_test.extend(&b.bob_test);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub spec: RunSpec,
    pub tally: TrialTally,
    pub wins: u64,
    pub threshold: f64,
    pub abort: bool,
    /// Uniform bits spent on round types and test inputs.
    pub uniform_bits: u64,
    pub records: Option<Vec<RoundRecord>>,
    pub outputs: Option<RawOutputs>,
}

impl Transcript {
    pub fn from_partial(spec: RunSpec, part: Partial) -> Self {
        let wins = part.tally.wins();
        let threshold = spec.threshold();
        Transcript {
            spec,
            tally: part.tally,
            wins,
            threshold,
            abort: (wins as f64) < threshold,
            uniform_bits: part.uniform_bits,
            records: part.records,
            outputs: part.outputs,
        }
    }
}

/// Runs all `n` rounds in parallel chunks.
pub fn run_protocol(spec: &RunSpec, opts: &SimOptions) -> Result<Transcript> {
    spec.validate()?;
    let chunks = spec.chunks();
    // groups of chunks per task keep the merge cheap for large runs
    let group = (chunks / 1024).max(1);
    let tasks = chunks.div_ceil(group);
    let part = (0..tasks)
        .into_par_iter()
        .map(|i| spec.simulate_chunks(i * group..((i + 1) * group).min(chunks), opts))
        .try_reduce_with(|a, b| Ok(a.merge(b)))
        .unwrap_or_else(|| spec.simulate_chunks(0..0, opts))?;
    Ok(Transcript::from_partial(*spec, part))
}
