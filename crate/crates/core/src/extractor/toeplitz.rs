use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::bits::Bits;
use crate::error::{Error, Result};
use crate::error_budget::extractor_error;

/// Largest block length; keeps convolution coefficients exact in `f64`.
pub const MAX_BLOCK_LEN: usize = 1 << 26;
pub const DEFAULT_BLOCK_LEN: usize = 1 << 20;
/// Output rows handled by one transform; larger outputs are split evenly.
pub const MAX_TILE_ROWS: usize = 1 << 24;
const ROUNDING_GUARD: f64 = 0.25;

/// An `m x n` Toeplitz matrix over GF(2) given by its seed and a column
/// block length for the FFT path. Entry `(i, j)` is `seed[(n - 1) + i - j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzJob {
    n_bits: usize,
    m_bits: usize,
    block_len: usize,
    tile_rows: usize,
    seed: Bits,
}

impl ToeplitzJob {
    pub fn new(n_bits: usize, m_bits: usize, block_len: usize, seed: Bits) -> Result<Self> {
        check_lengths(n_bits, m_bits, seed.len())?;
        if block_len == 0 || block_len > n_bits || block_len > MAX_BLOCK_LEN {
            return Err(Error::invalid(format!(
                "block length {block_len} must lie in 1..={}",
                n_bits.min(MAX_BLOCK_LEN)
            )));
        }
        Ok(Self {
            n_bits,
            m_bits,
            block_len,
            tile_rows: MAX_TILE_ROWS,
            seed,
        })
    }

    /// Caps the output rows per transform (at most [`MAX_TILE_ROWS`]).
    pub fn with_tile_rows(mut self, rows: usize) -> Result<Self> {
        if rows == 0 || rows > MAX_TILE_ROWS {
            return Err(Error::invalid(format!(
                "tile rows must lie in 1..={MAX_TILE_ROWS}"
            )));
        }
        self.tile_rows = rows;
        Ok(self)
    }

    /// Job with the default block length, capped at the input length.
    pub fn with_default_blocks(n_bits: usize, m_bits: usize, seed: Bits) -> Result<Self> {
        Self::new(n_bits, m_bits, DEFAULT_BLOCK_LEN.min(n_bits.max(1)), seed)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn m_bits(&self) -> usize {
        self.m_bits
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn blocks(&self) -> usize {
        self.n_bits.div_ceil(self.block_len)
    }

    pub fn seed(&self) -> &Bits {
        &self.seed
    }
}

fn check_lengths(n: usize, m: usize, seed_len: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("input and output lengths must be positive"));
    }
    if m > n {
        return Err(Error::invalid(format!(
            "output length {m} exceeds input length {n}"
        )));
    }
    if seed_len != m + n - 1 {
        return Err(Error::SeedLength {
            expected: m + n - 1,
            got: seed_len,
        });
    }
    Ok(())
}

/// Direct `O(mn)` multiplication.
pub fn toeplitz_naive(seed: &Bits, input: &Bits, m_bits: usize) -> Result<Bits> {
    let n = input.len();
    check_lengths(n, m_bits, seed.len())?;
    let mut out = Bits::zeros(m_bits);
    for i in 0..m_bits {
        let mut acc = false;
        for j in 0..n {
            acc ^= seed.get(n - 1 + i - j) & input.get(j);
        }
        out.set(i, acc);
    }
    Ok(out)
}

/// Row `i` of the product, computed directly in `O(n)`.
pub fn toeplitz_row(seed: &Bits, input: &Bits, m_bits: usize, i: usize) -> Result<bool> {
    let n = input.len();
    check_lengths(n, m_bits, seed.len())?;
    if i >= m_bits {
        return Err(Error::invalid(format!(
            "row {i} out of range for {m_bits} rows"
        )));
    }
    Ok((0..n).fold(false, |acc, j| {
        acc ^ (seed.get(n - 1 + i - j) & input.get(j))
    }))
}

struct Plans {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Blocked FFT multiplication. Column block `j` covers columns
/// `j l .. (j + 1) l`; the last block is padded with zero input bits. Rows
/// are split evenly into tiles of at most the job's tile size. Each tile product is
/// read off a circular convolution of the tile's seed window with the
/// block's input slice, and the column blocks are XORed together.
pub fn toeplitz_fft(job: &ToeplitzJob, input: &Bits) -> Result<Bits> {
    if input.len() != job.n_bits {
        return Err(Error::invalid(format!(
            "input has {} bits, job expects {}",
            input.len(),
            job.n_bits
        )));
    }
    let row_tiles = job.m_bits.div_ceil(job.tile_rows);
    let rows = job.m_bits.div_ceil(row_tiles);
    let size = (rows + job.block_len - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let plans = Plans {
        size,
        forward: planner.plan_fft_forward(size),
        inverse: planner.plan_fft_inverse(size),
    };
    let mut out = Bits::default();
    for r in 0..row_tiles {
        let row0 = r * rows;
        let tile_rows = rows.min(job.m_bits - row0);
        let tile = (0..job.blocks())
            .into_par_iter()
            .map(|j| tile_product(job, input, row0, tile_rows, j, &plans))
            .try_reduce(
                || Bits::zeros(tile_rows),
                |mut a, b| {
                    a.xor_assign(&b);
                    Ok(a)
                },
            )?;
        out.extend(&tile);
    }
    Ok(out)
}

fn tile_product(
    job: &ToeplitzJob,
    input: &Bits,
    row0: usize,
    rows: usize,
    block: usize,
    plans: &Plans,
) -> Result<Bits> {
    let (n, l) = (job.n_bits, job.block_len);
    let col0 = block * l;
    // seed window w[k] = seed[n - col0 - l + row0 + k], k < rows + l - 1
    let base = n as isize - col0 as isize - l as isize + row0 as isize;
    let mut buf = vec![Complex::new(0.0, 0.0); plans.size];
    for (k, z) in buf.iter_mut().enumerate().take(rows + l - 1) {
        let idx = base + k as isize;
        if idx >= 0 && job.seed.get(idx as usize) {
            z.re = 1.0;
        }
    }
    for (c, z) in buf.iter_mut().enumerate().take(l.min(n - col0)) {
        if input.get(col0 + c) {
            z.im = 1.0;
        }
    }
    // both real transforms from one complex transform
    plans.forward.process(&mut buf);
    let size = plans.size;
    let mut prod = vec![Complex::new(0.0, 0.0); size];
    for (k, p) in prod.iter_mut().enumerate() {
        let zk = buf[k];
        let zr = buf[(size - k) % size].conj();
        let fa = (zk + zr) * 0.5;
        let fb = (zk - zr) * Complex::new(0.0, -0.5);
        *p = fa * fb;
    }
    drop(buf);
    plans.inverse.process(&mut prod);
    let scale = 1.0 / size as f64;
    let mut out = Bits::zeros(rows);
    for i in 0..rows {
        let v = prod[l - 1 + i].re * scale;
        let r = v.round();
        let dist = (v - r).abs();
        if dist > ROUNDING_GUARD {
            return Err(Error::Precision {
                value: v,
                distance: dist,
            });
        }
        if (r as i64) & 1 == 1 {
            out.set(i, true);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub n_bits: usize,
    pub m_bits: usize,
    pub block_len: usize,
    pub blocks: usize,
    pub k_min_entropy: f64,
    pub eps_ext: f64,
}

/// Hashes `input` to `m_bits` bits and reports the extractor error for the
/// stated min-entropy. The seed stays with the job and may be reused.
pub fn extract(
    job: &ToeplitzJob,
    input: &Bits,
    k_min_entropy: f64,
) -> Result<(Bits, ExtractionSummary)> {
    let eps_ext = extractor_error(k_min_entropy, job.m_bits as f64)?;
    let output = toeplitz_fft(job, input)?;
    Ok((
        output,
        ExtractionSummary {
            n_bits: job.n_bits,
            m_bits: job.m_bits,
            block_len: job.block_len,
            blocks: job.blocks(),
            k_min_entropy,
            eps_ext,
        },
    ))
}
