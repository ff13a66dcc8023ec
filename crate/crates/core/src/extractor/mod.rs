//! Toeplitz hashing over GF(2): a direct reference multiplication and a
//! blocked FFT path, plus the packed bit vectors both operate on.

mod bits;
pub mod toeplitz;

pub use bits::Bits;
pub use toeplitz::{
    extract, toeplitz_fft, toeplitz_naive, toeplitz_row, ExtractionSummary, ToeplitzJob,
    DEFAULT_BLOCK_LEN, MAX_BLOCK_LEN, MAX_TILE_ROWS,
};
