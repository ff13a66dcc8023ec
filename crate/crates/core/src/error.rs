use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "min-tradeoff function built for gamma = {function} but protocol uses gamma = {protocol}"
    )]
    GammaMismatch { function: f64, protocol: f64 },
    #[error("second-order term overflowed (log2 K = {log2_k:.1})")]
    Overflow { log2_k: f64 },
    #[error("convolution coefficient {value} is {distance:.3} from the nearest integer")]
    Precision { value: f64, distance: f64 },
    #[error("seed has {got} bits, expected {expected}")]
    SeedLength { expected: usize, got: usize },
    #[error("requested {requested} output bits but only {available:.1} bits of min-entropy are certified")]
    InsufficientEntropy { requested: usize, available: f64 },
    #[error("uniform bit source exhausted")]
    SourceExhausted,
    #[error("no positive net expansion for n up to {n_max:e}")]
    Infeasible { n_max: f64 },
    #[error("tally: {0}")]
    Tally(String),
    #[error("bit file: {0}")]
    BitFile(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical guards rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Overflow { .. } | Error::Precision { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
