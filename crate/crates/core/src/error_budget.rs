//! Soundness and completeness bookkeeping, input-randomness cost and
//! extractor error.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::entropy::{binary_entropy, EntropyCertificate};
use crate::error::{Error, Result};

/// Fraction of the soundness budget given to the extractor by default.
pub const DEFAULT_EXT_FRACTION: f64 = 1e-5;

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Binary relative entropy `D(x || p)` in nats.
pub fn binary_kl(x: f64, p: f64) -> f64 {
    let d = x - p;
    let a = if x <= 0.0 { 0.0 } else { x * (d / p).ln_1p() };
    let b = if x >= 1.0 {
        0.0
    } else {
        (1.0 - x) * (-d / (1.0 - p)).ln_1p()
    };
    (a + b).max(0.0)
}

/// Upper bound on `P(X < k_plus_1)` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf_bound(n: u64, k_plus_1: u64, p: f64) -> Result<f64> {
    if n == 0 || k_plus_1 == 0 || k_plus_1 > n {
        return Err(Error::invalid(format!(
            "binomial bound needs 1 <= k+1 <= n, got k+1 = {k_plus_1}, n = {n}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    let nf = n as f64;
    let x = k_plus_1 as f64 / nf;
    let z = (2.0 * nf * binary_kl(x, p)).sqrt();
    Ok(std_normal_cdf(if x >= p { z } else { -z }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Completeness {
    /// Upper bound on the probability that an honest run aborts.
    pub bound: f64,
    /// Set when the pass threshold is below one win, so the bound is the
    /// trivial `k + 1 = 1` case.
    pub degenerate: bool,
    pub k_plus_1: u64,
}

/// Abort probability bound for honest i.i.d. devices winning with
/// probability `omega`, when a run needs `n gamma (omega - delta)` wins.
pub fn completeness_error(n: u64, gamma: f64, omega: f64, delta: f64) -> Result<Completeness> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain {
            what: "gamma",
            value: gamma,
            range: "(0, 1]",
        });
    }
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::Domain {
            what: "omega",
            value: omega,
            range: "(0, 1]",
        });
    }
    let threshold = n as f64 * gamma * (omega - delta);
    let degenerate = threshold < 1.0;
    let k_plus_1 = threshold.max(0.0).ceil() as u64 + 1;
    if k_plus_1 > n {
        return Ok(Completeness {
            bound: 1.0,
            degenerate,
            k_plus_1,
        });
    }
    let p = gamma * omega;
    if p >= 1.0 {
        // every round is a won test round; abort only if n < threshold
        return Ok(Completeness {
            bound: 0.0,
            degenerate,
            k_plus_1,
        });
    }
    Ok(Completeness {
        bound: binomial_cdf_bound(n, k_plus_1, p)?,
        degenerate,
        k_plus_1,
    })
}

/// Smallest `delta` (to relative precision `1e-6`) whose completeness bound
/// is at most `eps_c`. Returns `omega` if no smaller value works.
pub fn delta_for_completeness(n: u64, gamma: f64, omega: f64, eps_c: f64) -> Result<f64> {
    if !(eps_c > 0.0 && eps_c < 1.0) {
        return Err(Error::Domain {
            what: "eps_c",
            value: eps_c,
            range: "(0, 1)",
        });
    }
    if completeness_error(n, gamma, omega, omega)?.bound > eps_c {
        return Ok(omega);
    }
    let (mut lo, mut hi) = (0.0, omega);
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if completeness_error(n, gamma, omega, mid)?.bound <= eps_c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Soundness of the composed protocol.
pub fn soundness_compose(eps_eat: f64, eps_ext: f64, eps_h: f64) -> f64 {
    eps_eat.max(eps_ext + 2.0 * eps_h)
}

/// Split of the soundness and completeness budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub eps_s: f64,
    pub eps_c: f64,
    pub eps_ext: f64,
    pub eps_h: f64,
    pub eps_eat: f64,
}

impl ErrorBudget {
    /// Default split: the extractor gets a small fixed fraction and the
    /// smoothing parameter takes the rest.
    pub fn from_targets(eps_s: f64, eps_c: f64) -> Result<Self> {
        Self::with_ext_fraction(eps_s, eps_c, DEFAULT_EXT_FRACTION)
    }

    pub fn with_ext_fraction(eps_s: f64, eps_c: f64, ext_fraction: f64) -> Result<Self> {
        for (what, v) in [
            ("eps_s", eps_s),
            ("eps_c", eps_c),
            ("ext_fraction", ext_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain {
                    what,
                    value: v,
                    range: "(0, 1)",
                });
            }
        }
        let eps_ext = ext_fraction * eps_s;
        let eps_h = (eps_s - eps_ext) / 2.0;
        Ok(Self {
            eps_s,
            eps_c,
            eps_ext,
            eps_h,
            eps_eat: eps_ext + 2.0 * eps_h,
        })
    }

    pub fn soundness(&self) -> f64 {
        soundness_compose(self.eps_eat, self.eps_ext, self.eps_h)
    }
}

/// Uniform bits needed to choose round types and test inputs.
pub fn input_randomness(n: u64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain {
            what: "gamma",
            value: gamma,
            range: "(0, 1)",
        });
    }
    Ok(n as f64 * (binary_entropy(gamma) + 2.0 * gamma) + 2.0)
}

/// Error of a two-universal extractor taking `k` bits of min-entropy to
/// `m` output bits.
pub fn extractor_error(k: f64, m: f64) -> Result<f64> {
    if k < m {
        return Err(Error::InsufficientEntropy {
            requested: m as usize,
            available: k,
        });
    }
    Ok((-(k - m) / 2.0).exp2())
}

/// Extractable output length (possibly negative) at extractor error `eps_ext`.
pub fn output_length(hmin: f64, eps_ext: f64) -> f64 {
    hmin - 2.0 * (1.0 / eps_ext).log2()
}

/// Output bits minus consumed input bits.
pub fn net_expansion(cert: &EntropyCertificate, n: u64, gamma: f64, eps_ext: f64) -> Result<f64> {
    Ok(output_length(cert.hmin_lower, eps_ext) - input_randomness(n, gamma)?)
}
