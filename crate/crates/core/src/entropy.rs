//! Single-round entropy bounds for spot-checking CHSH and the finite-round
//! certificate assembled from them.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer;

/// Smallest CHSH win probability reachable by quantum devices.
pub const QUANTUM_MIN: f64 = 0.5 - SQRT_2 / 4.0;
/// Largest CHSH win probability reachable by quantum devices.
pub const QUANTUM_MAX: f64 = 0.5 + SQRT_2 / 4.0;
/// Best win probability of a classical strategy.
pub const CLASSICAL_MAX: f64 = 0.75;

/// Win probability `q` of a single CHSH test round.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TestDistribution(f64);

impl TestDistribution {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain {
                what: "win probability",
                value: q,
                range: "[0, 1]",
            });
        }
        Ok(Self(q))
    }

    pub fn win(self) -> f64 {
        self.0
    }

    pub fn is_quantum(self) -> bool {
        (QUANTUM_MIN..=QUANTUM_MAX).contains(&self.0)
    }
}

/// Distribution of the score register over win, lose and "no test".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    gamma: f64,
    q: f64,
}

impl ScoreDistribution {
    pub fn new(gamma: f64, q: TestDistribution) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { gamma, q: q.win() })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn test(&self) -> TestDistribution {
        TestDistribution(self.q)
    }

    /// Probabilities of (win, lose, no test).
    pub fn masses(&self) -> [f64; 3] {
        [
            self.gamma * self.q,
            self.gamma * (1.0 - self.q),
            1.0 - self.gamma,
        ]
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "gamma",
            value: gamma,
            range: "(0, 1]",
        })
    }
}

fn check_quantum(q: f64) -> Result<()> {
    if (QUANTUM_MIN..=QUANTUM_MAX).contains(&q) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "CHSH score",
            value: q,
            range: "the quantum interval",
        })
    }
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn h_bin(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "probability",
            value: x,
            range: "[0, 1]",
        });
    }
    Ok(binary_entropy(x))
}

pub(crate) fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

// s^2 = 16 q (q - 1) + 3, written so the plateau edge is exact.
fn s_squared(q: f64) -> f64 {
    let u = 2.0 * q - 1.0;
    4.0 * u * u - 1.0
}

/// Lower bound on the conditional von Neumann entropy of Alice's output
/// for a device winning CHSH with probability `q`.
pub fn rate_chsh(q: f64) -> Result<f64> {
    check_quantum(q)?;
    Ok(rate_unchecked(q))
}

pub(crate) fn rate_unchecked(q: f64) -> f64 {
    let s2 = s_squared(q);
    if s2 <= 0.0 {
        return 0.0;
    }
    if s2 >= 1.0 {
        return 1.0;
    }
    let s = s2.sqrt();
    // 1 - h((1+s)/2) = ((1+s) ln(1+s) + (1-s) ln(1-s)) / (2 ln 2)
    ((1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()) / (2.0 * LN_2)
}

/// Derivative of [`rate_chsh`] on the open quantum interval. Zero on the
/// classical plateau, including its end points.
pub fn rate_chsh_derivative(q: f64) -> Result<f64> {
    if q <= QUANTUM_MIN || q >= QUANTUM_MAX {
        return Err(Error::Domain {
            what: "CHSH score",
            value: q,
            range: "the open quantum interval",
        });
    }
    Ok(derivative_unchecked(q))
}

fn derivative_unchecked(q: f64) -> f64 {
    let s2 = s_squared(q);
    if s2 <= 0.0 {
        return 0.0;
    }
    let s = s2.sqrt();
    // log2((1+s)/(1-s)) * (8q - 4) / s
    2.0 * s.atanh() / (s * LN_2) * (8.0 * q - 4.0)
}

/// Affine min-tradeoff function built from the tangent of the rate curve at
/// `t`, with the free value `c_perp` assigned to untested rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinTradeoffFn {
    gamma: f64,
    t: f64,
    c_perp: f64,
    rate_t: f64,
    slope: f64,
}

impl MinTradeoffFn {
    pub fn new(gamma: f64, t: f64, c_perp: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if t <= QUANTUM_MIN || t >= QUANTUM_MAX {
            return Err(Error::Domain {
                what: "tangent point",
                value: t,
                range: "the open quantum interval",
            });
        }
        if !c_perp.is_finite() {
            return Err(Error::invalid("c_perp must be finite"));
        }
        Ok(Self {
            gamma,
            t,
            c_perp,
            rate_t: rate_unchecked(t),
            slope: derivative_unchecked(t),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn c_perp(&self) -> f64 {
        self.c_perp
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Tangent line `g_t`, extended affinely over all of `[0, 1]`.
    pub fn tangent(&self, q: f64) -> f64 {
        self.rate_t + (q - self.t) * self.slope
    }

    /// Value on a tested round that was won.
    pub fn on_win(&self) -> f64 {
        self.c_perp + (self.tangent(1.0) - self.c_perp) / self.gamma
    }

    /// Value on a tested round that was lost.
    pub fn on_lose(&self) -> f64 {
        self.c_perp + (self.tangent(0.0) - self.c_perp) / self.gamma
    }

    /// Value on an untested round.
    pub fn on_no_test(&self) -> f64 {
        self.c_perp
    }

    /// Extends `f` affinely to a frequency vector (win, lose, no test).
    pub fn eval_frequencies(&self, freq: [f64; 3]) -> f64 {
        freq[0] * self.on_win() + freq[1] * self.on_lose() + freq[2] * self.c_perp
    }
}

/// Evaluates `f` on the score distribution induced by a test distribution.
pub fn f_eval(f: &MinTradeoffFn, p: &ScoreDistribution) -> Result<f64> {
    ensure_same_gamma(f.gamma, p.gamma)?;
    Ok(f.eval_frequencies(p.masses()))
}

fn ensure_same_gamma(function: f64, protocol: f64) -> Result<()> {
    if (function - protocol).abs() <= 1e-12 * protocol.abs() {
        Ok(())
    } else {
        Err(Error::GammaMismatch { function, protocol })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FProperties {
    /// Maximum of `f` over all score distributions.
    pub max_f: f64,
    /// Minimum of `f` over score distributions with quantum test statistics.
    pub min_q_f: f64,
    gamma: f64,
    c_perp: f64,
    g_win: f64,
    g_lose: f64,
}

impl FProperties {
    /// Upper bound on the variance of `f` under a quantum distribution with
    /// win probability `q`.
    pub fn var_bound(&self, q: f64) -> f64 {
        let dw = self.c_perp - self.g_win;
        let dl = self.c_perp - self.g_lose;
        (q * dw * dw + (1.0 - q) * dl * dl) / self.gamma
    }
}

pub fn f_properties(f: &MinTradeoffFn) -> FProperties {
    FProperties {
        max_f: f.on_win().max(f.on_lose()).max(f.c_perp),
        min_q_f: f.tangent(QUANTUM_MIN).min(f.tangent(QUANTUM_MAX)),
        gamma: f.gamma,
        c_perp: f.c_perp,
        g_win: f.tangent(1.0),
        g_lose: f.tangent(0.0),
    }
}

/// First-order correction term for a given variance bound.
pub fn v_from_variance(var: f64) -> f64 {
    let a = 9f64.log2() + (2.0 + var).sqrt();
    LN_2 / 2.0 * a * a
}

/// First-order correction term at win probability `q`.
pub fn v_term(f: &MinTradeoffFn, q: f64) -> f64 {
    v_from_variance(f_properties(f).var_bound(q))
}

/// Natural log of the second-order correction term.
pub fn ln_k_term(f: &MinTradeoffFn, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
            range: "(1, 2)",
        });
    }
    let props = f_properties(f);
    let d = 1.0 + props.max_f - props.min_q_f;
    let dl = d * LN_2;
    // ln(2^D + e^2) without forming 2^D
    let ln_sum = if dl > 2.0 {
        dl + (2.0 - dl).exp().ln_1p()
    } else {
        2.0 + (dl - 2.0).exp().ln_1p()
    };
    let two_minus = 2.0 - alpha;
    Ok(-(6.0 * two_minus * two_minus * two_minus * LN_2).ln()
        + (alpha - 1.0) * dl
        + 3.0 * ln_sum.ln())
}

/// Second-order correction term. Fails if it is not representable.
pub fn k_term(f: &MinTradeoffFn, alpha: f64) -> Result<f64> {
    let ln_k = ln_k_term(f, alpha)?;
    let k = ln_k.exp();
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::Overflow {
            log2_k: ln_k / LN_2,
        })
    }
}

/// Rule used to lower-bound `f` on frequency vectors that pass the
/// protocol's threshold test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Frequencies of the form `(gamma q', gamma (1 - q'), 1 - gamma)` with
    /// `q' >= omega`, i.e. the tangent evaluated on passing scores.
    #[default]
    SpotCheck,
    /// Every frequency vector in the simplex with win mass at least
    /// `gamma omega`.
    Polytope,
}

impl ThresholdRule {
    pub fn rate(self, f: &MinTradeoffFn, omega: f64) -> Result<f64> {
        match self {
            ThresholdRule::SpotCheck => threshold_rate_spot_check(f, omega),
            ThresholdRule::Polytope => threshold_rate(f, omega),
        }
    }
}

fn check_threshold(omega: f64) -> Result<()> {
    if (0.0..=1.0).contains(&omega) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "threshold score",
            value: omega,
            range: "[0, 1]",
        })
    }
}

/// Minimum of `f` over the polytope of frequency vectors whose win mass is
/// at least `gamma omega`, by enumerating its vertices.
pub fn threshold_rate(f: &MinTradeoffFn, omega: f64) -> Result<f64> {
    check_threshold(omega)?;
    let b = f.gamma * omega;
    let vertices = [[1.0, 0.0, 0.0], [b, 1.0 - b, 0.0], [b, 0.0, 1.0 - b]];
    Ok(vertices
        .iter()
        .map(|v| f.eval_frequencies(*v))
        .fold(f64::INFINITY, f64::min))
}

/// Minimum of the tangent over passing scores `q' in [omega, 1]`.
pub fn threshold_rate_spot_check(f: &MinTradeoffFn, omega: f64) -> Result<f64> {
    check_threshold(omega)?;
    Ok(f.tangent(omega).min(f.tangent(1.0)))
}

/// Protocol parameters that are fixed before the entropy bound is optimised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: u64,
    pub gamma: f64,
    pub omega_exp: f64,
    pub delta: f64,
    pub eps_h: f64,
    pub eps_eat: f64,
    #[serde(default)]
    pub threshold: ThresholdRule,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        check_gamma(self.gamma)?;
        check_quantum(self.omega_exp)?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain {
                what: "delta",
                value: self.delta,
                range: "(0, inf)",
            });
        }
        for (what, eps) in [("eps_h", self.eps_h), ("eps_eat", self.eps_eat)] {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Domain {
                    what,
                    value: eps,
                    range: "(0, 1)",
                });
            }
        }
        Ok(())
    }

    /// Score a run must reach to pass, clamped at zero.
    pub fn omega_threshold(&self) -> f64 {
        (self.omega_exp - self.delta).max(0.0)
    }

    /// The `alpha`-dependent smoothing penalty divided by `alpha / (alpha - 1)`.
    pub fn smoothing_log(&self) -> f64 {
        let e = self.eps_h;
        // 1 - sqrt(1 - e^2), without cancellation for tiny e
        let tail = e * e / (1.0 + (1.0 - e * e).sqrt());
        -(self.eps_eat * tail).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EatParams {
    pub protocol: ProtocolParams,
    pub alpha: f64,
}

/// Lower bound on the smooth min-entropy of the raw outputs together with
/// the pieces it was assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyCertificate {
    pub n: u64,
    pub gamma: f64,
    pub hmin_lower: f64,
    pub rate_per_round: f64,
    pub threshold_rate: f64,
    pub smoothing_penalty: f64,
    /// Infimum of the per-round correction, excluding the `K` term.
    pub inner_objective: f64,
    pub q_star: f64,
    pub k_term: f64,
    pub alpha: f64,
    pub t: f64,
    pub c_perp: f64,
    pub threshold_rule: ThresholdRule,
}

impl EntropyCertificate {
    /// Per-round correction including the second-order term.
    pub fn inner_value(&self) -> f64 {
        let am1 = self.alpha - 1.0;
        self.inner_objective - am1 * am1 * self.k_term
    }
}

/// Finite-round certificate for a fixed choice of `alpha` and `f`.
pub fn eat_bound(params: &EatParams, f: &MinTradeoffFn) -> Result<EntropyCertificate> {
    let p = &params.protocol;
    p.validate()?;
    ensure_same_gamma(f.gamma, p.gamma)?;
    let alpha = params.alpha;
    let inner = optimizer::inner_inf(f, alpha)?;
    let r = p.threshold.rate(f, p.omega_threshold())?;
    let n = p.n as f64;
    let smoothing_penalty = alpha / (alpha - 1.0) * p.smoothing_log();
    let am1 = alpha - 1.0;
    let hmin = n * r - smoothing_penalty + n * inner.objective - n * am1 * am1 * inner.k;
    Ok(EntropyCertificate {
        n: p.n,
        gamma: p.gamma,
        hmin_lower: hmin,
        rate_per_round: hmin / n,
        threshold_rate: r,
        smoothing_penalty,
        inner_objective: inner.objective,
        q_star: inner.q_star,
        k_term: inner.k,
        alpha,
        t: f.t,
        c_perp: f.c_perp,
        threshold_rule: p.threshold,
    })
}
