//! Inner and outer optimisation of the entropy certificate and the
//! protocol planner built on top of it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{
    eat_bound, f_properties, k_term, rate_unchecked, v_from_variance, EatParams,
    EntropyCertificate, MinTradeoffFn, ProtocolParams, ThresholdRule, CLASSICAL_MAX, QUANTUM_MAX,
    QUANTUM_MIN,
};
use crate::error::{Error, Result};
use crate::error_budget::{
    delta_for_completeness, input_randomness, output_length, ErrorBudget, DEFAULT_EXT_FRACTION,
};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimises `f` on `[a, b]` by golden-section search. The end points are
/// evaluated too, so a minimum on the boundary is found exactly.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut best = (a, f(a));
    let fb = f(b);
    if fb < best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Minimises `f` over the quantum interval of CHSH scores.
pub fn minimize_quantum<F: FnMut(f64) -> f64>(f: F) -> (f64, f64) {
    golden_section_min(f, QUANTUM_MIN, QUANTUM_MAX, 1e-12)
}

/// `rate(q) - g_t(q) - (alpha - 1) V(q)`.
pub fn inner_objective(f: &MinTradeoffFn, alpha_minus_one: f64, q: f64) -> f64 {
    let props = f_properties(f);
    rate_unchecked(q) - f.tangent(q) - alpha_minus_one * v_from_variance(props.var_bound(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerInf {
    pub q_star: f64,
    /// Infimum of [`inner_objective`].
    pub objective: f64,
    pub k: f64,
    /// `objective - (alpha - 1)^2 K`.
    pub value: f64,
}

/// Infimum over quantum scores of the per-round correction.
pub fn inner_inf(f: &MinTradeoffFn, alpha: f64) -> Result<InnerInf> {
    let k = k_term(f, alpha)?;
    let am1 = alpha - 1.0;
    let props = f_properties(f);
    let obj = |q: f64| rate_unchecked(q) - f.tangent(q) - am1 * v_from_variance(props.var_bound(q));
    let (mut q_star, mut objective) = minimize_quantum(obj);
    let ft = obj(f.t());
    if ft < objective {
        q_star = f.t();
        objective = ft;
    }
    Ok(InnerInf {
        q_star,
        objective,
        k,
        value: objective - am1 * am1 * k,
    })
}

/// Search box and stopping rule for [`outer_optimize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterOptions {
    pub alpha_minus_one: (f64, f64),
    pub t: (f64, f64),
    pub c_perp: (f64, f64),
    pub max_sweeps: usize,
    pub tol_bits: f64,
}

impl Default for OuterOptions {
    fn default() -> Self {
        Self {
            alpha_minus_one: (1e-9, 0.5),
            t: (0.7501, QUANTUM_MAX - 1e-6),
            c_perp: (-5.0, 5.0),
            max_sweeps: 50,
            tol_bits: 1.0,
        }
    }
}

pub fn outer_optimize(params: &ProtocolParams) -> Result<EntropyCertificate> {
    outer_optimize_with(params, &OuterOptions::default())
}

/// Maximises the certificate over `(alpha, t, c_perp)` by coordinate
/// ascent, with a golden-section line search in an adaptive window per
/// coordinate. The log of `alpha - 1` is used as the first coordinate.
pub fn outer_optimize_with(
    params: &ProtocolParams,
    opts: &OuterOptions,
) -> Result<EntropyCertificate> {
    params.validate()?;
    let lo = [opts.alpha_minus_one.0.ln(), opts.t.0, opts.c_perp.0];
    let hi = [opts.alpha_minus_one.1.ln(), opts.t.1, opts.c_perp.1];
    let tol = [1e-6, 1e-9, 1e-7];
    let mut window = [2.0, 0.01, 1.0];

    let certify = |x: &[f64; 3]| -> Result<EntropyCertificate> {
        let f = MinTradeoffFn::new(params.gamma, x[1], x[2])?;
        eat_bound(
            &EatParams {
                protocol: *params,
                alpha: 1.0 + x[0].exp(),
            },
            &f,
        )
    };
    let score = |x: &[f64; 3]| certify(x).map_or(f64::NEG_INFINITY, |c| c.hmin_lower);

    let t0 = params.omega_threshold().clamp(lo[1], hi[1]);
    let mut x = [
        (1.0 / (params.n as f64).sqrt()).ln().clamp(lo[0], hi[0]),
        t0,
        rate_unchecked(t0).clamp(lo[2], hi[2]),
    ];
    let mut best = score(&x);

    for sweep in 0..opts.max_sweeps {
        let start = best;
        for k in 0..3 {
            let a = (x[k] - window[k]).max(lo[k]);
            let b = (x[k] + window[k]).min(hi[k]);
            let mut trial = x;
            let (xk, neg) = golden_section_min(
                |v| {
                    trial[k] = v;
                    -score(&trial)
                },
                a,
                b,
                tol[k],
            );
            if -neg > best {
                best = -neg;
                x[k] = xk;
            }
            let edge = 1e-3 * (b - a);
            let at_edge = (xk - a < edge && a > lo[k]) || (b - xk < edge && b < hi[k]);
            window[k] = if at_edge {
                window[k] * 2.0
            } else {
                (window[k] / 2.0).max(10.0 * tol[k])
            };
        }
        if sweep >= 2 && best - start < opts.tol_bits {
            break;
        }
    }
    certify(&x)
}

/// One fully evaluated protocol design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub n: u64,
    pub gamma: f64,
    pub delta: f64,
    pub certificate: EntropyCertificate,
    pub output_bits: f64,
    pub input_bits: f64,
    pub net_bits: f64,
}

/// Derives `delta` from the completeness budget, optimises the certificate
/// and accounts for the extractor and the input randomness.
pub fn design_point(
    omega_exp: f64,
    n: u64,
    gamma: f64,
    budget: &ErrorBudget,
    rule: ThresholdRule,
) -> Result<DesignPoint> {
    let delta = delta_for_completeness(n, gamma, omega_exp, budget.eps_c)?;
    let params = ProtocolParams {
        n,
        gamma,
        omega_exp,
        delta,
        eps_h: budget.eps_h,
        eps_eat: budget.eps_eat,
        threshold: rule,
    };
    let certificate = outer_optimize(&params)?;
    let output_bits = output_length(certificate.hmin_lower, budget.eps_ext);
    let input_bits = input_randomness(n, gamma)?;
    Ok(DesignPoint {
        n,
        gamma,
        delta,
        certificate,
        output_bits,
        input_bits,
        net_bits: output_bits - input_bits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub ext_fraction: f64,
    pub gamma_range: (f64, f64),
    pub gamma_grid: usize,
    pub n_range: (f64, f64),
    /// Relative width at which the bisection on `n` stops.
    pub n_rel_tol: f64,
    pub threshold: ThresholdRule,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            ext_fraction: DEFAULT_EXT_FRACTION,
            gamma_range: (1e-7, 1e-1),
            gamma_grid: 25,
            n_range: (1e6, 1e18),
            n_rel_tol: 1e-4,
            threshold: ThresholdRule::SpotCheck,
        }
    }
}

/// Best testing probability at a fixed number of rounds: a log-spaced grid
/// scan followed by golden-section refinement around the best grid point.
pub fn best_gamma(
    omega_exp: f64,
    n: u64,
    budget: &ErrorBudget,
    opts: &PlanOptions,
) -> Result<DesignPoint> {
    let (g_lo, g_hi) = (opts.gamma_range.0.ln(), opts.gamma_range.1.ln());
    let steps = opts.gamma_grid.max(3);
    let net_at = |lg: f64| {
        design_point(omega_exp, n, lg.exp(), budget, opts.threshold)
            .map_or(f64::NEG_INFINITY, |d| d.net_bits)
    };
    let grid: Vec<f64> = (0..steps)
        .map(|i| g_lo + (g_hi - g_lo) * i as f64 / (steps - 1) as f64)
        .collect();
    let nets: Vec<f64> = grid.par_iter().map(|&lg| net_at(lg)).collect();
    let i = nets
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(steps - 1)];
    let (lg, _) = golden_section_min(|lg| -net_at(lg), a, b, 1e-4);
    design_point(omega_exp, n, lg.exp(), budget, opts.threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub omega_exp: f64,
    pub budget: ErrorBudget,
    pub n_min: u64,
    pub gamma_opt: f64,
    pub design: DesignPoint,
}

/// Smallest number of rounds with positive net expansion at the best
/// testing probability, by bisection on `log n`.
pub fn plan_protocol(
    omega_exp: f64,
    eps_s: f64,
    eps_c: f64,
    opts: &PlanOptions,
) -> Result<PlanResult> {
    check_expanding_score(omega_exp)?;
    let budget = ErrorBudget::with_ext_fraction(eps_s, eps_c, opts.ext_fraction)?;
    let best = min_rounds(opts, |n| best_gamma(omega_exp, n, &budget, opts))?;
    Ok(PlanResult {
        omega_exp,
        budget,
        n_min: best.n,
        gamma_opt: best.gamma,
        design: best,
    })
}

/// Smallest number of rounds with positive net expansion when the testing
/// probability is held at `gamma`.
pub fn min_rounds_at_gamma(
    omega_exp: f64,
    gamma: f64,
    budget: &ErrorBudget,
    opts: &PlanOptions,
) -> Result<DesignPoint> {
    check_expanding_score(omega_exp)?;
    min_rounds(opts, |n| {
        design_point(omega_exp, n, gamma, budget, opts.threshold)
    })
}

/// Bisection on `log n` for the first design with positive net output.
fn min_rounds<F: Fn(u64) -> Result<DesignPoint>>(opts: &PlanOptions, at: F) -> Result<DesignPoint> {
    let at_ln = |ln_n: f64| at(ln_n.exp().ceil() as u64);
    let (mut lo, mut hi) = (opts.n_range.0.ln(), opts.n_range.1.ln());
    let mut best = at_ln(hi)?;
    if best.net_bits <= 0.0 {
        return Err(Error::Infeasible {
            n_max: opts.n_range.1,
        });
    }
    let first = at_ln(lo)?;
    if first.net_bits > 0.0 {
        return Ok(first);
    }
    while hi - lo > opts.n_rel_tol {
        let mid = 0.5 * (lo + hi);
        let d = at_ln(mid)?;
        if d.net_bits > 0.0 {
            hi = mid;
            best = d;
        } else {
            lo = mid;
        }
    }
    Ok(best)
}

fn check_expanding_score(omega_exp: f64) -> Result<()> {
    if omega_exp > CLASSICAL_MAX && omega_exp <= QUANTUM_MAX {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "expected score",
            value: omega_exp,
            range: "(0.75, quantum maximum]",
        })
    }
}
