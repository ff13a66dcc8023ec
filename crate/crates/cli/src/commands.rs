use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use dirne_core::entropy::{
    eat_bound, rate_chsh, EatParams, EntropyCertificate, MinTradeoffFn, ProtocolParams,
};
use dirne_core::error_budget::{
    completeness_error, delta_for_completeness, input_randomness, output_length, ErrorBudget,
};
use dirne_core::extractor::{extract, toeplitz_naive, toeplitz_row, Bits, ToeplitzJob};
use dirne_core::optimizer::{
    design_point, min_rounds_at_gamma, outer_optimize, plan_protocol, PlanOptions,
};
use dirne_core::protocol_sim::{
    chsh_score_from_counts, run_protocol, spacetime_check, RunSpec, SimOptions, SpacetimeGeometry,
    TrialTally,
};
use dirne_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{require, CurveKind, RunConfig};
use crate::error::{CliError, EXIT_NO_EXPANSION, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Certify,
    Plan,
    Simulate,
    Score,
    Extract,
    Curve,
    Spacetime,
}

/// What a command produced. Files named in the config have already been
/// written; the report and any CSV are written by [`Outcome::emit`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub csv_path: Option<PathBuf>,
    pub exit_code: i32,
}

impl Outcome {
    fn report(report: Value, exit_code: i32) -> Self {
        Self {
            report,
            csv: None,
            csv_path: None,
            exit_code,
        }
    }

    /// Writes the CSV to its path or stdout, and the report to `report_path`
    /// or stdout. When the CSV takes stdout the report is only written to a
    /// file.
    pub fn emit(&self, report_path: Option<&Path>) -> Result<(), CliError> {
        let mut stdout_taken = false;
        if let Some(csv) = &self.csv {
            match &self.csv_path {
                Some(p) => write_file(p, csv.as_bytes())?,
                None => {
                    print!("{csv}");
                    stdout_taken = true;
                }
            }
        }
        let text = serde_json::to_string_pretty(&self.report).expect("reports serialise") + "\n";
        match report_path {
            Some(p) => write_file(p, text.as_bytes())?,
            None if !stdout_taken => print!("{text}"),
            None => {}
        }
        Ok(())
    }
}

pub fn run(task: Task, cfg: &RunConfig, oracle_check: bool) -> Result<Outcome, CliError> {
    match task {
        Task::Certify => certify(cfg, oracle_check),
        Task::Plan => plan(cfg),
        Task::Simulate => simulate(cfg, oracle_check),
        Task::Score => score(cfg),
        Task::Extract => extract_cmd(cfg, oracle_check),
        Task::Curve => curve(cfg),
        Task::Spacetime => spacetime(cfg),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_tally(path: &Path) -> Result<TrialTally, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(TrialTally::from_text(&text)?)
}

fn read_bits(path: &Path) -> Result<Bits, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    Bits::read_from(BufReader::new(f)).map_err(|e| match e {
        Error::BitFile(m) => CliError::io(path, m),
        other => other.into(),
    })
}

fn write_bits(path: &Path, bits: &Bits) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(f);
    bits.write_to(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

/// Score statistics of a count table read for certification.
#[derive(Debug, Clone, Serialize)]
struct TallyCheck {
    path: PathBuf,
    observed_score: f64,
    wins: u64,
    test_rounds: u64,
    rounds: u64,
    wins_needed: f64,
    passed: bool,
}

/// Protocol parameters from the config, filling gaps from the count table
/// and the completeness budget.
fn resolve_protocol(
    cfg: &RunConfig,
    budget: &ErrorBudget,
) -> Result<(ProtocolParams, Option<TallyCheck>), CliError> {
    let p = &cfg.protocol;
    let tally = match &p.tally {
        Some(path) => Some((path.clone(), read_tally(path)?)),
        None => None,
    };
    let with_generation = tally.as_ref().filter(|(_, t)| t.generation_rounds() > 0);
    let n = match (p.n_rounds, with_generation) {
        (Some(n), _) => n,
        (None, Some((_, t))) => t.rounds(),
        (None, None) => return Err(CliError::Config("missing `protocol.n_rounds`".into())),
    };
    let gamma = match (p.gamma, with_generation) {
        (Some(g), _) => g,
        (None, Some((_, t))) => t.test_rounds() as f64 / t.rounds() as f64,
        (None, None) => return Err(CliError::Config("missing `protocol.gamma`".into())),
    };
    let observed = match &tally {
        Some((_, t)) => Some(chsh_score_from_counts(t)?),
        None => None,
    };
    let omega_exp = require(p.omega_exp.or(observed), "protocol.omega_exp")?;
    let delta = match p.delta {
        Some(d) => d,
        None => delta_for_completeness(n, gamma, omega_exp, budget.eps_c)?,
    };
    let params = ProtocolParams {
        n,
        gamma,
        omega_exp,
        delta,
        eps_h: budget.eps_h,
        eps_eat: budget.eps_eat,
        threshold: p.threshold_rule,
    };
    params.validate()?;
    let check = tally.map(|(path, t)| {
        let wins_needed = n as f64 * gamma * (omega_exp - delta);
        TallyCheck {
            path,
            observed_score: observed.unwrap_or(f64::NAN),
            wins: t.wins(),
            test_rounds: t.test_rounds(),
            rounds: t.rounds(),
            wins_needed,
            passed: t.wins() as f64 >= wins_needed,
        }
    });
    Ok((params, check))
}

/// Terms of the certificate in the order they are summed.
#[derive(Debug, Clone, Copy, Serialize)]
struct Breakdown {
    rate_term: f64,
    smoothing_penalty: f64,
    inner_term: f64,
    second_order_term: f64,
    hmin_lower: f64,
}

impl Breakdown {
    fn of(c: &EntropyCertificate) -> Self {
        let n = c.n as f64;
        let am1 = c.alpha - 1.0;
        Self {
            rate_term: n * c.threshold_rate,
            smoothing_penalty: c.smoothing_penalty,
            inner_term: n * c.inner_objective,
            second_order_term: n * am1 * am1 * c.k_term,
            hmin_lower: c.hmin_lower,
        }
    }

    fn total(&self) -> f64 {
        self.rate_term - self.smoothing_penalty + self.inner_term - self.second_order_term
    }
}

fn certify(cfg: &RunConfig, oracle_check: bool) -> Result<Outcome, CliError> {
    let budget = cfg.budget()?;
    let (params, tally) = resolve_protocol(cfg, &budget)?;
    let cert = outer_optimize(&params)?;
    let breakdown = Breakdown::of(&cert);
    if oracle_check {
        let f = MinTradeoffFn::new(params.gamma, cert.t, cert.c_perp)?;
        let again = eat_bound(
            &EatParams {
                protocol: params,
                alpha: cert.alpha,
            },
            &f,
        )?;
        if again.hmin_lower != cert.hmin_lower || breakdown.total() != cert.hmin_lower {
            return Err(CliError::OracleMismatch(format!(
                "certificate {} re-evaluates to {} and re-sums to {}",
                cert.hmin_lower,
                again.hmin_lower,
                breakdown.total()
            )));
        }
    }
    let completeness = completeness_error(params.n, params.gamma, params.omega_exp, params.delta)?;
    let rand_out = output_length(cert.hmin_lower, budget.eps_ext);
    let rand_in = input_randomness(params.n, params.gamma)?;
    let net = rand_out - rand_in;
    let passed = tally.as_ref().is_none_or(|t| t.passed);
    let expansion = net > 0.0 && passed;
    let report = json!({
        "command": "certify",
        "config": to_value(cfg),
        "params": to_value(&params),
        "budget": to_value(&budget),
        "soundness": budget.soundness(),
        "completeness": to_value(&completeness),
        "certificate": to_value(&cert),
        "breakdown": to_value(&breakdown),
        "rand_out_bits": rand_out,
        "rand_in_bits": rand_in,
        "net_bits": net,
        "tally": to_value(&tally),
        "expansion": expansion,
    });
    Ok(Outcome::report(
        report,
        if expansion {
            EXIT_OK
        } else {
            EXIT_NO_EXPANSION
        },
    ))
}

fn expected_score(cfg: &RunConfig) -> Result<f64, CliError> {
    if let Some(w) = cfg.protocol.omega_exp {
        return Ok(w);
    }
    match &cfg.protocol.tally {
        Some(path) => Ok(chsh_score_from_counts(&read_tally(path)?)?),
        None => Err(CliError::Config("missing `protocol.omega_exp`".into())),
    }
}

#[derive(Debug, Clone, Serialize)]
struct GammaRow {
    gamma: f64,
    delta: f64,
    hmin_lower: f64,
    output_bits: f64,
    input_bits: f64,
    net_bits: f64,
    net_per_round: f64,
}

fn gamma_rows(
    omega: f64,
    n: u64,
    gammas: &[f64],
    budget: &ErrorBudget,
    opts: &PlanOptions,
) -> Result<Vec<GammaRow>, CliError> {
    let rows = gammas
        .par_iter()
        .map(|&gamma| {
            design_point(omega, n, gamma, budget, opts.threshold).map(|d| GammaRow {
                gamma,
                delta: d.delta,
                hmin_lower: d.certificate.hmin_lower,
                output_bits: d.output_bits,
                input_bits: d.input_bits,
                net_bits: d.net_bits,
                net_per_round: d.net_bits / n as f64,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

fn plan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let omega = expected_score(cfg)?;
    let budget = cfg.budget()?;
    let opts = cfg.plan_options()?;
    let result = match cfg.plan.gamma_fixed {
        Some(g) => min_rounds_at_gamma(omega, g, &budget, &opts),
        None => plan_protocol(omega, budget.eps_s, budget.eps_c, &opts).map(|r| r.design),
    };
    let design = match result {
        Ok(d) => d,
        Err(Error::Infeasible { n_max }) => {
            let report = json!({
                "command": "plan",
                "config": to_value(cfg),
                "omega_exp": omega,
                "budget": to_value(&budget),
                "feasible": false,
                "n_max_rounds": n_max,
            });
            return Ok(Outcome::report(report, EXIT_NO_EXPANSION));
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &cfg.plan.sweep_out {
        let gammas = grid(
            opts.gamma_range.0,
            opts.gamma_range.1,
            cfg.plan.sweep_points,
            true,
        )?;
        let rows = gamma_rows(omega, design.n, &gammas, &budget, &opts)?;
        write_file(path, to_csv(&rows)?.as_bytes())?;
    }
    let report = json!({
        "command": "plan",
        "config": to_value(cfg),
        "omega_exp": omega,
        "budget": to_value(&budget),
        "feasible": true,
        "n_min": design.n,
        "gamma_opt": design.gamma,
        "delta": design.delta,
        "output_bits": design.output_bits,
        "input_bits": design.input_bits,
        "input_rate_per_round": design.input_bits / design.n as f64,
        "net_bits": design.net_bits,
        "certificate": to_value(&design.certificate),
    });
    Ok(Outcome::report(report, EXIT_OK))
}

fn simulate(cfg: &RunConfig, oracle_check: bool) -> Result<Outcome, CliError> {
    let model = require(cfg.device, "device")?;
    model.validate()?;
    let n = require(cfg.protocol.n_rounds, "protocol.n_rounds")?;
    let gamma = require(cfg.protocol.gamma, "protocol.gamma")?;
    let model_score = model.chsh_score()?;
    let omega_exp = cfg.protocol.omega_exp.unwrap_or(model_score);
    let delta = match (cfg.protocol.delta, cfg.budget.eps_c) {
        (Some(d), _) => d,
        (None, Some(eps_c)) => delta_for_completeness(n, gamma, omega_exp, eps_c)?,
        (None, None) => {
            return Err(CliError::Config(
                "set `protocol.delta` or `budget.eps_c`".into(),
            ))
        }
    };
    let spec = RunSpec {
        n,
        gamma,
        omega_exp,
        delta,
        model,
        seed: cfg.simulate.seed,
    };
    spec.validate()?;
    let opts = SimOptions {
        keep_records: false,
        keep_outputs: cfg.simulate.bits_out.is_some(),
        record_limit: cfg.simulate.record_limit_rounds,
    };
    if opts.keep_outputs && n > opts.record_limit {
        return Err(CliError::Config(format!(
            "bits_out needs n_rounds <= simulate.record_limit_rounds ({})",
            opts.record_limit
        )));
    }
    let t = run_protocol(&spec, &opts)?;
    if oracle_check {
        // one sequential pass over all chunks must give the same counts
        let seq = spec.simulate_chunks(
            0..spec.chunks(),
            &SimOptions {
                keep_outputs: false,
                ..opts
            },
        )?;
        if seq.tally != t.tally || seq.uniform_bits != t.uniform_bits {
            return Err(CliError::OracleMismatch(
                "parallel and sequential runs differ".into(),
            ));
        }
    }
    if let Some(path) = &cfg.simulate.tally_out {
        write_file(path, t.tally.to_text().as_bytes())?;
    }
    let mut bits_written = None;
    if let (Some(path), Some(out)) = (&cfg.simulate.bits_out, &t.outputs) {
        let bits = out.extractor_input();
        write_bits(path, &bits)?;
        bits_written = Some(bits.len());
    }
    let report = json!({
        "command": "simulate",
        "config": to_value(cfg),
        "spec": to_value(&spec),
        "tally": to_value(&t.tally),
        "wins": t.wins,
        "wins_needed": t.threshold,
        "abort": t.abort,
        "test_rounds": t.tally.test_rounds(),
        "generation_rounds": t.tally.generation_rounds(),
        "empirical_score": chsh_score_from_counts(&t.tally).ok(),
        "model_score": model_score,
        "uniform_bits": t.uniform_bits,
        "input_randomness_bits": if gamma < 1.0 { Some(input_randomness(n, gamma)?) } else { None },
        "extractor_input_bits": bits_written,
    });
    Ok(Outcome::report(report, EXIT_OK))
}

fn score(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let path = require(cfg.protocol.tally.as_ref(), "protocol.tally")?;
    let t = read_tally(path)?;
    let s = chsh_score_from_counts(&t)?;
    let settings: Vec<Value> = (0..2)
        .flat_map(|x| (0..2).map(move |y| (x, y)))
        .map(|(x, y)| {
            let total = t.setting_total(x, y);
            let wins = t.setting_wins(x, y);
            json!({ "x": x, "y": y, "total": total, "wins": wins, "win_fraction": wins as f64 / total as f64 })
        })
        .collect();
    let report = json!({
        "command": "score",
        "tally": path,
        "score": s,
        "score_6dp": format!("{s:.6}"),
        "wins": t.wins(),
        "test_rounds": t.test_rounds(),
        "generation_rounds": t.generation_rounds(),
        "settings": settings,
    });
    Ok(Outcome::report(report, EXIT_OK))
}

fn extract_cmd(cfg: &RunConfig, oracle_check: bool) -> Result<Outcome, CliError> {
    let e = &cfg.extract;
    let input_path = require(e.input.as_ref(), "extract.input")?;
    if e.seed_file.is_none() && e.seed_rng.is_none() {
        return Err(CliError::Config(
            "set `extract.seed_file` or `extract.seed_rng`".into(),
        ));
    }
    let budget = cfg.budget().ok();
    let (k, certificate) = match e.k_bits {
        Some(k) => (k, None),
        None => {
            let budget = budget.ok_or_else(|| {
                CliError::Config("set `extract.k_bits` or the `[budget]` section".into())
            })?;
            let (params, _) = resolve_protocol(cfg, &budget)?;
            let cert = outer_optimize(&params)?;
            (cert.hmin_lower, Some(cert))
        }
    };
    let m = match e.m_bits {
        Some(m) => m as f64,
        None => {
            let b = budget.ok_or_else(|| {
                CliError::Config("set `extract.m_bits` or the `[budget]` section".into())
            })?;
            output_length(k, b.eps_ext).floor()
        }
    };
    if m < 1.0 {
        let report = json!({
            "command": "extract",
            "config": to_value(cfg),
            "k_min_entropy": k,
            "m_bits": m,
            "certificate": to_value(&certificate),
            "expansion": false,
        });
        return Ok(Outcome::report(report, EXIT_NO_EXPANSION));
    }
    let m = m as usize;
    let input = read_bits(input_path)?;
    let n = input.len();
    let seed = match &e.seed_file {
        Some(path) => read_bits(path)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(e.seed_rng.expect("checked above"));
            Bits::random((m + n).saturating_sub(1), &mut rng)
        }
    };
    // all inputs are checked before anything is written
    let job = ToeplitzJob::new(n, m, e.block_len_bits.min(n), seed)?;
    let (out, summary) = extract(&job, &input, k)?;
    let oracle_rows = if oracle_check {
        cross_check(&job, &input, &out)?
    } else {
        0
    };
    if let (None, Some(path)) = (&e.seed_file, &e.seed_out) {
        write_bits(path, job.seed())?;
    }
    if let Some(path) = &e.output {
        write_bits(path, &out)?;
    }
    let report = json!({
        "command": "extract",
        "config": to_value(cfg),
        "summary": to_value(&summary),
        "certificate": to_value(&certificate),
        "eps_ext_target": budget.map(|b| b.eps_ext),
        "output_ones": out.count_ones(),
        "oracle_rows_checked": oracle_rows,
        "expansion": true,
    });
    Ok(Outcome::report(report, EXIT_OK))
}

/// Largest `m n` for which the whole product is recomputed directly.
const FULL_CHECK_WORK: usize = 1 << 28;
const SAMPLED_ROWS: usize = 256;

/// Compares the FFT output with direct products: every row for small jobs,
/// otherwise evenly spaced rows including the first and last.
fn cross_check(job: &ToeplitzJob, input: &Bits, out: &Bits) -> Result<usize, CliError> {
    let m = job.m_bits();
    if m.saturating_mul(job.n_bits()) <= FULL_CHECK_WORK {
        if toeplitz_naive(job.seed(), input, m)? != *out {
            return Err(CliError::OracleMismatch(
                "FFT and direct products differ".into(),
            ));
        }
        return Ok(m);
    }
    let rows: Vec<usize> = (0..SAMPLED_ROWS)
        .map(|k| k * (m - 1) / (SAMPLED_ROWS - 1))
        .collect();
    let bad = rows
        .par_iter()
        .map(|&i| toeplitz_row(job.seed(), input, m, i).map(|b| (i, b)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .find(|&(i, b)| out.get(i) != b);
    if let Some((i, _)) = bad {
        return Err(CliError::OracleMismatch(format!(
            "FFT and direct products differ at row {i}"
        )));
    }
    Ok(SAMPLED_ROWS)
}

fn grid(start: f64, stop: f64, points: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if points < 2
        || start.partial_cmp(&stop) != Some(std::cmp::Ordering::Less)
        || (log && start <= 0.0)
    {
        return Err(CliError::Config(
            "curve grid needs start < stop, points >= 2 and positive ends for log spacing".into(),
        ));
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if log {
                (start.ln() + (stop.ln() - start.ln()) * step(i)).exp()
            } else {
                start + (stop - start) * step(i)
            }
        })
        .collect())
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[derive(Debug, Clone, Serialize)]
struct ScoreRow {
    omega_exp: f64,
    n_min: Option<u64>,
    gamma: Option<f64>,
    delta: Option<f64>,
    net_bits: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct RoundsRow {
    n_rounds: u64,
    gamma: f64,
    delta: f64,
    rate_per_round: f64,
    asymptotic_rate: f64,
    hmin_lower: f64,
    net_bits: f64,
}

fn curve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let c = &cfg.curve;
    let budget = cfg.budget()?;
    let opts = cfg.plan_options()?;
    let log = c.log_spaced.unwrap_or(c.kind != CurveKind::Score);
    let csv = match c.kind {
        CurveKind::Score => {
            let omegas = grid(
                c.start.unwrap_or(0.7505),
                c.stop.unwrap_or(0.7535),
                c.points,
                log,
            )?;
            let rows = omegas
                .iter()
                .map(|&w| {
                    let r = match cfg.plan.gamma_fixed {
                        Some(g) => min_rounds_at_gamma(w, g, &budget, &opts),
                        None => {
                            plan_protocol(w, budget.eps_s, budget.eps_c, &opts).map(|r| r.design)
                        }
                    };
                    match r {
                        Ok(d) => Ok(ScoreRow {
                            omega_exp: w,
                            n_min: Some(d.n),
                            gamma: Some(d.gamma),
                            delta: Some(d.delta),
                            net_bits: Some(d.net_bits),
                        }),
                        Err(Error::Infeasible { .. }) => Ok(ScoreRow {
                            omega_exp: w,
                            n_min: None,
                            gamma: None,
                            delta: None,
                            net_bits: None,
                        }),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            to_csv(&rows)?
        }
        CurveKind::Rounds => {
            let omega = expected_score(cfg)?;
            let gamma = require(cfg.protocol.gamma, "protocol.gamma")?;
            let asymptote = rate_chsh(omega)?;
            let ns = grid(
                c.start.unwrap_or(1e9),
                c.stop.unwrap_or(1e15),
                c.points,
                log,
            )?;
            let rows = ns
                .par_iter()
                .map(|&n| {
                    let n = n.round() as u64;
                    design_point(omega, n, gamma, &budget, opts.threshold).map(|d| RoundsRow {
                        n_rounds: n,
                        gamma,
                        delta: d.delta,
                        rate_per_round: d.certificate.rate_per_round,
                        asymptotic_rate: asymptote,
                        hmin_lower: d.certificate.hmin_lower,
                        net_bits: d.net_bits,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            to_csv(&rows)?
        }
        CurveKind::Gamma => {
            let omega = expected_score(cfg)?;
            let n = require(cfg.protocol.n_rounds, "protocol.n_rounds")?;
            let gammas = grid(
                c.start.unwrap_or(1e-5),
                c.stop.unwrap_or(1e-2),
                c.points,
                log,
            )?;
            to_csv(&gamma_rows(omega, n, &gammas, &budget, &opts)?)?
        }
    };
    let report = json!({
        "command": "curve",
        "config": to_value(cfg),
        "rows": csv.lines().count().saturating_sub(1),
    });
    Ok(Outcome {
        report,
        csv: Some(csv),
        csv_path: c.out.clone(),
        exit_code: EXIT_OK,
    })
}

fn spacetime(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let g = cfg.spacetime.unwrap_or_else(SpacetimeGeometry::reference);
    let v = spacetime_check(&g)?;
    let report = json!({
        "command": "spacetime",
        "geometry": to_value(&g),
        "verdict": to_value(&v),
        "all_satisfied": v.all(),
    });
    Ok(Outcome::report(report, EXIT_OK))
}
