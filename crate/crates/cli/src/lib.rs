//! Command-line front end: certification, planning, simulation, scoring,
//! extraction and curve emission. Every command reads a [`RunConfig`],
//! applies flag overrides on top and embeds the resolved config in its
//! JSON report.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirne_core::entropy::ThresholdRule;
use dirne_core::protocol_sim::{DeviceModel, QuantumDevice};

pub use commands::{run, Outcome};
pub use config::RunConfig;
pub use error::CliError;

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "DIRNE_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "dirne",
    version,
    about = "Device-independent randomness expansion toolkit"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Cross-validate against the slow reference paths.
    #[arg(long, global = true)]
    pub oracle_check: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the min-entropy of a run and account for its net output.
    Certify {
        #[command(flatten)]
        protocol: ProtocolFlags,
    },
    /// Find the fewest rounds with positive net output.
    Plan {
        #[command(flatten)]
        protocol: ProtocolFlags,
        /// CSV of net output over gamma at the planned number of rounds.
        #[arg(long)]
        sweep_out: Option<PathBuf>,
        /// Hold gamma at this value instead of optimising it.
        #[arg(long)]
        gamma_fixed: Option<f64>,
    },
    /// Simulate an honest run and write its count table.
    Simulate {
        #[command(flatten)]
        protocol: ProtocolFlags,
        #[command(flatten)]
        device: DeviceFlags,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tally_out: Option<PathBuf>,
        /// Write the extractor input bits.
        #[arg(long)]
        bits_out: Option<PathBuf>,
    },
    /// CHSH score of a count table.
    Score {
        /// Count table; defaults to `protocol.tally`.
        tally: Option<PathBuf>,
    },
    /// Hash raw outputs with a Toeplitz matrix.
    Extract {
        #[command(flatten)]
        protocol: ProtocolFlags,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed_file: Option<PathBuf>,
        #[arg(long)]
        seed_rng: Option<u64>,
        #[arg(long)]
        seed_out: Option<PathBuf>,
        #[arg(long)]
        m_bits: Option<usize>,
        #[arg(long)]
        k_bits: Option<f64>,
        #[arg(long)]
        block_len_bits: Option<usize>,
    },
    /// Emit a CSV curve.
    Curve {
        #[command(flatten)]
        protocol: ProtocolFlags,
        #[arg(long, value_enum)]
        kind: Option<config::CurveKind>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locality and measurement-independence timing checks.
    Spacetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    SpotCheck,
    Polytope,
}

impl From<RuleArg> for ThresholdRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::SpotCheck => ThresholdRule::SpotCheck,
            RuleArg::Polytope => ThresholdRule::Polytope,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolFlags {
    #[arg(long)]
    pub n_rounds: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub omega_exp: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps_s: Option<f64>,
    #[arg(long)]
    pub eps_c: Option<f64>,
    #[arg(long, value_enum)]
    pub threshold_rule: Option<RuleArg>,
    /// Count table to estimate the score from.
    #[arg(long)]
    pub tally: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DeviceFlags {
    /// Devices that win each test round with this probability.
    #[arg(long, conflicts_with = "quantum_reference")]
    pub bernoulli: Option<f64>,
    /// Photonic model with the reference experiment's settings.
    #[arg(long)]
    pub quantum_reference: bool,
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl ProtocolFlags {
    fn apply(self, cfg: &mut RunConfig) {
        let p = &mut cfg.protocol;
        set(&mut p.n_rounds, self.n_rounds);
        set(&mut p.gamma, self.gamma);
        set(&mut p.omega_exp, self.omega_exp);
        set(&mut p.delta, self.delta);
        set(&mut p.tally, self.tally);
        if let Some(r) = self.threshold_rule {
            p.threshold_rule = r.into();
        }
        set(&mut cfg.budget.eps_s, self.eps_s);
        set(&mut cfg.budget.eps_c, self.eps_c);
    }
}

impl Command {
    /// Folds the command's flags into `cfg`.
    pub fn apply(self, cfg: &mut RunConfig) -> commands::Task {
        use commands::Task;
        match self {
            Command::Certify { protocol } => {
                protocol.apply(cfg);
                Task::Certify
            }
            Command::Plan {
                protocol,
                sweep_out,
                gamma_fixed,
            } => {
                protocol.apply(cfg);
                set(&mut cfg.plan.sweep_out, sweep_out);
                set(&mut cfg.plan.gamma_fixed, gamma_fixed);
                Task::Plan
            }
            Command::Simulate {
                protocol,
                device,
                seed,
                tally_out,
                bits_out,
            } => {
                protocol.apply(cfg);
                if let Some(omega) = device.bernoulli {
                    cfg.device = Some(DeviceModel::Bernoulli { omega });
                } else if device.quantum_reference {
                    cfg.device = Some(DeviceModel::Quantum(QuantumDevice::reference()));
                }
                if let Some(s) = seed {
                    cfg.simulate.seed = s;
                }
                set(&mut cfg.simulate.tally_out, tally_out);
                set(&mut cfg.simulate.bits_out, bits_out);
                Task::Simulate
            }
            Command::Score { tally } => {
                set(&mut cfg.protocol.tally, tally);
                Task::Score
            }
            Command::Extract {
                protocol,
                input,
                output,
                seed_file,
                seed_rng,
                seed_out,
                m_bits,
                k_bits,
                block_len_bits,
            } => {
                protocol.apply(cfg);
                let e = &mut cfg.extract;
                set(&mut e.input, input);
                set(&mut e.output, output);
                set(&mut e.seed_file, seed_file);
                set(&mut e.seed_rng, seed_rng);
                set(&mut e.seed_out, seed_out);
                set(&mut e.m_bits, m_bits);
                set(&mut e.k_bits, k_bits);
                if let Some(l) = block_len_bits {
                    e.block_len_bits = l;
                }
                Task::Extract
            }
            Command::Curve {
                protocol,
                kind,
                start,
                stop,
                points,
                out,
            } => {
                protocol.apply(cfg);
                let c = &mut cfg.curve;
                if let Some(k) = kind {
                    c.kind = k;
                }
                set(&mut c.start, start);
                set(&mut c.stop, stop);
                if let Some(p) = points {
                    c.points = p;
                }
                set(&mut c.out, out);
                Task::Curve
            }
            Command::Spacetime => Task::Spacetime,
        }
    }
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}
