//! Run configuration. Files are TOML with one table per concern; every key
//! that carries a physical unit or a size names it (`_ns`, `_m`, `_deg`,
//! `_bits`, `_rounds`).

use std::path::{Path, PathBuf};

use dirne_core::entropy::ThresholdRule;
use dirne_core::error_budget::{ErrorBudget, DEFAULT_EXT_FRACTION};
use dirne_core::extractor::DEFAULT_BLOCK_LEN;
use dirne_core::optimizer::PlanOptions;
use dirne_core::protocol_sim::{DeviceModel, SpacetimeGeometry};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub protocol: ProtocolSection,
    pub budget: BudgetSection,
    pub device: Option<DeviceModel>,
    pub simulate: SimulateSection,
    pub plan: PlanSection,
    pub extract: ExtractSection,
    pub curve: CurveSection,
    pub spacetime: Option<SpacetimeGeometry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub n_rounds: Option<u64>,
    pub gamma: Option<f64>,
    pub omega_exp: Option<f64>,
    /// Derived from the completeness budget when absent.
    pub delta: Option<f64>,
    pub threshold_rule: ThresholdRule,
    /// Count table to estimate the score from.
    pub tally: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub eps_s: Option<f64>,
    pub eps_c: Option<f64>,
    /// Share of the soundness error given to the extractor.
    pub ext_fraction: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self {
            eps_s: None,
            eps_c: None,
            ext_fraction: DEFAULT_EXT_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub seed: u64,
    pub tally_out: Option<PathBuf>,
    /// Extractor input `A || B_test` as a bit file.
    pub bits_out: Option<PathBuf>,
    /// Largest run whose raw outputs may be kept in memory.
    pub record_limit_rounds: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            seed: 0,
            tally_out: None,
            bits_out: None,
            record_limit_rounds: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_grid: usize,
    pub n_min_rounds: f64,
    pub n_max_rounds: f64,
    pub n_rel_tol: f64,
    /// Hold the testing probability fixed instead of optimising it.
    pub gamma_fixed: Option<f64>,
    /// CSV of the net output over a gamma grid at the planned `n`.
    pub sweep_out: Option<PathBuf>,
    pub sweep_points: usize,
}

impl Default for PlanSection {
    fn default() -> Self {
        let o = PlanOptions::default();
        Self {
            gamma_min: o.gamma_range.0,
            gamma_max: o.gamma_range.1,
            gamma_grid: o.gamma_grid,
            n_min_rounds: o.n_range.0,
            n_max_rounds: o.n_range.1,
            n_rel_tol: o.n_rel_tol,
            gamma_fixed: None,
            sweep_out: None,
            sweep_points: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractSection {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed_file: Option<PathBuf>,
    /// Generate the seed from this integer when no seed file is given.
    pub seed_rng: Option<u64>,
    /// Where to save a generated seed.
    pub seed_out: Option<PathBuf>,
    pub m_bits: Option<usize>,
    /// Certified min-entropy of the input; certified from `[protocol]` when absent.
    pub k_bits: Option<f64>,
    pub block_len_bits: usize,
}

impl Default for ExtractSection {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            seed_file: None,
            seed_rng: None,
            seed_out: None,
            m_bits: None,
            k_bits: None,
            block_len_bits: DEFAULT_BLOCK_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Minimal rounds against the expected score.
    #[default]
    Score,
    /// Certified rate against the number of rounds.
    Rounds,
    /// Net output against the testing probability.
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSection {
    pub kind: CurveKind,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: usize,
    /// Log spacing; defaults to true for `rounds` and `gamma`.
    pub log_spaced: Option<bool>,
    pub out: Option<PathBuf>,
}

impl Default for CurveSection {
    fn default() -> Self {
        Self {
            kind: CurveKind::Score,
            start: None,
            stop: None,
            points: 25,
            log_spaced: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn budget(&self) -> Result<ErrorBudget, CliError> {
        let eps_s = require(self.budget.eps_s, "budget.eps_s")?;
        let eps_c = require(self.budget.eps_c, "budget.eps_c")?;
        Ok(ErrorBudget::with_ext_fraction(
            eps_s,
            eps_c,
            self.budget.ext_fraction,
        )?)
    }

    pub fn plan_options(&self) -> Result<PlanOptions, CliError> {
        let p = &self.plan;
        if !(p.gamma_min > 0.0 && p.gamma_min < p.gamma_max && p.gamma_max < 1.0) {
            return Err(CliError::Config(
                "plan: need 0 < gamma_min < gamma_max < 1".into(),
            ));
        }
        if !(p.n_min_rounds >= 1.0 && p.n_min_rounds < p.n_max_rounds && p.n_max_rounds.is_finite())
        {
            return Err(CliError::Config(
                "plan: need 1 <= n_min_rounds < n_max_rounds".into(),
            ));
        }
        if p.n_rel_tol.is_nan() || p.n_rel_tol <= 0.0 || p.gamma_grid < 3 {
            return Err(CliError::Config(
                "plan: need n_rel_tol > 0 and gamma_grid >= 3".into(),
            ));
        }
        Ok(PlanOptions {
            ext_fraction: self.budget.ext_fraction,
            gamma_range: (p.gamma_min, p.gamma_max),
            gamma_grid: p.gamma_grid,
            n_range: (p.n_min_rounds, p.n_max_rounds),
            n_rel_tol: p.n_rel_tol,
            threshold: self.protocol.threshold_rule,
        })
    }
}

pub fn require<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing `{key}`")))
}
