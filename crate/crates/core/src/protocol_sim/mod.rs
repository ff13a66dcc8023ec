//! Honest-device simulation of the spot-checking protocol, count-table
//! scoring and the experimental timing checks.

pub mod device;
pub mod interval;
pub mod run;
pub mod spacetime;
pub mod tally;

pub use device::{quantum_distribution, DeviceModel, QuantumDevice};
pub use interval::{biased_bits, BitSource, IntervalSampler, RngBits};
pub use run::{
    run_protocol, Partial, RawOutputs, RoundRecord, RunSpec, Score, SimOptions, Transcript,
    CHUNK_ROUNDS,
};
pub use spacetime::{spacetime_check, SpacetimeGeometry, SpacetimeVerdict, StationDelays};
pub use tally::{chsh_score_from_counts, heralding_efficiency, TrialTally};

use crate::error::Result;

/// Joint outcome distribution `p[a][b]` of the photonic model.
pub fn quantum_setting_distribution(model: &DeviceModel, x: u8, y: u8) -> Result<[[f64; 2]; 2]> {
    match model {
        DeviceModel::Quantum(_) => model.setting_distribution(x, y),
        DeviceModel::Bernoulli { .. } => Err(crate::Error::invalid("not a quantum device model")),
    }
}
