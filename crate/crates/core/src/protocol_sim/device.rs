use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polarisation-entangled source with lossy detectors.
///
/// The source emits `cos(theta)|HV> + sin(theta)|VH>` and each analyser
/// projects onto `cos(phi)|H> + sin(phi)|V>`. Outcome 1 means the photon
/// passed the analyser and was detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumDevice {
    /// State angle in degrees.
    pub theta_deg: f64,
    /// Alice's analyser angles in degrees for x = 0, 1.
    pub alice_deg: [f64; 2],
    /// Bob's analyser angles in degrees for y = 0, 1.
    pub bob_deg: [f64; 2],
    pub eta_a: f64,
    pub eta_b: f64,
}

impl QuantumDevice {
    /// Settings and efficiencies of the reference photonic experiment.
    pub fn reference() -> Self {
        Self {
            theta_deg: 24.3,
            alice_deg: [-83.08, -118.59],
            bob_deg: [6.92, -28.59],
            eta_a: 0.8041,
            eta_b: 0.8224,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeviceModel {
    /// Each test round is won independently with probability `omega`;
    /// Alice's output is a fair coin.
    Bernoulli {
        omega: f64,
    },
    Quantum(QuantumDevice),
}

impl DeviceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            DeviceModel::Bernoulli { omega } => {
                if !(0.0..=1.0).contains(omega) {
                    return Err(Error::Domain {
                        what: "omega",
                        value: *omega,
                        range: "[0, 1]",
                    });
                }
            }
            DeviceModel::Quantum(d) => {
                for (what, eta) in [("eta_a", d.eta_a), ("eta_b", d.eta_b)] {
                    if !(0.0..=1.0).contains(&eta) {
                        return Err(Error::Domain {
                            what,
                            value: eta,
                            range: "[0, 1]",
                        });
                    }
                }
                let angles = [
                    d.theta_deg,
                    d.alice_deg[0],
                    d.alice_deg[1],
                    d.bob_deg[0],
                    d.bob_deg[1],
                ];
                if angles.iter().any(|a| !a.is_finite()) {
                    return Err(Error::invalid("angles must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Joint output distribution `p[a][b]` for inputs `(x, y)`.
    pub fn setting_distribution(&self, x: u8, y: u8) -> Result<[[f64; 2]; 2]> {
        if x > 1 || y > 1 {
            return Err(Error::invalid("inputs must be bits"));
        }
        self.validate()?;
        Ok(match self {
            DeviceModel::Bernoulli { omega } => {
                let (same, diff) = if x & y == 0 {
                    (omega / 2.0, (1.0 - omega) / 2.0)
                } else {
                    ((1.0 - omega) / 2.0, omega / 2.0)
                };
                [[same, diff], [diff, same]]
            }
            DeviceModel::Quantum(d) => quantum_distribution(d, x, y),
        })
    }

    /// CHSH winning probability with uniformly random inputs.
    pub fn chsh_score(&self) -> Result<f64> {
        let mut s = 0.0;
        for x in 0..2u8 {
            for y in 0..2u8 {
                let p = self.setting_distribution(x, y)?;
                for (a, row) in p.iter().enumerate() {
                    for (b, pab) in row.iter().enumerate() {
                        if (a ^ b) as u8 == x & y {
                            s += pab;
                        }
                    }
                }
            }
        }
        Ok(s / 4.0)
    }
}

/// Outcome distribution of the photonic model.
pub fn quantum_distribution(d: &QuantumDevice, x: u8, y: u8) -> [[f64; 2]; 2] {
    let th = d.theta_deg.to_radians();
    let pa = d.alice_deg[x as usize].to_radians();
    let pb = d.bob_deg[y as usize].to_radians();
    let (ct, st) = (th.cos(), th.sin());
    let amp = ct * pa.cos() * pb.sin() + st * pa.sin() * pb.cos();
    let both = amp * amp;
    let pass_a = ct * ct * pa.cos().powi(2) + st * st * pa.sin().powi(2);
    let pass_b = ct * ct * pb.sin().powi(2) + st * st * pb.cos().powi(2);
    let p11 = d.eta_a * d.eta_b * both;
    let p10 = d.eta_a * pass_a - p11;
    let p01 = d.eta_b * pass_b - p11;
    let p00 = 1.0 - p11 - p10 - p01;
    [[p00, p01], [p10, p11]]
}
