use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in metres per nanosecond.
const C_M_PER_NS: f64 = 0.299_792_458;

/// Per-party timing of a measurement station, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationDelays {
    /// Random number generation time.
    pub qrng_ns: f64,
    /// Delay between the random number generator and the Pockels cell.
    pub delay_ns: f64,
    /// Pockels cell switching time.
    pub pc_ns: f64,
    /// Time until the detector output is registered.
    pub measure_ns: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeGeometry {
    /// Free-space distance source to Alice.
    pub sa_m: f64,
    /// Free-space distance source to Bob.
    pub sb_m: f64,
    /// Effective optical path source to Alice.
    pub l_sa_m: f64,
    /// Effective optical path source to Bob.
    pub l_sb_m: f64,
    /// Duration of the entangled photon pair generation.
    pub emission_ns: f64,
    pub alice: StationDelays,
    pub bob: StationDelays,
}

impl SpacetimeGeometry {
    /// Layout of the reference experiment.
    pub fn reference() -> Self {
        Self {
            sa_m: 93.0,
            sb_m: 90.0,
            l_sa_m: 191.0,
            l_sb_m: 173.5,
            emission_ns: 10.0,
            alice: StationDelays {
                qrng_ns: 96.0,
                delay_ns: 270.0,
                pc_ns: 112.0,
                measure_ns: 55.0,
            },
            bob: StationDelays {
                qrng_ns: 96.0,
                delay_ns: 230.0,
                pc_ns: 100.0,
                measure_ns: 100.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = [
            self.sa_m,
            self.sb_m,
            self.l_sa_m,
            self.l_sb_m,
            self.emission_ns,
            self.alice.qrng_ns,
            self.alice.delay_ns,
            self.alice.pc_ns,
            self.alice.measure_ns,
            self.bob.qrng_ns,
            self.bob.delay_ns,
            self.bob.pc_ns,
            self.bob.measure_ns,
        ];
        if d.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::invalid("distances and delays must be non-negative"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacetimeVerdict {
    pub locality_a: bool,
    pub locality_b: bool,
    pub independence_a: bool,
    pub independence_b: bool,
}

impl SpacetimeVerdict {
    pub fn all(&self) -> bool {
        self.locality_a && self.locality_b && self.independence_a && self.independence_b
    }
}

/// Locality: a party's measurement must finish before light from the other
/// party's input choice arrives. Measurement independence: input choices
/// must be made before light from the pair emission arrives.
pub fn spacetime_check(g: &SpacetimeGeometry) -> Result<SpacetimeVerdict> {
    g.validate()?;
    let light = |m: f64| m / C_M_PER_NS;
    let separation = light(g.sa_m + g.sb_m);
    let path_skew = light(g.l_sa_m - g.l_sb_m);
    let busy = |s: &StationDelays| s.qrng_ns + s.delay_ns + s.pc_ns + s.measure_ns;
    Ok(SpacetimeVerdict {
        locality_a: separation > g.emission_ns - path_skew + busy(&g.alice),
        locality_b: separation > g.emission_ns + path_skew + busy(&g.bob),
        independence_a: light(g.sa_m) > light(g.l_sa_m) - g.alice.delay_ns - g.alice.pc_ns,
        independence_b: light(g.sb_m) > light(g.l_sb_m) - g.bob.delay_ns - g.bob.pc_ns,
    })
}
