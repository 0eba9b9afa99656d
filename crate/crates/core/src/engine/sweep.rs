//! One-dimensional parameter sweeps over a base scenario.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_link, LinkMetrics, ScenarioConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    ClockHz,
    FiberLengthKm,
    /// Replaces the fibre by a lumped attenuator of the given loss, so the
    /// link has that loss without any dispersion.
    AttenuationEquivalentDb,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 3] = [
        SweepParameter::ClockHz,
        SweepParameter::FiberLengthKm,
        SweepParameter::AttenuationEquivalentDb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::ClockHz => "clock_hz",
            SweepParameter::FiberLengthKm => "fiber_length_km",
            SweepParameter::AttenuationEquivalentDb => "attenuation_equivalent_db",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut config = base.clone();
        match self {
            SweepParameter::ClockHz => config.clock_hz = value,
            SweepParameter::FiberLengthKm => config.path.fiber_length_km = value,
            SweepParameter::AttenuationEquivalentDb => {
                config.path.fiber_length_km = 0.0;
                config.path.attenuator_db = value;
            }
        }
        config
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("parameter", format!("unknown sweep parameter {s:?}")))
    }
}

/// Runs `base` once per value. Every point uses the base seed, so the
/// Monte-Carlo noise is common across the sweep.
pub fn sweep(parameter: SweepParameter, values: &[f64], base: &ScenarioConfig) -> Result<Vec<(f64, LinkMetrics)>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "sweep needs at least one value"));
    }
    values
        .par_iter()
        .map(|&v| {
            let config = parameter.apply(base, v);
            config.validate().map_err(|e| e.within(parameter.name()))?;
            Ok((v, run_link(&config)?))
        })
        .collect()
}
