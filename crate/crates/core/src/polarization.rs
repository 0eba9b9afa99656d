//! Linear polarization states and the kernels that act on them.
//!
//! Angles are radians. Bit 0 is carried at 0 rad and bit 1 at +π/4 by
//! default, so the two states are non-orthogonal with a 45° separation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into [0, π).
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(PI);
    // rem_euclid can return PI itself for tiny negative inputs
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// A linear polarization state of a weak coherent pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationState {
    angle: f64,
    relative_amplitude: f64,
}

impl PolarizationState {
    /// Lossless state at `angle` (normalized into [0, π)).
    pub fn new(angle: f64) -> Self {
        Self {
            angle: normalize_angle(angle),
            relative_amplitude: 1.0,
        }
    }

    pub fn with_amplitude(angle: f64, relative_amplitude: f64) -> Result<Self> {
        if !(relative_amplitude > 0.0 && relative_amplitude <= 1.0) {
            return Err(Error::invalid(
                "relative_amplitude",
                format!("{relative_amplitude} not in (0, 1]"),
            ));
        }
        Ok(Self {
            angle: normalize_angle(angle),
            relative_amplitude,
        })
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::new(degrees.to_radians())
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn relative_amplitude(&self) -> f64 {
        self.relative_amplitude
    }

    /// Surviving intensity fraction, `relative_amplitude²`.
    pub fn intensity(&self) -> f64 {
        self.relative_amplitude * self.relative_amplitude
    }
}

/// The two non-orthogonal states used to encode bit 0 and bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub state0: PolarizationState,
    pub state1: PolarizationState,
}

impl Default for StatePair {
    fn default() -> Self {
        Self {
            state0: PolarizationState::new(0.0),
            state1: PolarizationState::new(FRAC_PI_4),
        }
    }
}

impl StatePair {
    pub fn state(&self, bit: bool) -> PolarizationState {
        if bit {
            self.state1
        } else {
            self.state0
        }
    }

    /// Angle between the two states folded into [0, π/2].
    pub fn relative_angle(&self) -> f64 {
        let d = (self.state1.angle - self.state0.angle).abs() % PI;
        if d > FRAC_PI_2 {
            PI - d
        } else {
            d
        }
    }
}

/// Malus-law detection probability of `state` behind a linear analyzer.
pub fn projection_probability(state: &PolarizationState, analyzer_angle: f64) -> f64 {
    let c = (state.angle - analyzer_angle).cos();
    (state.intensity() * c * c).clamp(0.0, 1.0)
}

/// Passes `state` through a lumped diattenuator of `pdl_db` whose low-loss
/// axis lies at `pdl_axis`. The component orthogonal to that axis is scaled by
/// `10^(-pdl_db/20)`, which rotates the state toward the axis.
pub fn apply_pdl(state: &PolarizationState, pdl_db: f64, pdl_axis: f64) -> Result<PolarizationState> {
    if !(pdl_db >= 0.0) {
        return Err(Error::invalid("pdl_db", format!("{pdl_db} must be >= 0")));
    }
    if pdl_db == 0.0 {
        return Ok(*state);
    }
    let g = 10f64.powf(-pdl_db / 20.0);
    let rel = state.angle - pdl_axis;
    let along = rel.cos();
    let across = g * rel.sin();
    let angle = across.atan2(along) + pdl_axis;
    let scale = along.hypot(across);
    Ok(PolarizationState {
        angle: normalize_angle(angle),
        relative_amplitude: (state.relative_amplitude * scale).clamp(f64::MIN_POSITIVE, 1.0),
    })
}

/// Fraction of the key an eavesdropper can learn with optimal unambiguous
/// discrimination of two equiprobable linear states separated by
/// `relative_angle`: `1 - cos(relative_angle)`.
pub fn eve_information_bound(relative_angle: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&relative_angle) {
        return Err(Error::invalid(
            "relative_angle",
            format!("{relative_angle} rad outside [0, pi/2]"),
        ));
    }
    Ok((1.0 - relative_angle.min(FRAC_PI_2).cos()).clamp(0.0, 1.0))
}
