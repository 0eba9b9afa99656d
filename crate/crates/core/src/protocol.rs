//! B92 measurement and sifting.
//!
//! Bob splits incoming light 50:50 onto two polarizing beam splitters. The
//! arm whose analyzer is orthogonal to state 0 can only fire for state 1
//! (conclusive "1"), and vice versa. Everything else leaves through the
//! unmonitored "?" ports. With the default 45° geometry a quarter of the
//! photons reaching Bob give a conclusive result.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detection::{Channel, DetectionRecord};
use crate::error::{Error, Result};
use crate::polarization::PolarizationState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverSetup {
    /// Analyzer of the conclusive-"1" arm.
    pub analyzer1_angle_rad: f64,
    /// Analyzer of the conclusive-"0" arm.
    pub analyzer0_angle_rad: f64,
    /// Fraction of the light sent to the conclusive-"1" arm.
    pub splitting_ratio: f64,
    /// PBS extinction ratio; `inf` means no leakage.
    pub extinction_ratio_db: f64,
    /// Width of the data collection window as a fraction of the slot.
    pub window_fraction: f64,
}

impl Default for ReceiverSetup {
    fn default() -> Self {
        Self {
            analyzer1_angle_rad: FRAC_PI_2,
            analyzer0_angle_rad: 0.75 * PI,
            splitting_ratio: 0.5,
            extinction_ratio_db: 25.0,
            window_fraction: 1.0,
        }
    }
}

impl ReceiverSetup {
    /// Perfect analyzers with the default geometry.
    pub fn ideal() -> Self {
        Self {
            extinction_ratio_db: f64::INFINITY,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.splitting_ratio) {
            return Err(Error::invalid("splitting_ratio", "must be in [0, 1]"));
        }
        if !(self.extinction_ratio_db >= 0.0) {
            return Err(Error::invalid("extinction_ratio_db", "must be >= 0"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::invalid("window_fraction", "must be in (0, 1]"));
        }
        if !(self.analyzer0_angle_rad.is_finite() && self.analyzer1_angle_rad.is_finite()) {
            return Err(Error::invalid("analyzer_angle_rad", "must be finite"));
        }
        Ok(())
    }

    /// Fraction of the blocked polarization leaking through a PBS.
    pub fn leakage(&self) -> f64 {
        if self.extinction_ratio_db.is_infinite() {
            0.0
        } else {
            10f64.powf(-self.extinction_ratio_db / 10.0)
        }
    }

    fn arm(&self, channel: Channel) -> (f64, f64) {
        match channel {
            Channel::One => (self.splitting_ratio, self.analyzer1_angle_rad),
            Channel::Zero => (1.0 - self.splitting_ratio, self.analyzer0_angle_rad),
        }
    }

    /// Probability that one photon in `state` exits the conclusive port of
    /// `channel`'s arm (before detector efficiency).
    pub fn conclusive_probability(&self, state: &PolarizationState, channel: Channel) -> f64 {
        let (weight, analyzer) = self.arm(channel);
        let c2 = (state.angle() - analyzer).cos().powi(2);
        let eps = self.leakage();
        state.intensity() * weight * ((1.0 - eps) * c2 + eps * (1.0 - c2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Conclusive(Channel),
    Ambiguous,
    NoClick,
}

/// Routes one photon through Bob's analyzers.
pub fn measure_pulse<R: Rng + ?Sized>(state: &PolarizationState, setup: &ReceiverSetup, rng: &mut R) -> Outcome {
    if rng.random::<f64>() >= state.intensity() {
        return Outcome::NoClick;
    }
    let channel = Channel::from_bit(rng.random::<f64>() < setup.splitting_ratio);
    let (_, analyzer) = setup.arm(channel);
    let c2 = (state.angle() - analyzer).cos().powi(2);
    let eps = setup.leakage();
    let pass = (1.0 - eps) * c2 + eps * (1.0 - c2);
    if rng.random::<f64>() < pass {
        Outcome::Conclusive(channel)
    } else {
        Outcome::Ambiguous
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiftedKey {
    pub bits: Vec<bool>,
    /// Slot each bit came from, strictly increasing.
    pub source_slots: Vec<u64>,
    pub owner: Party,
}

impl SiftedKey {
    pub fn empty(owner: Party) -> Self {
        Self {
            bits: Vec::new(),
            source_slots: Vec::new(),
            owner,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Keeps the slots in which exactly one conclusive detector fired. Bob's bit
/// is the channel label, Alice's is what she sent in that slot. Records
/// registered outside Alice's slot range are ignored.
pub fn sift(alice_bits: &[bool], bob_records: &[DetectionRecord]) -> (SiftedKey, SiftedKey) {
    // per slot: bit 0 set if channel 0 fired, bit 1 if channel 1 fired
    let mut fired: BTreeMap<u64, u8> = BTreeMap::new();
    for r in bob_records {
        if r.slot < 0 || r.slot as usize >= alice_bits.len() {
            continue;
        }
        *fired.entry(r.slot as u64).or_default() |= 1 << r.channel.index();
    }
    let mut alice = SiftedKey::empty(Party::Alice);
    let mut bob = SiftedKey::empty(Party::Bob);
    for (slot, mask) in fired {
        let bob_bit = match mask {
            0b01 => false,
            0b10 => true,
            _ => continue,
        };
        alice.bits.push(alice_bits[slot as usize]);
        alice.source_slots.push(slot);
        bob.bits.push(bob_bit);
        bob.source_slots.push(slot);
    }
    (alice, bob)
}

/// Publicly compares a random `sample_fraction` of positions and discards
/// them. Returns the error estimate and the remaining keys.
pub fn measure_qber<R: Rng + ?Sized>(
    alice_key: &SiftedKey,
    bob_key: &SiftedKey,
    sample_fraction: f64,
    rng: &mut R,
) -> Result<(f64, SiftedKey, SiftedKey)> {
    if alice_key.len() != bob_key.len() {
        return Err(Error::LengthMismatch {
            left: alice_key.len(),
            right: bob_key.len(),
        });
    }
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::invalid("sample_fraction", "must be in (0, 1]"));
    }
    let n = alice_key.len();
    let k = ((n as f64 * sample_fraction).round() as usize).min(n);
    let mut sampled = vec![false; n];
    if k == n {
        sampled.fill(true);
    } else {
        for i in index::sample(rng, n, k) {
            sampled[i] = true;
        }
    }
    let errors = (0..n)
        .filter(|&i| sampled[i] && alice_key.bits[i] != bob_key.bits[i])
        .count();
    let estimate = if k == 0 { 0.0 } else { errors as f64 / k as f64 };
    let keep = |key: &SiftedKey| {
        let mut out = SiftedKey::empty(key.owner);
        for i in (0..n).filter(|&i| !sampled[i]) {
            out.bits.push(key.bits[i]);
            out.source_slots.push(key.source_slots[i]);
        }
        out
    };
    Ok((estimate, keep(alice_key), keep(bob_key)))
}

/// Fraction of differing positions.
pub fn error_rate(a: &[bool], b: &[bool]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64
}
