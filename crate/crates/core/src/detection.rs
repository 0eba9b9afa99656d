//! Single-photon avalanche diode model: efficiency, dark counts, dead time,
//! and a count-rate dependent Gaussian timing response.
//!
//! The timing response widens and its peak drifts as the detected count rate
//! rises. At gigahertz clocks this pushes clicks into neighbouring slots,
//! which is the dominant error source of the whole link. Both effects are
//! tabulated against the incident count rate and linearly interpolated.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::FWHM_PER_SIGMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorVariant {
    /// Stock counting module.
    Standard,
    /// Module with the fast pick-off timing circuit.
    Enhanced,
}

/// `(incident_rate_hz, value_s)` pairs sorted by rate.
pub type RateTable = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "DetectorSpec")]
pub struct DetectorModel {
    pub variant: DetectorVariant,
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    pub dead_time_s: f64,
    /// Timing jitter FWHM against incident count rate.
    pub jitter_table: RateTable,
    /// Peak position shift against incident count rate.
    pub shift_table: RateTable,
}

/// Config-file form of [`DetectorModel`]: omitted fields fall back to the
/// defaults of the chosen variant.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorSpec {
    #[serde(default = "default_variant")]
    variant: DetectorVariant,
    efficiency: Option<f64>,
    dark_rate_hz: Option<f64>,
    dead_time_s: Option<f64>,
    jitter_table: Option<RateTable>,
    shift_table: Option<RateTable>,
}

fn default_variant() -> DetectorVariant {
    DetectorVariant::Enhanced
}

impl From<DetectorSpec> for DetectorModel {
    fn from(spec: DetectorSpec) -> Self {
        let base = DetectorModel::new(spec.variant);
        DetectorModel {
            variant: spec.variant,
            efficiency: spec.efficiency.unwrap_or(base.efficiency),
            dark_rate_hz: spec.dark_rate_hz.unwrap_or(base.dark_rate_hz),
            dead_time_s: spec.dead_time_s.unwrap_or(base.dead_time_s),
            jitter_table: spec.jitter_table.unwrap_or(base.jitter_table),
            shift_table: spec.shift_table.unwrap_or(base.shift_table),
        }
    }
}

pub const DEFAULT_EFFICIENCY: f64 = 0.5;
pub const DEFAULT_DARK_RATE_HZ: f64 = 50.0;
pub const DEFAULT_DEAD_TIME_S: f64 = 50e-9;

impl DetectorVariant {
    pub fn default_jitter_table(self) -> RateTable {
        match self {
            DetectorVariant::Standard => vec![(1e4, 570e-12), (2e6, 950e-12)],
            DetectorVariant::Enhanced => vec![(1e4, 370e-12), (2e6, 450e-12)],
        }
    }

    pub fn default_shift_table(self) -> RateTable {
        match self {
            DetectorVariant::Standard => vec![(1e4, 0.0), (2e6, 300e-12)],
            DetectorVariant::Enhanced => vec![(1e4, 0.0), (2e6, 50e-12)],
        }
    }
}

impl DetectorModel {
    pub fn new(variant: DetectorVariant) -> Self {
        Self {
            variant,
            efficiency: DEFAULT_EFFICIENCY,
            dark_rate_hz: DEFAULT_DARK_RATE_HZ,
            dead_time_s: DEFAULT_DEAD_TIME_S,
            jitter_table: variant.default_jitter_table(),
            shift_table: variant.default_shift_table(),
        }
    }

    pub fn standard() -> Self {
        Self::new(DetectorVariant::Standard)
    }

    pub fn enhanced() -> Self {
        Self::new(DetectorVariant::Enhanced)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid("efficiency", format!("{} not in [0, 1]", self.efficiency)));
        }
        if !(self.dark_rate_hz >= 0.0 && self.dark_rate_hz.is_finite()) {
            return Err(Error::invalid("dark_rate_hz", "must be >= 0"));
        }
        if !(self.dead_time_s >= 0.0 && self.dead_time_s.is_finite()) {
            return Err(Error::invalid("dead_time_s", "must be >= 0"));
        }
        validate_table(&self.jitter_table, true).map_err(|e| e.within("jitter_table"))?;
        validate_table(&self.shift_table, false).map_err(|e| e.within("shift_table"))?;
        Ok(())
    }

    pub fn shift_at_rate(&self, incident_rate_hz: f64) -> Result<f64> {
        interpolate(&self.shift_table, incident_rate_hz)
    }

    /// Timing response for a given incident rate, widened in quadrature by
    /// `extra_sigma_s` (source width and dispersion).
    pub fn timing_at_rate(&self, incident_rate_hz: f64, extra_sigma_s: f64) -> Result<TimingModel> {
        let fwhm = jitter_at_rate(self, incident_rate_hz)?;
        Ok(TimingModel {
            sigma_s: (fwhm / FWHM_PER_SIGMA).hypot(extra_sigma_s),
            shift_s: self.shift_at_rate(incident_rate_hz)?,
        })
    }
}

fn validate_table(table: &[(f64, f64)], positive_values: bool) -> Result<()> {
    if table.is_empty() {
        return Err(Error::invalid("table", "must not be empty"));
    }
    for (i, &(rate, value)) in table.iter().enumerate() {
        if !(rate >= 0.0 && rate.is_finite() && value.is_finite()) {
            return Err(Error::invalid(format!("[{i}]"), "non-finite or negative rate"));
        }
        if positive_values && value <= 0.0 {
            return Err(Error::invalid(format!("[{i}]"), "jitter FWHM must be > 0"));
        }
        if i > 0 && rate <= table[i - 1].0 {
            return Err(Error::invalid(format!("[{i}]"), "rates must be strictly increasing"));
        }
    }
    Ok(())
}

fn interpolate(table: &[(f64, f64)], x: f64) -> Result<f64> {
    let (first, last) = match (table.first(), table.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::invalid("table", "must not be empty")),
    };
    if x <= first.0 {
        return Ok(first.1);
    }
    if x >= last.0 {
        return Ok(last.1);
    }
    let i = table.partition_point(|&(r, _)| r <= x);
    let (r0, v0) = table[i - 1];
    let (r1, v1) = table[i];
    Ok(v0 + (v1 - v0) * (x - r0) / (r1 - r0))
}

/// Jitter FWHM at `incident_rate_hz`, clamped to the table ends.
pub fn jitter_at_rate(model: &DetectorModel, incident_rate_hz: f64) -> Result<f64> {
    if !(incident_rate_hz >= 0.0) {
        return Err(Error::invalid("incident_rate_hz", "must be >= 0"));
    }
    interpolate(&model.jitter_table, incident_rate_hz)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Gaussian arrival-time distribution relative to the emitting slot centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    pub sigma_s: f64,
    pub shift_s: f64,
}

impl TimingModel {
    /// Probability that a click lands inside the acceptance window of the
    /// slot `k` positions after its own. The window is `window_fraction` of
    /// the slot, centred.
    pub fn slot_fraction(&self, k: i64, slot_s: f64, window_fraction: f64) -> f64 {
        let centre = k as f64 * slot_s;
        let half = 0.5 * window_fraction * slot_s;
        let (lo, hi) = (centre - half - self.shift_s, centre + half - self.shift_s);
        if self.sigma_s <= 0.0 {
            // slot boundaries round half up
            return if lo <= 0.0 && hi > 0.0 { 1.0 } else { 0.0 };
        }
        // difference of upper tails keeps precision far from the centre
        let (a, b) = (lo / self.sigma_s, hi / self.sigma_s);
        if a > 0.0 {
            normal_cdf(-a) - normal_cdf(-b)
        } else {
            normal_cdf(b) - normal_cdf(a)
        }
    }

    /// Probability that a click is registered in a slot other than its own
    /// (full-slot window).
    pub fn misallocation_probability(&self, slot_s: f64) -> f64 {
        (1.0 - self.slot_fraction(0, slot_s, 1.0)).clamp(0.0, 1.0)
    }

    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        self.shift_s + self.sigma_s * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    Zero,
    One,
}

impl Channel {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Channel::One
        } else {
            Channel::Zero
        }
    }

    pub fn bit(self) -> bool {
        self == Channel::One
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Marks a click with no originating pulse.
pub const DARK_SLOT: i64 = -1;

/// One registered detector click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRecord {
    /// Slot the click is registered in.
    pub slot: i64,
    /// Slot of the originating pulse, or [`DARK_SLOT`].
    pub true_slot: i64,
    pub channel: Channel,
    /// Residual offset from the centre of `slot`.
    pub offset_s: f64,
    /// Absolute click time; slot `n` is centred on `n * slot_duration`.
    pub time_s: f64,
}

impl DetectionRecord {
    pub fn is_dark(&self) -> bool {
        self.true_slot == DARK_SLOT
    }

    pub fn is_misallocated(&self) -> bool {
        !self.is_dark() && self.true_slot != self.slot
    }
}

/// Quantizes a click time, given relative to its emitting slot's centre, to
/// the nearest slot. Returns that slot and the residual offset.
pub fn registered_slot(true_time_offset_s: f64, true_slot: i64, slot_duration_s: f64) -> (i64, f64) {
    let shift = (true_time_offset_s / slot_duration_s + 0.5).floor();
    let residual = true_time_offset_s - shift * slot_duration_s;
    (true_slot + shift as i64, residual)
}

fn record_at(time_s: f64, true_slot: i64, channel: Channel, slot_duration_s: f64) -> DetectionRecord {
    let (slot, offset_s) = registered_slot(time_s, 0, slot_duration_s);
    DetectionRecord {
        slot,
        true_slot,
        channel,
        offset_s,
        time_s,
    }
}

/// A photon click from the pulse in `true_slot` arriving `offset_s` after
/// that slot's centre.
pub fn photon_click(true_slot: i64, offset_s: f64, channel: Channel, slot_duration_s: f64) -> DetectionRecord {
    let (slot, residual) = registered_slot(offset_s, true_slot, slot_duration_s);
    DetectionRecord {
        slot,
        true_slot,
        channel,
        offset_s: residual,
        time_s: true_slot as f64 * slot_duration_s + offset_s,
    }
}

/// Poisson dark clicks over `[-slot/2, duration - slot/2)`, each assigned to a
/// uniformly chosen channel. Output is time-ordered.
pub fn dark_clicks<R: Rng + ?Sized>(
    dark_rate_hz: f64,
    duration_s: f64,
    slot_duration_s: f64,
    rng: &mut R,
) -> Result<Vec<DetectionRecord>> {
    poisson_times(dark_rate_hz, duration_s, slot_duration_s, rng).map(|times| {
        times
            .into_iter()
            .map(|t| {
                let channel = Channel::from_bit(rng.random());
                record_at(t, DARK_SLOT, channel, slot_duration_s)
            })
            .collect()
    })
}

/// Dark clicks of a single detector.
pub fn dark_clicks_on<R: Rng + ?Sized>(
    channel: Channel,
    dark_rate_hz: f64,
    duration_s: f64,
    slot_duration_s: f64,
    rng: &mut R,
) -> Result<Vec<DetectionRecord>> {
    poisson_times(dark_rate_hz, duration_s, slot_duration_s, rng).map(|times| {
        times
            .into_iter()
            .map(|t| record_at(t, DARK_SLOT, channel, slot_duration_s))
            .collect()
    })
}

fn poisson_times<R: Rng + ?Sized>(
    rate_hz: f64,
    duration_s: f64,
    slot_duration_s: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(rate_hz >= 0.0 && rate_hz.is_finite()) {
        return Err(Error::invalid("dark_rate_hz", "must be >= 0"));
    }
    if !(slot_duration_s > 0.0) {
        return Err(Error::invalid("slot_duration_s", "must be > 0"));
    }
    let mut times = Vec::new();
    if rate_hz == 0.0 || duration_s <= 0.0 {
        return Ok(times);
    }
    let gap = Exp::new(rate_hz).map_err(|e| Error::invalid("dark_rate_hz", e.to_string()))?;
    let start = -0.5 * slot_duration_s;
    let mut t = start + gap.sample(rng);
    while t < start + duration_s {
        times.push(t);
        t += gap.sample(rng);
    }
    Ok(times)
}

/// Non-paralyzable dead time per detector: a click is dropped if it falls
/// within `dead_time_s` of the previous accepted click on the same channel.
pub fn apply_dead_time(records: &[DetectionRecord], dead_time_s: f64) -> Result<Vec<DetectionRecord>> {
    if let Some(i) = records.windows(2).position(|w| w[1].time_s < w[0].time_s) {
        return Err(Error::UnsortedRecords { index: i + 1 });
    }
    if dead_time_s <= 0.0 {
        return Ok(records.to_vec());
    }
    let mut last = [f64::NEG_INFINITY; 2];
    Ok(records
        .iter()
        .filter(|r| {
            let slot = &mut last[r.channel.index()];
            if r.time_s - *slot < dead_time_s {
                false
            } else {
                *slot = r.time_s;
                true
            }
        })
        .copied()
        .collect())
}
