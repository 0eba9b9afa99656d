//! End-to-end link simulation.
//!
//! A [`ScenarioConfig`] describes one Alice→Bob link. [`run_link`] evaluates it
//! either in closed form ([`Mode::Analytic`]) or by simulating every clock
//! slot ([`Mode::MonteCarlo`]). Both paths start from the same
//! [`PreparedLink`], so they model identical physics and serve as oracles for
//! each other.

mod analytic;
mod montecarlo;
mod network;
mod sweep;

pub use analytic::run_analytic;
pub use montecarlo::{distill_key, simulate, DistilledKey, Simulation};
pub use network::{run_network, NetworkTopology, PortMetrics, PortSpec};
pub use sweep::{sweep, SweepParameter};

use serde::{Deserialize, Serialize};

use crate::detection::{Channel, DetectorModel, TimingModel};
use crate::error::{Error, Result};
use crate::link::{compute_budget, LinkBudget, LinkPath};
use crate::polarization::{eve_information_bound, StatePair};
use crate::postprocessing::{KeyRateInputs, DEFAULT_RECONCILIATION_EFFICIENCY};
use crate::protocol::ReceiverSetup;
use crate::source::SourceConfig;

pub const DEFAULT_SLOT_COUNT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MonteCarlo,
    #[default]
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorPair {
    pub channel0: DetectorModel,
    pub channel1: DetectorModel,
}

impl Default for DetectorPair {
    fn default() -> Self {
        Self::both(DetectorModel::enhanced())
    }
}

impl DetectorPair {
    pub fn both(model: DetectorModel) -> Self {
        Self {
            channel0: model.clone(),
            channel1: model,
        }
    }

    pub fn get(&self, channel: Channel) -> &DetectorModel {
        match channel {
            Channel::Zero => &self.channel0,
            Channel::One => &self.channel1,
        }
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut DetectorModel)) {
        f(&mut self.channel0);
        f(&mut self.channel1);
    }
}

/// Settings for QBER estimation and key distillation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub reconciliation_efficiency: f64,
    pub pa_margin: f64,
    /// Fraction of the sifted key compared to estimate the QBER in
    /// Monte-Carlo runs. 1.0 compares the whole key.
    pub sample_fraction: f64,
    /// Fraction sacrificed for QBER estimation when distilling a key.
    pub distill_sample_fraction: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            reconciliation_efficiency: DEFAULT_RECONCILIATION_EFFICIENCY,
            pa_margin: 0.0,
            sample_fraction: 1.0,
            distill_sample_fraction: 0.1,
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<()> {
        if !(self.reconciliation_efficiency >= 1.0) {
            return Err(Error::invalid("reconciliation_efficiency", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.pa_margin) {
            return Err(Error::invalid("pa_margin", "must be in [0, 1)"));
        }
        for (name, v) in [
            ("sample_fraction", self.sample_fraction),
            ("distill_sample_fraction", self.distill_sample_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(name, "must be in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub clock_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    pub seed: u64,
    pub mode: Mode,
    pub source: SourceConfig,
    pub path: LinkPath,
    pub detectors: DetectorPair,
    pub receiver: ReceiverSetup,
    pub analysis: AnalysisConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkTopology>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            clock_hz: 1e9,
            slot_count: None,
            duration_s: None,
            seed: 0,
            mode: Mode::Analytic,
            source: SourceConfig::default(),
            path: LinkPath::default(),
            detectors: DetectorPair::default(),
            receiver: ReceiverSetup::default(),
            analysis: AnalysisConfig::default(),
            network: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(Error::invalid("clock_hz", "must be > 0"));
        }
        if let Some(d) = self.duration_s {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid("duration_s", "must be > 0"));
            }
        }
        if self.slot_count()? == 0 {
            return Err(Error::invalid("slot_count", "must be > 0"));
        }
        self.source.validate().map_err(|e| e.within("source"))?;
        self.path.validate().map_err(|e| e.within("path"))?;
        self.detectors
            .channel0
            .validate()
            .map_err(|e| e.within("detectors.channel0"))?;
        self.detectors
            .channel1
            .validate()
            .map_err(|e| e.within("detectors.channel1"))?;
        self.receiver.validate().map_err(|e| e.within("receiver"))?;
        self.analysis.validate().map_err(|e| e.within("analysis"))?;
        if let Some(net) = &self.network {
            net.validate().map_err(|e| e.within("network"))?;
        }
        Ok(())
    }

    /// Number of clock slots: explicit, derived from the duration, or the default.
    pub fn slot_count(&self) -> Result<u64> {
        let from_duration = self.duration_s.map(|d| (d * self.clock_hz).round() as u64);
        match (self.slot_count, from_duration) {
            (Some(n), Some(m)) if n != m => Err(Error::invalid(
                "slot_count",
                format!("{n} disagrees with clock_hz * duration_s = {m}"),
            )),
            (Some(n), _) | (None, Some(n)) => Ok(n),
            (None, None) => Ok(DEFAULT_SLOT_COUNT),
        }
    }

    pub fn slot_duration_s(&self) -> f64 {
        1.0 / self.clock_hz
    }

    pub fn with_detectors(mut self, model: DetectorModel) -> Self {
        self.detectors = DetectorPair::both(model);
        self
    }
}

/// Expected or observed counts of sifted clicks by origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CountBreakdown {
    /// Photon clicks registered in their own slot.
    pub signal: f64,
    pub dark: f64,
    /// Photon clicks registered in a neighbouring slot.
    pub misallocated: f64,
}

/// Photon fates at Bob's analyzers (before detector efficiency).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PhotonDiagnostics {
    pub arrived: f64,
    pub conclusive: f64,
    pub ambiguous: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkMetrics {
    /// Every detector click that survived dead time.
    pub raw_click_rate_hz: f64,
    /// Slots with at least one click inside the collection window.
    pub conclusive_rate_hz: f64,
    /// Slots kept after sifting.
    pub sifted_rate_hz: f64,
    pub qber: f64,
    pub nbr_hz: f64,
    pub counts: CountBreakdown,
    /// True when no sifted bits exist; `qber` is then reported as 0.
    pub insufficient_data: bool,
    pub slot_count: u64,
    /// Sifted bits, observed or expected.
    pub sifted_bits: f64,
    pub eve_fraction: f64,
    pub photons: PhotonDiagnostics,
}

impl LinkMetrics {
    pub fn duration_s(&self, clock_hz: f64) -> f64 {
        self.slot_count as f64 / clock_hz
    }
}

/// Quantities shared by the analytic and Monte-Carlo paths.
#[derive(Debug, Clone)]
pub struct PreparedLink {
    pub clock_hz: f64,
    pub slot_s: f64,
    pub slot_count: u64,
    pub mu: f64,
    pub budget: LinkBudget,
    /// `detect_mean[bit][channel]`: mean detected photons per pulse.
    pub detect_mean: [[f64; 2]; 2],
    /// Photon click arrival rate per detector, before dead time.
    pub incident_rate_hz: [f64; 2],
    pub timing: [TimingModel; 2],
    pub dark_rate_hz: [f64; 2],
    pub dead_time_s: [f64; 2],
    pub efficiency: [f64; 2],
    pub window_fraction: f64,
    pub eve_fraction: f64,
}

const CHANNELS: [Channel; 2] = [Channel::Zero, Channel::One];

impl PreparedLink {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let budget = compute_budget(&config.path, &StatePair::default(), config.source.linewidth_nm)?;
        let pair = budget.effective_state_pair;
        let mu = config.source.mu;
        let mut detect_mean = [[0.0; 2]; 2];
        for bit in [false, true] {
            for ch in CHANNELS {
                let det = config.detectors.get(ch);
                detect_mean[bit as usize][ch.index()] = mu
                    * budget.common_transmittance
                    * det.efficiency
                    * config.receiver.conclusive_probability(&pair.state(bit), ch);
            }
        }
        let extra_sigma = config
            .source
            .sigma_s(config.clock_hz)
            .hypot(budget.added_sigma_s);
        let mut incident_rate_hz = [0.0; 2];
        let mut timing = [TimingModel { sigma_s: 0.0, shift_s: 0.0 }; 2];
        let mut dark_rate_hz = [0.0; 2];
        let mut dead_time_s = [0.0; 2];
        let mut efficiency = [0.0; 2];
        for ch in CHANNELS {
            let c = ch.index();
            let det = config.detectors.get(ch);
            // a detector with zero efficiency is treated as switched off
            dark_rate_hz[c] = if det.efficiency > 0.0 { det.dark_rate_hz } else { 0.0 };
            incident_rate_hz[c] =
                config.clock_hz * 0.5 * (detect_mean[0][c] + detect_mean[1][c]) + dark_rate_hz[c];
            timing[c] = det.timing_at_rate(incident_rate_hz[c], extra_sigma)?;
            dead_time_s[c] = det.dead_time_s;
            efficiency[c] = det.efficiency;
        }
        Ok(Self {
            clock_hz: config.clock_hz,
            slot_s: config.slot_duration_s(),
            slot_count: config.slot_count()?,
            mu,
            eve_fraction: eve_information_bound(pair.relative_angle())?,
            budget,
            detect_mean,
            incident_rate_hz,
            timing,
            dark_rate_hz,
            dead_time_s,
            efficiency,
            window_fraction: config.receiver.window_fraction,
        })
    }

    /// Fraction of clicks surviving non-paralyzable dead time.
    pub fn dead_time_factor(&self, c: usize) -> f64 {
        1.0 / (1.0 + self.incident_rate_hz[c] * self.dead_time_s[c])
    }
}

pub(crate) fn net_rate(config: &ScenarioConfig, sifted_rate_hz: f64, qber: f64, eve_fraction: f64) -> f64 {
    let inputs = KeyRateInputs {
        sifted_rate_hz,
        qber: qber.clamp(0.0, 0.5),
        eve_fraction,
        reconciliation_efficiency: config.analysis.reconciliation_efficiency,
        pa_margin: config.analysis.pa_margin,
    };
    crate::postprocessing::net_bit_rate(&inputs)
}

/// Evaluates one link in the configured mode.
pub fn run_link(config: &ScenarioConfig) -> Result<LinkMetrics> {
    match config.mode {
        Mode::Analytic => run_analytic(config),
        Mode::MonteCarlo => Ok(simulate(config)?.metrics),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.slot_count().unwrap(), DEFAULT_SLOT_COUNT);
    }

    #[test]
    fn slot_count_from_duration() {
        let c = ScenarioConfig {
            duration_s: Some(1e-3),
            ..Default::default()
        };
        assert_eq!(c.slot_count().unwrap(), 1_000_000);
        let bad = ScenarioConfig {
            slot_count: Some(5),
            duration_s: Some(1e-3),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let zero = ScenarioConfig {
            slot_count: Some(0),
            ..Default::default()
        };
        assert!(run_link(&zero).is_err());
    }

    #[test]
    fn validation_reports_field_path() {
        let mut c = ScenarioConfig::default();
        c.source.mu = -1.0;
        match c.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "source.mu"),
            other => panic!("{other:?}"),
        }
        let mut c = ScenarioConfig::default();
        c.detectors.channel1.efficiency = 2.0;
        match c.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "detectors.channel1.efficiency"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prepared_link_rates() {
        let c = ScenarioConfig::default();
        let p = PreparedLink::new(&c).unwrap();
        // state1 feeds channel 1 through a quarter of the light
        let t = p.budget.common_transmittance;
        assert!((p.detect_mean[1][1] / (0.1 * t * 0.5) - 0.25).abs() < 1e-3);
        // state0 reaches channel 1 only through PBS leakage
        assert!(p.detect_mean[0][1] / p.detect_mean[1][1] < 0.01);
        assert!((p.eve_fraction - 0.292_893).abs() < 1e-6);
    }
}
