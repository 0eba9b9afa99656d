//! Weak coherent pulse source: bit pattern, photon number and pulse width.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarization::{PolarizationState, StatePair};

/// FWHM of a Gaussian divided by its standard deviation, `2·sqrt(2·ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Gaussian temporal width of the emitted pulse.
    pub pulse_fwhm_s: f64,
    pub wavelength_nm: f64,
    pub linewidth_nm: f64,
    /// Extra FWHM per GHz of clock, a crude stand-in for drive-electronics
    /// patterning. Zero by default.
    pub fwhm_growth_s_per_ghz: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mu: 0.1,
            pulse_fwhm_s: 100e-12,
            wavelength_nm: 850.0,
            linewidth_nm: 0.15,
            fwhm_growth_s_per_ghz: 0.0,
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid("mu", format!("{} must be > 0", self.mu)));
        }
        if !(self.pulse_fwhm_s >= 0.0) {
            return Err(Error::invalid("pulse_fwhm_s", "must be >= 0"));
        }
        if !(self.linewidth_nm >= 0.0) {
            return Err(Error::invalid("linewidth_nm", "must be >= 0"));
        }
        if !(self.wavelength_nm > 0.0) {
            return Err(Error::invalid("wavelength_nm", "must be > 0"));
        }
        if !(self.fwhm_growth_s_per_ghz >= 0.0) {
            return Err(Error::invalid("fwhm_growth_s_per_ghz", "must be >= 0"));
        }
        Ok(())
    }

    /// Temporal standard deviation of the emitted pulse at `clock_hz`.
    pub fn sigma_s(&self, clock_hz: f64) -> f64 {
        (self.pulse_fwhm_s + self.fwhm_growth_s_per_ghz * clock_hz * 1e-9) / FWHM_PER_SIGMA
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmittedPulse {
    pub slot: u64,
    pub bit: bool,
    pub photon_count: u32,
    pub state: PolarizationState,
}

/// Draws a Poisson(`mu`) photon number.
pub fn sample_photon_number<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<u32> {
    Ok(PhotonSampler::new(mu)?.sample(rng))
}

/// Reusable Poisson sampler for a fixed mean.
#[derive(Debug, Clone, Copy)]
pub struct PhotonSampler(Poisson<f64>);

impl PhotonSampler {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("mu", format!("{mu} must be > 0")));
        }
        Poisson::new(mu)
            .map(Self)
            .map_err(|e| Error::invalid("mu", e.to_string()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.0.sample(rng) as u32
    }
}

/// Probability that a pulse carries two or more photons.
pub fn multi_photon_probability(mu: f64) -> f64 {
    // 1 - e^-mu (1 + mu), written to stay accurate for small mu
    -(-mu).exp_m1() - mu * (-mu).exp()
}

/// I.i.d. uniform bits.
pub fn generate_bitstream<R: Rng + ?Sized>(length: usize, rng: &mut R) -> Vec<bool> {
    let mut bits = Vec::with_capacity(length);
    while bits.len() < length {
        let word: u64 = rng.random();
        let take = (length - bits.len()).min(64);
        bits.extend((0..take).map(|i| (word >> i) & 1 == 1));
    }
    bits
}

/// Emits one pulse per slot, pairing each bit with its encoding state.
pub fn emit<'a, R: Rng + ?Sized>(
    bits: &'a [bool],
    pair: &'a StatePair,
    sampler: &'a PhotonSampler,
    rng: &'a mut R,
) -> impl Iterator<Item = EmittedPulse> + 'a {
    bits.iter().enumerate().map(move |(slot, &bit)| EmittedPulse {
        slot: slot as u64,
        bit,
        photon_count: sampler.sample(rng),
        state: pair.state(bit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn multi_photon_probability_at_default_mu() {
        let direct = 1.0 - (-0.1f64).exp() * 1.1;
        let p = multi_photon_probability(0.1);
        assert!((p - direct).abs() < 1e-15);
        assert!((p - 0.004_679).abs() < 1e-6);
        assert!(p < 0.005);
    }

    #[test]
    fn vacuum_limit() {
        let mut rng = seeded(1);
        let zeros = (0..10_000)
            .filter(|_| sample_photon_number(1e-9, &mut rng).unwrap() == 0)
            .count();
        assert_eq!(zeros, 10_000);
    }

    #[test]
    fn rejects_non_positive_mu() {
        let mut rng = seeded(1);
        assert!(sample_photon_number(0.0, &mut rng).is_err());
        assert!(sample_photon_number(-1.0, &mut rng).is_err());
    }

    #[test]
    fn empirical_mean_and_pmf() {
        let mu = 0.1;
        let n = 1_000_000;
        let sampler = PhotonSampler::new(mu).unwrap();
        let mut rng = seeded(2024);
        let mut hist = [0u64; 3];
        let mut sum = 0u64;
        for _ in 0..n {
            let k = sampler.sample(&mut rng);
            sum += k as u64;
            hist[(k as usize).min(2)] += 1;
        }
        let mean = sum as f64 / n as f64;
        let sigma_mean = (mu / n as f64).sqrt();
        assert!((mean - mu).abs() < 3.0 * sigma_mean, "mean {mean}");

        let pmf = [(-mu).exp(), mu * (-mu).exp(), multi_photon_probability(mu)];
        for (k, p) in pmf.iter().enumerate() {
            let obs = hist[k] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((obs - p).abs() < 3.0 * sigma, "k={k} obs {obs} p {p}");
        }
    }

    #[test]
    fn bitstream_contracts() {
        let mut rng = seeded(5);
        assert!(generate_bitstream(0, &mut rng).is_empty());
        let a = generate_bitstream(64, &mut seeded(9));
        let b = generate_bitstream(64, &mut seeded(9));
        assert_eq!(a, b);
        let long = generate_bitstream(1_000_000, &mut seeded(11));
        let ones = long.iter().filter(|&&b| b).count() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&ones), "{ones}");
        assert_eq!(generate_bitstream(100, &mut rng).len(), 100);
    }

    #[test]
    fn emitted_state_matches_bit() {
        let pair = StatePair::default();
        let bits = generate_bitstream(256, &mut seeded(3));
        let sampler = PhotonSampler::new(0.5).unwrap();
        let mut rng = seeded(4);
        for pulse in emit(&bits, &pair, &sampler, &mut rng) {
            assert_eq!(pulse.state, pair.state(pulse.bit));
            assert_eq!(pulse.bit, bits[pulse.slot as usize]);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SourceConfig::default();
        assert!(c.validate().is_ok());
        c.mu = -1.0;
        assert!(c.validate().is_err());
    }
}
