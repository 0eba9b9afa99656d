//! Classical key distillation: error reconciliation, privacy amplification
//! and the net key rate they leave behind.

mod cascade;
mod keyfile;
mod toeplitz;

pub use cascade::{reconcile, reconcile_with, CascadeParams, ReconciliationResult};
pub use keyfile::{read_key, sidecar_path, write_key};
pub use toeplitz::{privacy_amplify, toeplitz_matrix_row};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary Shannon entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("{p} not in [0, 1]")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

pub const DEFAULT_RECONCILIATION_EFFICIENCY: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateInputs {
    pub sifted_rate_hz: f64,
    pub qber: f64,
    /// Fraction of the sifted key an eavesdropper may hold.
    pub eve_fraction: f64,
    /// Reconciliation cost relative to the Shannon limit, `f >= 1`.
    pub reconciliation_efficiency: f64,
    /// Extra privacy-amplification compression, as a fraction of the key.
    pub pa_margin: f64,
}

impl KeyRateInputs {
    pub fn new(sifted_rate_hz: f64, qber: f64, eve_fraction: f64, reconciliation_efficiency: f64) -> Result<Self> {
        let inputs = Self {
            sifted_rate_hz,
            qber,
            eve_fraction,
            reconciliation_efficiency,
            pa_margin: 0.0,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sifted_rate_hz >= 0.0) {
            return Err(Error::invalid("sifted_rate_hz", "must be >= 0"));
        }
        if !(0.0..=0.5).contains(&self.qber) {
            return Err(Error::invalid("qber", format!("{} not in [0, 0.5]", self.qber)));
        }
        if !(0.0..=1.0).contains(&self.eve_fraction) {
            return Err(Error::invalid("eve_fraction", "must be in [0, 1]"));
        }
        if !(self.reconciliation_efficiency >= 1.0) {
            return Err(Error::invalid("reconciliation_efficiency", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.pa_margin) {
            return Err(Error::invalid("pa_margin", "must be in [0, 1]"));
        }
        Ok(())
    }

    /// Fraction of the sifted key that survives distillation.
    pub fn secret_fraction(&self) -> f64 {
        // qber above 0.5 carries as much information as below it
        let q = self.qber.clamp(0.0, 1.0);
        let q = q.min(1.0 - q);
        let h = binary_entropy(q).unwrap_or(1.0);
        (1.0 - self.reconciliation_efficiency * h - self.eve_fraction - self.pa_margin).max(0.0)
    }
}

/// Net secret key rate after reconciliation and privacy amplification.
pub fn net_bit_rate(inputs: &KeyRateInputs) -> f64 {
    inputs.sifted_rate_hz * inputs.secret_fraction()
}

/// Length of the distilled key from `sifted_len` reconciled bits. The
/// reconciliation leakage is removed on top of the eavesdropper fraction.
pub fn final_key_length(sifted_len: usize, bits_leaked: usize, eve_fraction: f64, pa_margin: f64) -> usize {
    let compression = ((eve_fraction + pa_margin) * sifted_len as f64).ceil() as usize;
    sifted_len.saturating_sub(bits_leaked).saturating_sub(compression)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.07).unwrap() - 0.3659).abs() < 5e-5);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn entropy_matches_integrated_derivative() {
        // H(p) = integral_0^p log2((1-x)/x) dx, with the log singularity at 0
        // handled by substituting x = t^2.
        let p: f64 = 0.07;
        let n = 200_000;
        let upper = p.sqrt();
        let h = upper / n as f64;
        let f = |t: f64| if t == 0.0 { 0.0 } else { 2.0 * t * ((1.0 - t * t) / (t * t)).log2() };
        let mut acc = f(0.0) + f(upper);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let integral = acc * h / 3.0;
        assert!((integral - binary_entropy(p).unwrap()).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn rate_examples() {
        let r = net_bit_rate(&KeyRateInputs::new(1e5, 0.0, 0.0, 1.0).unwrap());
        assert_eq!(r, 1e5);

        let inputs = KeyRateInputs::new(1e5, 0.18, 0.293, 1.2).unwrap();
        let bracket = 1.0 - 1.2 * binary_entropy(0.18).unwrap() - 0.293;
        assert!(bracket < 0.0);
        assert!((binary_entropy(0.18).unwrap() - 0.6801).abs() < 1e-4);
        assert_eq!(net_bit_rate(&inputs), 0.0);

        assert_eq!(net_bit_rate(&KeyRateInputs::new(1e9, 0.5, 0.0, 1.0).unwrap()), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(KeyRateInputs::new(1.0, 0.6, 0.0, 1.2).is_err());
        assert!(KeyRateInputs::new(1.0, 0.1, 1.5, 1.2).is_err());
        assert!(KeyRateInputs::new(1.0, 0.1, 0.2, 0.9).is_err());
    }

    #[test]
    fn final_length_accounting() {
        assert_eq!(final_key_length(1000, 300, 0.293, 0.0), 1000 - 300 - 293);
        assert_eq!(final_key_length(100, 90, 0.293, 0.0), 0);
    }

    proptest! {
        #[test]
        fn rate_monotone(q1 in 0.0f64..0.5, q2 in 0.0f64..0.5, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0,
                         rate in 0.0f64..1e7, f in 1.0f64..1.5) {
            let r = |q: f64, e: f64| net_bit_rate(&KeyRateInputs::new(rate, q, e, f).unwrap());
            let (qa, qb) = if q1 < q2 { (q1, q2) } else { (q2, q1) };
            let (ea, eb) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(r(qb, e1) <= r(qa, e1) + 1e-9);
            prop_assert!(r(q1, eb) <= r(q1, ea) + 1e-9);
            let double = net_bit_rate(&KeyRateInputs::new(2.0 * rate, q1, e1, f).unwrap());
            prop_assert!((double - 2.0 * r(q1, e1)).abs() <= 1e-9 * double.max(1.0));
        }
    }
}
