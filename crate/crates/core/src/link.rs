//! Loss and timing budget between Alice's attenuator and Bob's detectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarization::{apply_pdl, StatePair};

pub const DEFAULT_FIBER_LOSS_DB_PER_KM: f64 = 2.1;
pub const DEFAULT_RECEIVER_EXCESS_LOSS_DB: f64 = 3.0;
pub const DEFAULT_DISPERSION_PS_PER_NM_KM: f64 = 85.0;
/// Mean insertion loss of a 1×32 splitter port at 850 nm.
pub const SPLITTER_1X32_LOSS_DB: f64 = 18.7;
/// Largest per-port polarization-dependent loss of the 1×32 splitter.
pub const SPLITTER_1X32_MAX_PDL_DB: f64 = 1.1;

/// Everything between Alice's output and Bob's polarization analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkPath {
    pub fiber_length_km: f64,
    pub fiber_loss_db_per_km: f64,
    pub splitter_loss_db: f64,
    pub pdl_db: f64,
    /// Low-loss axis of the lumped diattenuator.
    pub pdl_axis_rad: f64,
    /// Bob's internal filters, demultiplexer and PBS chain.
    pub receiver_excess_loss_db: f64,
    pub dispersion_ps_per_nm_km: f64,
    /// Lumped attenuation that adds loss without dispersion (used to emulate
    /// distance with a variable attenuator).
    pub attenuator_db: f64,
}

impl Default for LinkPath {
    fn default() -> Self {
        Self {
            fiber_length_km: 4.2,
            fiber_loss_db_per_km: DEFAULT_FIBER_LOSS_DB_PER_KM,
            splitter_loss_db: 0.0,
            pdl_db: 0.0,
            pdl_axis_rad: 0.0,
            receiver_excess_loss_db: DEFAULT_RECEIVER_EXCESS_LOSS_DB,
            dispersion_ps_per_nm_km: DEFAULT_DISPERSION_PS_PER_NM_KM,
            attenuator_db: 0.0,
        }
    }
}

impl LinkPath {
    /// A path with no loss, no length and no dispersion.
    pub fn ideal() -> Self {
        Self {
            fiber_length_km: 0.0,
            fiber_loss_db_per_km: 0.0,
            splitter_loss_db: 0.0,
            pdl_db: 0.0,
            pdl_axis_rad: 0.0,
            receiver_excess_loss_db: 0.0,
            dispersion_ps_per_nm_km: 0.0,
            attenuator_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("fiber_length_km", self.fiber_length_km),
            ("fiber_loss_db_per_km", self.fiber_loss_db_per_km),
            ("splitter_loss_db", self.splitter_loss_db),
            ("pdl_db", self.pdl_db),
            ("receiver_excess_loss_db", self.receiver_excess_loss_db),
            ("attenuator_db", self.attenuator_db),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be >= 0")));
            }
        }
        if !self.pdl_axis_rad.is_finite() {
            return Err(Error::invalid("pdl_axis_rad", "must be finite"));
        }
        if !self.dispersion_ps_per_nm_km.is_finite() {
            return Err(Error::invalid("dispersion_ps_per_nm_km", "must be finite"));
        }
        Ok(())
    }

    /// Polarization-independent loss in dB.
    pub fn common_loss_db(&self) -> f64 {
        self.fiber_length_km * self.fiber_loss_db_per_km
            + self.splitter_loss_db
            + self.receiver_excess_loss_db
            + self.attenuator_db
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// Total power transmittance including the state-averaged PDL term.
    pub transmittance: f64,
    /// Transmittance excluding PDL. PDL acts through the amplitudes of
    /// `effective_state_pair` instead.
    pub common_transmittance: f64,
    /// Temporal standard deviation added by chromatic dispersion.
    pub added_sigma_s: f64,
    pub effective_state_pair: StatePair,
    pub total_loss_db: f64,
}

impl LinkBudget {
    /// Series composition: loss multiplies, timing variances add and the
    /// second budget's PDL acts on the first budget's output states.
    pub fn then(&self, next: &LinkBudget, next_pdl_db: f64, next_pdl_axis: f64) -> Result<LinkBudget> {
        let pair = StatePair {
            state0: apply_pdl(&self.effective_state_pair.state0, next_pdl_db, next_pdl_axis)?,
            state1: apply_pdl(&self.effective_state_pair.state1, next_pdl_db, next_pdl_axis)?,
        };
        let common = self.common_transmittance * next.common_transmittance;
        let transmittance = common * mean_intensity(&pair);
        Ok(LinkBudget {
            transmittance,
            common_transmittance: common,
            added_sigma_s: self.added_sigma_s.hypot(next.added_sigma_s),
            effective_state_pair: pair,
            total_loss_db: -10.0 * transmittance.log10(),
        })
    }
}

fn mean_intensity(pair: &StatePair) -> f64 {
    0.5 * (pair.state0.intensity() + pair.state1.intensity())
}

/// Computes transmittance, dispersion spread and PDL-distorted states for `path`.
pub fn compute_budget(path: &LinkPath, pair: &StatePair, linewidth_nm: f64) -> Result<LinkBudget> {
    path.validate()?;
    if !(linewidth_nm >= 0.0) {
        return Err(Error::invalid("linewidth_nm", "must be >= 0"));
    }
    let effective_state_pair = StatePair {
        state0: apply_pdl(&pair.state0, path.pdl_db, path.pdl_axis_rad)?,
        state1: apply_pdl(&pair.state1, path.pdl_db, path.pdl_axis_rad)?,
    };
    let common_transmittance = 10f64.powf(-path.common_loss_db() / 10.0);
    let pdl_factor = mean_intensity(&effective_state_pair) / mean_intensity(pair);
    let transmittance = common_transmittance * pdl_factor;
    let added_sigma_s =
        path.dispersion_ps_per_nm_km.abs() * linewidth_nm * path.fiber_length_km * 1e-12;
    Ok(LinkBudget {
        transmittance,
        common_transmittance,
        added_sigma_s,
        effective_state_pair,
        total_loss_db: -10.0 * transmittance.log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splitter_only() {
        let path = LinkPath {
            splitter_loss_db: SPLITTER_1X32_LOSS_DB,
            ..LinkPath::ideal()
        };
        let b = compute_budget(&path, &StatePair::default(), 0.15).unwrap();
        assert!((b.transmittance - 10f64.powf(-1.87)).abs() < 1e-15);
        assert!((b.transmittance - 0.0135).abs() < 1e-4);
    }

    #[test]
    fn identity_link() {
        let pair = StatePair::default();
        let b = compute_budget(&LinkPath::ideal(), &pair, 0.15).unwrap();
        assert_eq!(b.transmittance, 1.0);
        assert_eq!(b.added_sigma_s, 0.0);
        assert_eq!(b.effective_state_pair, pair);
    }

    #[test]
    fn fiber_4_2_km() {
        let path = LinkPath {
            fiber_length_km: 4.2,
            fiber_loss_db_per_km: 2.1,
            ..LinkPath::ideal()
        };
        let b = compute_budget(&path, &StatePair::default(), 0.15).unwrap();
        assert!((b.total_loss_db - 8.82).abs() < 1e-12);
        assert!((b.transmittance - 0.131_2).abs() < 1e-4);
    }

    #[test]
    fn dispersion_spread() {
        let path = LinkPath {
            fiber_length_km: 6.55,
            ..LinkPath::ideal()
        };
        let path = LinkPath {
            dispersion_ps_per_nm_km: -85.0,
            ..path
        };
        let b = compute_budget(&path, &StatePair::default(), 0.15).unwrap();
        assert!((b.added_sigma_s - 85.0 * 0.15 * 6.55e-12).abs() < 1e-20);
    }

    #[test]
    fn rejects_negative_losses() {
        let path = LinkPath {
            splitter_loss_db: -1.0,
            ..LinkPath::ideal()
        };
        assert!(compute_budget(&path, &StatePair::default(), 0.1).is_err());
        let path = LinkPath {
            fiber_length_km: -1.0,
            ..LinkPath::ideal()
        };
        assert!(compute_budget(&path, &StatePair::default(), 0.1).is_err());
    }

    #[test]
    fn pdl_lowers_transmittance_and_distorts_pair() {
        let path = LinkPath {
            pdl_db: 1.1,
            ..LinkPath::ideal()
        };
        let pair = StatePair::default();
        let b = compute_budget(&path, &pair, 0.0).unwrap();
        assert!(b.transmittance < 1.0);
        assert_eq!(b.common_transmittance, 1.0);
        assert!(b.effective_state_pair.relative_angle() < pair.relative_angle());
    }

    prop_compose! {
        fn arb_path()(len in 0.0f64..20.0, alpha in 0.0f64..4.0, split in 0.0f64..25.0,
                      pdl in 0.0f64..3.0, rx in 0.0f64..6.0, att in 0.0f64..10.0,
                      disp in -120.0f64..120.0) -> LinkPath {
            LinkPath {
                fiber_length_km: len,
                fiber_loss_db_per_km: alpha,
                splitter_loss_db: split,
                pdl_db: pdl,
                pdl_axis_rad: 0.0,
                receiver_excess_loss_db: rx,
                dispersion_ps_per_nm_km: disp,
                attenuator_db: att,
            }
        }
    }

    proptest! {
        #[test]
        fn transmittance_in_unit_interval(path in arb_path()) {
            let b = compute_budget(&path, &StatePair::default(), 0.15).unwrap();
            prop_assert!(b.transmittance > 0.0 && b.transmittance <= 1.0);
        }

        #[test]
        fn transmittance_monotone_in_each_loss(path in arb_path(), extra in 0.01f64..5.0, which in 0usize..6) {
            let pair = StatePair::default();
            let mut worse = path.clone();
            match which {
                0 => worse.fiber_length_km += extra,
                1 => worse.fiber_loss_db_per_km += extra,
                2 => worse.splitter_loss_db += extra,
                3 => worse.pdl_db += extra,
                4 => worse.receiver_excess_loss_db += extra,
                _ => worse.attenuator_db += extra,
            }
            let a = compute_budget(&path, &pair, 0.15).unwrap().transmittance;
            let b = compute_budget(&worse, &pair, 0.15).unwrap().transmittance;
            prop_assert!(b <= a);
        }

        #[test]
        fn concatenation_multiplies_loss_and_adds_variance(
            l1 in 0.0f64..10.0, l2 in 0.0f64..10.0, split in 0.0f64..20.0, rx in 0.0f64..5.0,
            pdl1 in 0.0f64..2.0, pdl2 in 0.0f64..2.0,
        ) {
            let pair = StatePair::default();
            let a = LinkPath { fiber_length_km: l1, splitter_loss_db: split, pdl_db: pdl1,
                               receiver_excess_loss_db: 0.0, ..LinkPath::default() };
            let b = LinkPath { fiber_length_km: l2, receiver_excess_loss_db: rx, pdl_db: pdl2,
                               ..LinkPath::default() };
            let ba = compute_budget(&a, &pair, 0.15).unwrap();
            let bb = compute_budget(&b, &pair, 0.15).unwrap();
            let chained = ba.then(&bb, b.pdl_db, b.pdl_axis_rad).unwrap();
            prop_assert!((chained.common_transmittance - ba.common_transmittance * bb.common_transmittance).abs() < 1e-15);
            let var = chained.added_sigma_s.powi(2);
            prop_assert!((var - (ba.added_sigma_s.powi(2) + bb.added_sigma_s.powi(2))).abs() < 1e-30);

            // polarization-independent loss is additive in dB across the split
            let whole = LinkPath { fiber_length_km: l1 + l2, splitter_loss_db: split,
                                   receiver_excess_loss_db: rx, pdl_db: 0.0, ..LinkPath::default() };
            let bw = compute_budget(&whole, &pair, 0.15).unwrap();
            let rel = (bw.common_transmittance - chained.common_transmittance).abs() / bw.common_transmittance;
            prop_assert!(rel < 1e-12);
        }

        #[test]
        fn zero_pdl_leaves_pair_untouched(path in arb_path()) {
            let path = LinkPath { pdl_db: 0.0, ..path };
            let pair = StatePair::default();
            let b = compute_budget(&path, &pair, 0.15).unwrap();
            prop_assert_eq!(b.effective_state_pair, pair);
            prop_assert!((b.transmittance - b.common_transmittance).abs() < 1e-18);
        }
    }
}
