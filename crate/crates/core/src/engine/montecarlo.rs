//! Slot-by-slot simulation of a link and the key distillation pipeline.

use std::collections::HashMap;

use rand::Rng;

use super::{net_rate, CountBreakdown, LinkMetrics, PhotonDiagnostics, PreparedLink, ScenarioConfig, CHANNELS};
use crate::detection::{apply_dead_time, dark_clicks_on, photon_click, DetectionRecord};
use crate::error::{Error, Result};
use crate::postprocessing::{final_key_length, privacy_amplify, reconcile};
use crate::protocol::{measure_pulse, measure_qber, sift, Outcome, SiftedKey};
use crate::rng::{seeded, SimRng};
use crate::source::{generate_bitstream, PhotonSampler};

#[derive(Debug, Clone)]
pub struct Simulation {
    pub metrics: LinkMetrics,
    pub alice_bits: Vec<bool>,
    /// Accepted in-window clicks of both detectors, time-ordered.
    pub records: Vec<DetectionRecord>,
    pub alice_key: SiftedKey,
    pub bob_key: SiftedKey,
    rng: SimRng,
}

/// Runs every slot of `config` through source, channel, analyzers and
/// detectors, then sifts and estimates the QBER.
pub fn simulate(config: &ScenarioConfig) -> Result<Simulation> {
    let link = PreparedLink::new(config)?;
    let mut rng = seeded(config.seed);
    let n = usize::try_from(link.slot_count).map_err(|_| Error::invalid("slot_count", "too large"))?;
    let alice_bits = generate_bitstream(n, &mut rng);
    let sampler = PhotonSampler::new(link.mu)?;
    let pair = link.budget.effective_state_pair;
    let states = [pair.state0, pair.state1];
    let common = link.budget.common_transmittance;

    let mut photons = PhotonDiagnostics::default();
    let mut clicks: [Vec<DetectionRecord>; 2] = [Vec::new(), Vec::new()];
    for (slot, &bit) in alice_bits.iter().enumerate() {
        let count = sampler.sample(&mut rng);
        for _ in 0..count {
            if rng.random::<f64>() >= common {
                continue;
            }
            let channel = match measure_pulse(&states[bit as usize], &config.receiver, &mut rng) {
                Outcome::Conclusive(ch) => ch,
                Outcome::Ambiguous => {
                    photons.arrived += 1.0;
                    photons.ambiguous += 1.0;
                    continue;
                }
                // lost to PDL
                Outcome::NoClick => continue,
            };
            photons.arrived += 1.0;
            photons.conclusive += 1.0;
            let c = channel.index();
            if rng.random::<f64>() >= link.efficiency[c] {
                continue;
            }
            let offset = link.timing[c].sample_offset(&mut rng);
            clicks[c].push(photon_click(slot as i64, offset, channel, link.slot_s));
        }
    }

    let duration = n as f64 * link.slot_s;
    let half_window = 0.5 * link.window_fraction * link.slot_s;
    let mut raw_clicks = 0usize;
    let mut records = Vec::new();
    for ch in CHANNELS {
        let c = ch.index();
        let mut all = std::mem::take(&mut clicks[c]);
        all.extend(dark_clicks_on(ch, link.dark_rate_hz[c], duration, link.slot_s, &mut rng)?);
        all.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
        let accepted = apply_dead_time(&all, link.dead_time_s[c])?;
        raw_clicks += accepted.len();
        records.extend(
            accepted
                .into_iter()
                .filter(|r| r.offset_s >= -half_window && r.offset_s < half_window),
        );
    }
    records.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));

    let mut conclusive_slots: Vec<i64> = records
        .iter()
        .filter(|r| r.slot >= 0 && (r.slot as usize) < n)
        .map(|r| r.slot)
        .collect();
    conclusive_slots.sort_unstable();
    conclusive_slots.dedup();
    let conclusive_count = conclusive_slots.len();

    let (alice_key, bob_key) = sift(&alice_bits, &records);
    let mut first: HashMap<i64, &DetectionRecord> = HashMap::new();
    for r in &records {
        first.entry(r.slot).or_insert(r);
    }
    let mut counts = CountBreakdown::default();
    for slot in &alice_key.source_slots {
        let r = first[&(*slot as i64)];
        if r.is_dark() {
            counts.dark += 1.0;
        } else if r.is_misallocated() {
            counts.misallocated += 1.0;
        } else {
            counts.signal += 1.0;
        }
    }

    let sifted_bits = alice_key.len();
    let insufficient_data = sifted_bits == 0;
    let qber = if insufficient_data {
        0.0
    } else {
        measure_qber(&alice_key, &bob_key, config.analysis.sample_fraction, &mut rng)?.0
    };
    let sifted_rate_hz = sifted_bits as f64 / duration;
    let metrics = LinkMetrics {
        raw_click_rate_hz: raw_clicks as f64 / duration,
        conclusive_rate_hz: conclusive_count as f64 / duration,
        sifted_rate_hz,
        qber,
        nbr_hz: net_rate(config, sifted_rate_hz, qber, link.eve_fraction),
        counts,
        insufficient_data,
        slot_count: link.slot_count,
        sifted_bits: sifted_bits as f64,
        eve_fraction: link.eve_fraction,
        photons,
    };
    Ok(Simulation {
        metrics,
        alice_bits,
        records,
        alice_key,
        bob_key,
        rng,
    })
}

/// Outcome of the full sift, estimate, reconcile and amplify pipeline.
#[derive(Debug, Clone)]
pub struct DistilledKey {
    pub alice_key: Vec<bool>,
    pub bob_key: Vec<bool>,
    pub sifted_bits: usize,
    /// Bits disclosed for QBER estimation.
    pub sampled_bits: usize,
    /// Bits entering reconciliation.
    pub reconciled_bits: usize,
    pub qber_estimate: f64,
    pub bits_leaked: usize,
    pub compression_bits: usize,
    pub final_bits: usize,
    pub metrics: LinkMetrics,
}

/// Smallest error rate used to size Cascade blocks when the sample shows none.
const MIN_QBER_HINT: f64 = 0.005;

pub fn distill_key(config: &ScenarioConfig) -> Result<DistilledKey> {
    let mut sim = simulate(config)?;
    let rng = &mut sim.rng;
    let (qber_estimate, alice, bob) = measure_qber(
        &sim.alice_key,
        &sim.bob_key,
        config.analysis.distill_sample_fraction,
        rng,
    )?;
    let hint = qber_estimate.clamp(MIN_QBER_HINT, 0.45);
    let rec = reconcile(&alice.bits, &bob.bits, hint, rng)?;
    if !rec.converged {
        return Err(Error::Accounting("reconciliation did not converge".into()));
    }
    let n = alice.len();
    let eve = sim.metrics.eve_fraction;
    let final_bits = final_key_length(n, rec.bits_leaked, eve, config.analysis.pa_margin);
    let compression_bits = ((eve + config.analysis.pa_margin) * n as f64).ceil() as usize;
    let balanced = if final_bits > 0 {
        final_bits + rec.bits_leaked + compression_bits == n
    } else {
        rec.bits_leaked + compression_bits >= n
    };
    if !balanced {
        return Err(Error::Accounting(format!(
            "final {final_bits} + leaked {} + compression {compression_bits} does not account for {n} bits",
            rec.bits_leaked
        )));
    }
    let (alice_key, bob_key) = if final_bits == 0 {
        (Vec::new(), Vec::new())
    } else {
        let seed = generate_bitstream(n + final_bits - 1, rng);
        (
            privacy_amplify(&alice.bits, final_bits, &seed)?,
            privacy_amplify(&rec.corrected_key, final_bits, &seed)?,
        )
    };
    if alice_key != bob_key {
        return Err(Error::Accounting("distilled keys differ".into()));
    }
    Ok(DistilledKey {
        alice_key,
        bob_key,
        sifted_bits: sim.alice_key.len(),
        sampled_bits: sim.alice_key.len() - n,
        reconciled_bits: n,
        qber_estimate,
        bits_leaked: rec.bits_leaked,
        compression_bits,
        final_bits,
        metrics: sim.metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_analytic, Mode};
    use crate::link::LinkPath;
    use crate::protocol::ReceiverSetup;

    fn small(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            slot_count: Some(2_000_000),
            seed,
            mode: Mode::MonteCarlo,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_is_reproducible() {
        let a = simulate(&small(5)).unwrap();
        let b = simulate(&small(5)).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.alice_key, b.alice_key);
        let c = simulate(&small(6)).unwrap();
        assert_ne!(a.alice_key, c.alice_key);
    }

    #[test]
    fn rate_chain_is_ordered() {
        let m = simulate(&small(1)).unwrap().metrics;
        assert!(m.raw_click_rate_hz >= m.conclusive_rate_hz);
        assert!(m.conclusive_rate_hz >= m.sifted_rate_hz);
        assert!(m.sifted_rate_hz > m.nbr_hz);
        let total = m.counts.signal + m.counts.dark + m.counts.misallocated;
        assert_eq!(total, m.sifted_bits);
    }

    #[test]
    fn agrees_with_analytic_sifted_rate() {
        let mc = simulate(&small(2)).unwrap().metrics;
        let an = run_analytic(&small(2)).unwrap();
        let sigma = an.sifted_bits.sqrt();
        assert!((mc.sifted_bits - an.sifted_bits).abs() < 4.0 * sigma, "{} vs {}", mc.sifted_bits, an.sifted_bits);
    }

    #[test]
    fn ideal_link_quarter_conclusive() {
        let mut c = small(3);
        c.path = LinkPath::ideal();
        c.receiver = ReceiverSetup::ideal();
        c.slot_count = Some(200_000);
        let m = simulate(&c).unwrap().metrics;
        let frac = m.photons.conclusive / m.photons.arrived;
        assert!((frac - 0.25).abs() < 0.01, "{frac}");
    }

    #[test]
    fn distilled_keys_match_and_account() {
        let mut c = small(4);
        c.slot_count = Some(5_000_000);
        let d = distill_key(&c).unwrap();
        assert_eq!(d.alice_key, d.bob_key);
        assert!(d.final_bits > 0);
        assert_eq!(d.final_bits + d.bits_leaked + d.compression_bits, d.reconciled_bits);
        assert_eq!(d.sampled_bits + d.reconciled_bits, d.sifted_bits);
    }
}
