//! Closed-form expected link metrics.
//!
//! Per detector, clicks in a registered slot are Poisson with mean
//! `own + neighbours + dark`: the own-slot pulse contributes its detected
//! photon mean times the in-window fraction of the timing response, every
//! other pulse contributes the fraction that spills into this slot, and dark
//! counts contribute their rate times the window length. Neighbouring bits
//! are averaged exactly (they are independent and uniform). Dead time scales
//! click probabilities by the non-paralyzable throughput `1 / (1 + R·τ)`.

use super::{net_rate, CountBreakdown, LinkMetrics, PhotonDiagnostics, PreparedLink, ScenarioConfig};
use crate::error::Result;

/// Truncation of the neighbour-slot sum.
const MAX_NEIGHBOURS: i64 = 2000;

struct ChannelTerms {
    /// Own-slot in-window fraction.
    own_fraction: f64,
    /// `E[exp(-neighbour photons)]` averaged over neighbouring bits.
    neighbour_survival: f64,
    /// Mean neighbour photons, averaged over neighbouring bits.
    neighbour_mean: f64,
    dark_mean: f64,
    /// Full-window slot fractions summed, for raw click accounting.
    dead_time_factor: f64,
}

fn channel_terms(link: &PreparedLink, c: usize) -> ChannelTerms {
    let timing = link.timing[c];
    let lam = [link.detect_mean[0][c], link.detect_mean[1][c]];
    let reach = ((timing.shift_s.abs() + 12.0 * timing.sigma_s) / link.slot_s).ceil() as i64 + 1;
    let reach = reach.min(MAX_NEIGHBOURS);
    let mut log_survival = 0.0;
    let mut neighbour_mean = 0.0;
    for k in (-reach..=reach).filter(|&k| k != 0) {
        let q = timing.slot_fraction(k, link.slot_s, link.window_fraction);
        if q == 0.0 {
            continue;
        }
        log_survival += (0.5 * ((-lam[0] * q).exp() + (-lam[1] * q).exp())).ln();
        neighbour_mean += 0.5 * (lam[0] + lam[1]) * q;
    }
    ChannelTerms {
        own_fraction: timing.slot_fraction(0, link.slot_s, link.window_fraction),
        neighbour_survival: log_survival.exp(),
        neighbour_mean,
        dark_mean: link.dark_rate_hz[c] * link.slot_s * link.window_fraction,
        dead_time_factor: link.dead_time_factor(c),
    }
}

pub fn run_analytic(config: &ScenarioConfig) -> Result<LinkMetrics> {
    let link = PreparedLink::new(config)?;
    let terms = [channel_terms(&link, 0), channel_terms(&link, 1)];

    // click[bit][channel]: probability that `channel` registers an accepted
    // in-window click in a slot where Alice sent `bit`
    let mut click = [[0.0; 2]; 2];
    for bit in 0..2 {
        for c in 0..2 {
            let t = &terms[c];
            let own = link.detect_mean[bit][c] * t.own_fraction;
            let none = (-own - t.dark_mean).exp() * t.neighbour_survival;
            click[bit][c] = t.dead_time_factor * (1.0 - none);
        }
    }

    let mut sifted = 0.0;
    let mut errors = 0.0;
    let mut conclusive = 0.0;
    let mut counts = CountBreakdown::default();
    for bit in 0..2 {
        let [p0, p1] = click[bit];
        conclusive += 0.5 * (1.0 - (1.0 - p0) * (1.0 - p1));
        for c in 0..2 {
            let only = click[bit][c] * (1.0 - click[bit][1 - c]);
            sifted += 0.5 * only;
            if c != bit {
                errors += 0.5 * only;
            }
            // attribute sifted clicks to their origin by Poisson mean share
            let t = &terms[c];
            let own = link.detect_mean[bit][c] * t.own_fraction;
            let total = own + t.neighbour_mean + t.dark_mean;
            if total > 0.0 {
                let n = 0.5 * only * link.slot_count as f64;
                counts.signal += n * own / total;
                counts.misallocated += n * t.neighbour_mean / total;
                counts.dark += n * t.dark_mean / total;
            }
        }
    }

    let raw_click_rate_hz: f64 = (0..2)
        .map(|c| link.incident_rate_hz[c] * terms[c].dead_time_factor)
        .sum();
    let sifted_rate_hz = sifted * link.clock_hz;
    let insufficient_data = !(sifted > 0.0);
    let qber = if insufficient_data { 0.0 } else { errors / sifted };

    let n = link.slot_count as f64;
    let t = link.budget.common_transmittance;
    let pair = &link.budget.effective_state_pair;
    let arrived = n * link.mu * t * 0.5 * (pair.state0.intensity() + pair.state1.intensity());
    let conclusive_photons = n * link.mu * t * 0.5 * {
        let setup = &config.receiver;
        use crate::detection::Channel;
        [Channel::Zero, Channel::One]
            .iter()
            .map(|&ch| setup.conclusive_probability(&pair.state0, ch) + setup.conclusive_probability(&pair.state1, ch))
            .sum::<f64>()
    };

    Ok(LinkMetrics {
        raw_click_rate_hz,
        conclusive_rate_hz: conclusive * link.clock_hz,
        sifted_rate_hz,
        qber,
        nbr_hz: net_rate(config, sifted_rate_hz, qber, link.eve_fraction),
        counts,
        insufficient_data,
        slot_count: link.slot_count,
        sifted_bits: sifted * n,
        eve_fraction: link.eve_fraction,
        photons: PhotonDiagnostics {
            arrived,
            conclusive: conclusive_photons,
            ambiguous: arrived - conclusive_photons,
        },
    })
}
