//! Weak coherent pulses: Poisson photon numbers and the multi-photon tail.
//!
//! Run: cargo run --release --example photon_statistics

use b92sim::rng::seeded;
use b92sim::source::{multi_photon_probability, PhotonSampler};

fn main() -> b92sim::Result<()> {
    let pulses = 1_000_000;
    let mut rng = seeded(1);
    println!("   mu   P(n>=2) analytic   sampled");
    for mu in [0.05, 0.1, 0.2, 0.5] {
        let sampler = PhotonSampler::new(mu)?;
        let multi = (0..pulses).filter(|_| sampler.sample(&mut rng) >= 2).count();
        println!(
            "{mu:>5.2}   {:>16.6}   {:>7.6}",
            multi_photon_probability(mu),
            multi as f64 / pulses as f64
        );
    }
    Ok(())
}
