//! Rate-dependent jitter and peak shift, and the share of clicks landing in
//! the wrong clock slot.
//!
//! Run: cargo run --example detector_timing

use b92sim::detection::{jitter_at_rate, DetectorModel};

fn main() -> b92sim::Result<()> {
    let models = [("standard", DetectorModel::standard()), ("enhanced", DetectorModel::enhanced())];
    println!("{:<9} {:>10} {:>10} {:>9} {:>14} {:>14}", "detector", "rate_hz", "jitter_ps", "shift_ps", "misalloc@1GHz", "misalloc@2GHz");
    for (name, model) in &models {
        for rate in [1e4, 2e5, 1e6, 2e6] {
            let timing = model.timing_at_rate(rate, 0.0)?;
            println!(
                "{name:<9} {rate:>10.0e} {:>10.1} {:>9.1} {:>14.4} {:>14.4}",
                jitter_at_rate(model, rate)? * 1e12,
                timing.shift_s * 1e12,
                timing.misallocation_probability(1e-9),
                timing.misallocation_probability(0.5e-9),
            );
        }
    }
    Ok(())
}
