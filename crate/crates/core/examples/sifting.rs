//! A short Monte-Carlo run, looking at individual clicks and the sifted key.
//!
//! Run: cargo run --release --example sifting

use b92sim::engine::{simulate, Mode, ScenarioConfig};

fn main() -> b92sim::Result<()> {
    let config = ScenarioConfig {
        mode: Mode::MonteCarlo,
        clock_hz: 2e9,
        slot_count: Some(2_000_000),
        seed: 7,
        ..Default::default()
    };
    let sim = simulate(&config)?;
    println!("first clicks:");
    for r in sim.records.iter().take(8) {
        let origin = if r.is_dark() {
            "dark".to_string()
        } else {
            format!("pulse {}", r.true_slot)
        };
        println!("  slot {:>8} {:?} offset {:>7.1} ps  ({origin})", r.slot, r.channel, r.offset_s * 1e12);
    }
    let m = &sim.metrics;
    println!(
        "\n{} sifted bits, qber {:.3}%; signal {} misallocated {} dark {}",
        m.sifted_bits,
        100.0 * m.qber,
        m.counts.signal,
        m.counts.misallocated,
        m.counts.dark
    );
    let show = |bits: &[bool]| bits.iter().take(48).map(|&b| if b { '1' } else { '0' }).collect::<String>();
    println!("alice {}", show(&sim.alice_key.bits));
    println!("bob   {}", show(&sim.bob_key.bits));
    Ok(())
}
