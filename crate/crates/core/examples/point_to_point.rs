//! The 4.2 km, 1 GHz link evaluated in closed form and by simulation.
//!
//! Run: cargo run --release --example point_to_point

use b92sim::engine::{run_link, LinkMetrics, Mode, ScenarioConfig};

fn show(label: &str, m: &LinkMetrics) {
    println!(
        "{label:<12} raw {:>9.0}  conclusive {:>9.0}  sifted {:>9.0}  qber {:>6.3}%  nbr {:>9.0} bit/s",
        m.raw_click_rate_hz,
        m.conclusive_rate_hz,
        m.sifted_rate_hz,
        100.0 * m.qber,
        m.nbr_hz
    );
}

fn main() -> b92sim::Result<()> {
    let analytic = ScenarioConfig {
        slot_count: Some(10_000_000),
        ..Default::default()
    };
    let simulated = ScenarioConfig {
        mode: Mode::MonteCarlo,
        seed: 1,
        ..analytic.clone()
    };
    let a = run_link(&analytic)?;
    let s = run_link(&simulated)?;
    show("analytic", &a);
    show("monte carlo", &s);
    let sigma = (s.qber * (1.0 - s.qber) / s.sifted_bits).sqrt();
    println!("qber difference {:.2} sigma", (s.qber - a.qber) / sigma);
    Ok(())
}
