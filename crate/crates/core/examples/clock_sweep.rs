//! QBER and key rate against clock frequency for both detector variants,
//! plus distance sweeps with real fibre and with a lumped attenuator.
//!
//! Run: cargo run --release --example clock_sweep

use b92sim::detection::DetectorModel;
use b92sim::engine::{sweep, ScenarioConfig, SweepParameter};

fn main() -> b92sim::Result<()> {
    let clocks = [1.0e9, 1.2e9, 1.5e9, 1.7e9, 2.0e9];
    let mut base = ScenarioConfig::default();
    base.path.fiber_length_km = 6.55;
    println!("6.55 km");
    println!("clock_GHz  std_qber%  enh_qber%  std_nbr  enh_nbr");
    let std = sweep(SweepParameter::ClockHz, &clocks, &base.clone().with_detectors(DetectorModel::standard()))?;
    let enh = sweep(SweepParameter::ClockHz, &clocks, &base.clone().with_detectors(DetectorModel::enhanced()))?;
    for ((f, s), (_, e)) in std.iter().zip(&enh) {
        println!(
            "{:>9.1} {:>10.2} {:>10.2} {:>8.0} {:>8.0}",
            f / 1e9,
            100.0 * s.qber,
            100.0 * e.qber,
            s.nbr_hz,
            e.nbr_hz
        );
    }

    let base = ScenarioConfig {
        clock_hz: 2e9,
        ..Default::default()
    };
    let km = [1.0, 2.0, 4.2, 6.55, 8.0];
    let db: Vec<f64> = km.iter().map(|k| k * base.path.fiber_loss_db_per_km).collect();
    let fibre = sweep(SweepParameter::FiberLengthKm, &km, &base)?;
    let lumped = sweep(SweepParameter::AttenuationEquivalentDb, &db, &base)?;
    println!("\n2 GHz, enhanced detectors");
    println!("   km   fibre_qber%  attenuator_qber%");
    for ((k, f), (_, a)) in fibre.iter().zip(&lumped) {
        println!("{k:>5.2} {:>13.2} {:>17.2}", 100.0 * f.qber, 100.0 * a.qber);
    }
    Ok(())
}
