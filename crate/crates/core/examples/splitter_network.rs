//! Four users behind a 1×32 passive splitter, with randomized splitter PDL.
//!
//! Run: cargo run --release --example splitter_network

use b92sim::detection::DetectorModel;
use b92sim::engine::{run_network, NetworkTopology, PortSpec, ScenarioConfig};
use b92sim::link::SPLITTER_1X32_LOSS_DB;

fn main() -> b92sim::Result<()> {
    let mut base = ScenarioConfig {
        seed: 2024,
        ..Default::default()
    }
    .with_detectors(DetectorModel::standard());
    base.path.fiber_length_km = 0.0;
    base.path.splitter_loss_db = SPLITTER_1X32_LOSS_DB;

    for randomize_pdl in [false, true] {
        let topology = NetworkTopology {
            ports: [(4, 0.0), (9, 2.0), (17, 3.8), (30, 6.4)]
                .iter()
                .map(|&(id, km)| PortSpec::new(id, km))
                .collect(),
            randomize_pdl,
            ..Default::default()
        };
        println!("randomize_pdl = {randomize_pdl}");
        println!("  port  km    pdl_dB  qber%   nbr_bit/s");
        for p in run_network(&base, &topology)? {
            println!(
                "  {:>4} {:>4.1} {:>8.3} {:>6.2} {:>11.0}",
                p.port_id,
                p.fiber_length_km,
                p.pdl_db,
                100.0 * p.metrics.qber,
                p.metrics.nbr_hz
            );
        }
    }
    Ok(())
}
