//! Loss, dispersion spread and state distortion for a few link layouts.
//!
//! Run: cargo run --example link_budget

use b92sim::link::{compute_budget, LinkPath, SPLITTER_1X32_LOSS_DB, SPLITTER_1X32_MAX_PDL_DB};
use b92sim::polarization::StatePair;

fn main() -> b92sim::Result<()> {
    let pair = StatePair::default();
    let layouts = [
        ("back to back", LinkPath { fiber_length_km: 0.0, ..LinkPath::default() }),
        ("4.2 km fibre", LinkPath::default()),
        ("6.55 km fibre", LinkPath { fiber_length_km: 6.55, ..LinkPath::default() }),
        (
            "splitter + 2 km, worst PDL",
            LinkPath {
                fiber_length_km: 2.0,
                splitter_loss_db: SPLITTER_1X32_LOSS_DB,
                pdl_db: SPLITTER_1X32_MAX_PDL_DB,
                ..LinkPath::default()
            },
        ),
    ];
    println!("{:<28} {:>9} {:>13} {:>10} {:>10}", "layout", "loss_dB", "transmit", "sigma_ps", "angle_deg");
    for (name, path) in layouts {
        let b = compute_budget(&path, &pair, 0.15)?;
        println!(
            "{name:<28} {:>9.2} {:>13.3e} {:>10.1} {:>10.2}",
            b.total_loss_db,
            b.transmittance,
            b.added_sigma_s * 1e12,
            b.effective_state_pair.relative_angle().to_degrees()
        );
    }
    Ok(())
}
