//! How polarization-dependent loss pulls the two B92 states apart and what
//! that costs in eavesdropper information.
//!
//! Run: cargo run --example polarization_pdl

use b92sim::polarization::{apply_pdl, eve_information_bound, projection_probability, StatePair};

fn main() -> b92sim::Result<()> {
    let pair = StatePair::default();
    println!("state0 {:.1} deg, state1 {:.1} deg", pair.state0.angle().to_degrees(), pair.state1.angle().to_degrees());
    for analyzer in [90.0f64, 135.0] {
        println!(
            "analyzer {analyzer:>5.1} deg: P(state0) {:.3}  P(state1) {:.3}",
            projection_probability(&pair.state0, analyzer.to_radians()),
            projection_probability(&pair.state1, analyzer.to_radians()),
        );
    }

    println!("\n pdl_db  rel_angle_deg  eve_fraction");
    for pdl_db in [0.0, 0.25, 0.5, 0.75, 1.1] {
        let distorted = StatePair {
            state0: apply_pdl(&pair.state0, pdl_db, 0.0)?,
            state1: apply_pdl(&pair.state1, pdl_db, 0.0)?,
        };
        let angle = distorted.relative_angle();
        println!("{pdl_db:>7.2}  {:>13.3}  {:>12.4}", angle.to_degrees(), eve_information_bound(angle)?);
    }
    Ok(())
}
