//! Runs every experiment preset and writes its CSVs and manifest, exactly as
//! `b92sim preset <name>` does.
//!
//! Run: cargo run --release --example presets [OUT_DIR]

use std::path::PathBuf;

use b92sim::cli::{run_preset, ExperimentPreset};

fn main() -> b92sim::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "preset-output".to_string()));
    for preset in ExperimentPreset::ALL {
        let dir = root.join(preset.name());
        for file in run_preset(preset, &dir, 0)? {
            println!("{}", file.display());
        }
    }
    Ok(())
}
