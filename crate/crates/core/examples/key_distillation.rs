//! Sift, sample the error rate, reconcile with Cascade and compress with a
//! Toeplitz hash, then write the key to disk.
//!
//! Run: cargo run --release --example key_distillation [OUT_FILE]

use b92sim::engine::{distill_key, Mode, ScenarioConfig};
use b92sim::postprocessing::{read_key, write_key};

fn main() -> b92sim::Result<()> {
    let config = ScenarioConfig {
        mode: Mode::MonteCarlo,
        slot_count: Some(20_000_000),
        seed: 11,
        ..Default::default()
    };
    let key = distill_key(&config)?;
    println!("sifted          {:>8}", key.sifted_bits);
    println!("sampled         {:>8}  (qber {:.3}%)", key.sampled_bits, 100.0 * key.qber_estimate);
    println!("reconciled      {:>8}", key.reconciled_bits);
    println!("  leaked        {:>8}", key.bits_leaked);
    println!("  compressed    {:>8}  (eve fraction {:.4})", key.compression_bits, key.metrics.eve_fraction);
    println!("final           {:>8}", key.final_bits);
    assert_eq!(key.alice_key, key.bob_key);

    let out = std::env::args().nth(1).unwrap_or_else(|| "distilled.key".to_string());
    write_key(out.as_ref(), &key.alice_key)?;
    assert_eq!(read_key(out.as_ref())?, key.alice_key);
    println!("wrote {out}");
    Ok(())
}
