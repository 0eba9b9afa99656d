use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use b92sim::cli::{parse_config_str, run_preset, ExperimentPreset, CSV_HEADER};
use b92sim::postprocessing::read_key;

fn b92sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_b92sim")).args(args).output().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", "[path]\nfiber_length_km = 3.0\n");
    let out = b92sim(&["run", &config]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(&CSV_HEADER.join(",")));
    assert_eq!(column(&text, "parameter_value"), vec![3.0]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[source]\nmu = -1\n");
    let out = b92sim(&["run", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("source.mu"));
    assert_eq!(b92sim(&["run", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(b92sim(&["preset", "nope"]).status.code(), Some(1));
    assert_eq!(b92sim(&["frobnicate"]).status.code(), Some(1));

    // duplicate ports are a config error, an unwritable output a runtime one
    let net = write(dir.path(), "net.toml", "[network]\nports = [{ id = 1 }, { id = 1 }]\n");
    assert_eq!(b92sim(&["run", &net]).status.code(), Some(1));
    let blocker = write(dir.path(), "file", "");
    let out = b92sim(&["preset", "p2p_baseline", "--out", &format!("{blocker}/sub")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", "");
    let out = b92sim(&["sweep", "fiber_length_km", "1", "2", "4", &config]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(column(&text, "parameter_value"), vec![1.0, 2.0, 4.0]);
    let rates = column(&text, "sifted_rate_hz");
    assert!(rates.windows(2).all(|w| w[0] > w[1]));
    assert_eq!(b92sim(&["sweep", "speed", "1", &config]).status.code(), Some(1));
    assert_eq!(b92sim(&["sweep", "clock_hz", "fast", &config]).status.code(), Some(1));
}

#[test]
fn keys_subcommand_writes_matching_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "k.toml",
        "mode = \"monte_carlo\"\nslot_count = 3000000\nseed = 4\n",
    );
    let key_path = dir.path().join("key.bin");
    let out = b92sim(&["keys", &config, "--emit-keys", key_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let key = read_key(&key_path).unwrap();
    assert!(!key.is_empty());
    let parsed = parse_config_str(&fs::read_to_string(dir.path().join("k.toml")).unwrap()).unwrap();
    let again = b92sim::engine::distill_key(&parsed).unwrap();
    assert_eq!(again.alice_key, key);
}

#[test]
fn presets_write_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = b92sim(&["preset", "table1_network", "--out", dir.path().to_str().unwrap(), "--seed", "3"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("table1_network.csv")).unwrap();
    assert_eq!(column(&csv, "parameter_value"), vec![0.0, 2.0, 3.8, 6.4]);
    let qber = column(&csv, "qber");
    let nbr = column(&csv, "nbr_hz");
    assert!(qber.windows(2).all(|w| w[0] < w[1]));
    assert!(nbr.windows(2).all(|w| w[0] > w[1]));
    let manifest = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3"));
    assert!(manifest.contains("table1_network.csv"));
}

#[test]
fn baseline_preset_in_band() {
    let dir = tempfile::tempdir().unwrap();
    run_preset(ExperimentPreset::P2pBaseline, dir.path(), 0).unwrap();
    let csv = fs::read_to_string(dir.path().join("p2p_baseline.csv")).unwrap();
    let q = column(&csv, "qber")[0];
    assert!((0.008..=0.025).contains(&q), "{q}");
}

#[test]
fn every_preset_writes_its_tables() {
    let expected = [
        (ExperimentPreset::Fig4ClockSweep, 2),
        (ExperimentPreset::Fig5DistanceSweep, 4),
        (ExperimentPreset::Table1Network, 1),
        (ExperimentPreset::P2pBaseline, 1),
    ];
    for (preset, tables) in expected {
        let dir = tempfile::tempdir().unwrap();
        let files = run_preset(preset, dir.path(), 0).unwrap();
        assert_eq!(files.len(), tables + 1, "{preset}");
    }
}
