//! Config files, experiment presets and CSV output behind the `b92sim` binary.
//!
//! Configs are TOML with one table per component:
//!
//! ```toml
//! clock_hz = 2e9
//! mode = "monte_carlo"
//! slot_count = 10000000
//!
//! [source]
//! mu = 0.1
//!
//! [path]
//! fiber_length_km = 6.55
//!
//! [detectors.channel0]
//! variant = "standard"
//! [detectors.channel1]
//! variant = "standard"
//! ```
//!
//! Every omitted field takes its documented default and unknown keys are
//! rejected.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::detection::DetectorModel;
use crate::engine::{
    distill_key, run_link, run_network, sweep, DistilledKey, LinkMetrics, NetworkTopology, PortSpec,
    ScenarioConfig, SweepParameter,
};
use crate::error::{Error, Result};
use crate::link::SPLITTER_1X32_LOSS_DB;
use crate::postprocessing::write_key;

pub const CSV_HEADER: [&str; 10] = [
    "parameter_value",
    "raw_click_rate_hz",
    "conclusive_rate_hz",
    "sifted_rate_hz",
    "qber",
    "nbr_hz",
    "signal_counts",
    "dark_counts",
    "misallocated_counts",
    "insufficient_data_flag",
];

pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::ConfigParse {
            line,
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Serializes a config back to the file format; `parse_config_str` of the
/// result gives the same config.
pub fn emit_config(config: &ScenarioConfig) -> String {
    toml::to_string(config).expect("scenario configs always serialize")
}

/// One CSV table: a swept value per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub parameter: String,
    pub rows: Vec<(f64, LinkMetrics)>,
}

pub fn write_csv<W: Write>(out: W, rows: &[(f64, LinkMetrics)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (value, m) in rows {
        w.write_record([
            value.to_string(),
            m.raw_click_rate_hz.to_string(),
            m.conclusive_rate_hz.to_string(),
            m.sifted_rate_hz.to_string(),
            m.qber.to_string(),
            m.nbr_hz.to_string(),
            m.counts.signal.to_string(),
            m.counts.dark.to_string(),
            m.counts.misallocated.to_string(),
            u8::from(m.insufficient_data).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentPreset {
    /// QBER against clock rate at 6.55 km, both detector variants.
    Fig4ClockSweep,
    /// QBER against distance at 2 GHz, real fibre and lumped attenuation.
    Fig5DistanceSweep,
    /// Four ports of a 1×32 splitter network at 1 GHz.
    Table1Network,
    /// 4.2 km point-to-point link at 1 GHz.
    P2pBaseline,
}

impl ExperimentPreset {
    pub const ALL: [ExperimentPreset; 4] = [
        ExperimentPreset::Fig4ClockSweep,
        ExperimentPreset::Fig5DistanceSweep,
        ExperimentPreset::Table1Network,
        ExperimentPreset::P2pBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentPreset::Fig4ClockSweep => "fig4_clock_sweep",
            ExperimentPreset::Fig5DistanceSweep => "fig5_distance_sweep",
            ExperimentPreset::Table1Network => "table1_network",
            ExperimentPreset::P2pBaseline => "p2p_baseline",
        }
    }

    /// Base scenario of the preset.
    pub fn config(self, seed: u64) -> ScenarioConfig {
        let mut c = ScenarioConfig {
            seed,
            ..ScenarioConfig::default()
        };
        match self {
            ExperimentPreset::Fig4ClockSweep => {
                c.path.fiber_length_km = 6.55;
            }
            ExperimentPreset::Fig5DistanceSweep => {
                c.clock_hz = 2e9;
            }
            ExperimentPreset::Table1Network => {
                c.path.fiber_length_km = 0.0;
                c.path.splitter_loss_db = SPLITTER_1X32_LOSS_DB;
                c = c.with_detectors(DetectorModel::standard());
                c.network = Some(NetworkTopology {
                    ports: TABLE1_PORTS_KM
                        .iter()
                        .enumerate()
                        .map(|(i, &km)| PortSpec::new(i as u32, km))
                        .collect(),
                    ..NetworkTopology::default()
                });
            }
            ExperimentPreset::P2pBaseline => {}
        }
        c
    }

    /// Runs every table of the preset.
    pub fn run(self, seed: u64) -> Result<Vec<(ResultTable, ScenarioConfig)>> {
        let base = self.config(seed);
        let variants = [("standard", DetectorModel::standard()), ("enhanced", DetectorModel::enhanced())];
        let mut out = Vec::new();
        match self {
            ExperimentPreset::Fig4ClockSweep => {
                for (label, det) in variants {
                    let config = base.clone().with_detectors(det);
                    out.push(sweep_table(
                        format!("{}_{label}", self.name()),
                        SweepParameter::ClockHz,
                        &FIG4_CLOCKS_HZ,
                        config,
                    )?);
                }
            }
            ExperimentPreset::Fig5DistanceSweep => {
                for (label, det) in variants {
                    let config = base.clone().with_detectors(det);
                    let fibre = sweep_table(
                        format!("{}_{label}_fiber", self.name()),
                        SweepParameter::FiberLengthKm,
                        &FIG5_DISTANCES_KM,
                        config.clone(),
                    )?;
                    let db: Vec<f64> = FIG5_DISTANCES_KM
                        .iter()
                        .map(|km| km * config.path.fiber_loss_db_per_km)
                        .collect();
                    let attenuated = sweep_table(
                        format!("{}_{label}_attenuation", self.name()),
                        SweepParameter::AttenuationEquivalentDb,
                        &db,
                        config,
                    )?;
                    out.push(fibre);
                    out.push(attenuated);
                }
            }
            ExperimentPreset::Table1Network => {
                let topology = base.network.clone().expect("preset defines a network");
                let ports = run_network(&base, &topology)?;
                let rows = topology
                    .ports
                    .iter()
                    .zip(ports)
                    .map(|(spec, p)| (spec.fiber_length_km, p.metrics))
                    .collect();
                out.push((
                    ResultTable {
                        name: self.name().to_string(),
                        parameter: "port_fiber_length_km".to_string(),
                        rows,
                    },
                    base,
                ));
            }
            ExperimentPreset::P2pBaseline => {
                let metrics = run_link(&base)?;
                out.push((
                    ResultTable {
                        name: self.name().to_string(),
                        parameter: SweepParameter::FiberLengthKm.name().to_string(),
                        rows: vec![(base.path.fiber_length_km, metrics)],
                    },
                    base,
                ));
            }
        }
        Ok(out)
    }
}

pub const FIG4_CLOCKS_HZ: [f64; 5] = [1.0e9, 1.2e9, 1.5e9, 1.7e9, 2.0e9];
pub const FIG5_DISTANCES_KM: [f64; 7] = [1.0, 2.0, 3.0, 4.2, 5.0, 6.55, 8.0];
pub const TABLE1_PORTS_KM: [f64; 4] = [0.0, 2.0, 3.8, 6.4];

fn sweep_table(
    name: String,
    parameter: SweepParameter,
    values: &[f64],
    config: ScenarioConfig,
) -> Result<(ResultTable, ScenarioConfig)> {
    let rows = sweep(parameter, values, &config)?;
    Ok((
        ResultTable {
            name,
            parameter: parameter.name().to_string(),
            rows,
        },
        config,
    ))
}

impl fmt::Display for ExperimentPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("preset", format!("unknown preset {s:?}")))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    preset: &'a str,
    seed: u64,
    version: &'a str,
    runs: Vec<ManifestRun<'a>>,
}

#[derive(Serialize)]
struct ManifestRun<'a> {
    file: String,
    parameter: &'a str,
    values: Vec<f64>,
    config: &'a ScenarioConfig,
}

/// Runs a preset and writes one CSV per table plus [`MANIFEST_FILE`] into
/// `out_dir`. Returns the files written.
pub fn run_preset(preset: ExperimentPreset, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let tables = preset.run(seed)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut runs = Vec::new();
    for (table, config) in &tables {
        let file = format!("{}.csv", table.name);
        let path = out_dir.join(&file);
        write_csv(fs::File::create(&path)?, &table.rows)?;
        written.push(path);
        runs.push(ManifestRun {
            file,
            parameter: &table.parameter,
            values: table.rows.iter().map(|(v, _)| *v).collect(),
            config,
        });
    }
    let manifest = Manifest {
        preset: preset.name(),
        seed,
        version: env!("CARGO_PKG_VERSION"),
        runs,
    };
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, toml::to_string(&manifest).expect("manifest serializes"))?;
    written.push(path);
    Ok(written)
}

/// Metrics for a config file: one row per network port, or a single row
/// keyed by fibre length.
pub fn run_config(config: &ScenarioConfig) -> Result<Vec<(f64, LinkMetrics)>> {
    match &config.network {
        Some(topology) => Ok(run_network(config, topology)?
            .into_iter()
            .map(|p| (p.fiber_length_km, p.metrics))
            .collect()),
        None => Ok(vec![(config.path.fiber_length_km, run_link(config)?)]),
    }
}

/// Distils a key from `config` and writes Alice's copy to `path`.
pub fn emit_keys(config: &ScenarioConfig, path: &Path) -> Result<DistilledKey> {
    let key = distill_key(config)?;
    write_key(path, &key.alice_key)?;
    Ok(key)
}
