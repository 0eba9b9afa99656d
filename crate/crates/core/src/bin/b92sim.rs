use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use b92sim::cli::{emit_keys, parse_config, run_config, run_preset, write_csv, ExperimentPreset};
use b92sim::engine::{sweep, SweepParameter};
use b92sim::{Error, Result};

/// B92 quantum key distribution link simulator.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a config file and print one CSV row per link or port.
    Run { config: PathBuf },
    /// Run a named experiment and write its CSVs and manifest.
    Preset {
        /// fig4_clock_sweep, fig5_distance_sweep, table1_network or p2p_baseline
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep one parameter over a config: `sweep <param> <values...> <config>`.
    Sweep {
        /// clock_hz, fiber_length_km or attenuation_equivalent_db
        param: String,
        /// Values followed by the config path.
        #[arg(num_args = 2.., required = true)]
        args: Vec<String>,
    },
    /// Simulate, reconcile and amplify, then write the final key.
    Keys {
        config: PathBuf,
        #[arg(long)]
        emit_keys: PathBuf,
    },
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config } => {
            let config = parse_config(&config)?;
            write_csv(io::stdout().lock(), &run_config(&config)?)
        }
        Command::Preset { name, out, seed } => {
            let preset: ExperimentPreset = name.parse()?;
            for path in run_preset(preset, &out, seed)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Sweep { param, mut args } => {
            let parameter: SweepParameter = param.parse()?;
            let config = parse_config(&PathBuf::from(args.pop().expect("clap enforces two args")))?;
            let values = args
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::InvalidParameter {
                            field: "values".into(),
                            reason: format!("{v:?} is not a number"),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            write_csv(io::stdout().lock(), &sweep(parameter, &values, &config)?)
        }
        Command::Keys { config, emit_keys: path } => {
            let config = parse_config(&config)?;
            let key = emit_keys(&config, &path)?;
            eprintln!(
                "sifted {} sampled {} qber {:.4} leaked {} compressed {} final {}",
                key.sifted_bits,
                key.sampled_bits,
                key.qber_estimate,
                key.bits_leaked,
                key.compression_bits,
                key.final_bits
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
