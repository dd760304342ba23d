use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use passfeas_cli::commands::{self, SweepSpec};
use passfeas_cli::files::{Overrides, Setup};
use passfeas_cli::{exit, CliError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "passfeas", version, about = "Safe-pass advisory feasibility over V2V links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the minimum pass time and range with a verdict per placement.
    Bounds {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Replay one encounter and print its summary.
    Run {
        scenario: PathBuf,
        /// Write every beacon to this CSV file.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the encounter for each value of one scenario parameter.
    Sweep {
        scenario: PathBuf,
        /// Dotted parameter path, e.g. `pass_scenario.v1`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; speeds need a unit (`55mph`).
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// `start:stop:step`, stop inclusive.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the model against the reference values using the shipped presets.
    Repro {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    json: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Channel file replacing the scenario's channel.
    #[arg(long, value_name = "PATH")]
    channel: Option<PathBuf>,
    /// Terrain file replacing the scenario's terrain.
    #[arg(long, value_name = "PATH")]
    terrain: Option<PathBuf>,
}

impl Common {
    fn setup(&self, scenario: &std::path::Path) -> Result<Setup, CliError> {
        Setup::load(
            scenario,
            &Overrides {
                channel: self.channel.clone(),
                terrain: self.terrain.clone(),
                seed: self.seed,
            },
        )
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce(&T) -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
    } else {
        print!("{}", text(value));
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds { scenario, common } => {
            let setup = common.setup(&scenario)?;
            let report = commands::bounds(&setup)?;
            emit(common.json, &report, commands::BoundsReport::render);
        }
        Command::Run { scenario, csv, common } => {
            let setup = common.setup(&scenario)?;
            let summary = commands::run(&setup, csv.as_deref())?;
            emit(common.json, &summary, commands::RunSummary::render);
        }
        Command::Sweep {
            scenario,
            param,
            values,
            range,
            out,
            common,
        } => {
            let setup = common.setup(&scenario)?;
            let spec = match (values, range) {
                (Some(v), _) => SweepSpec::from_list(&param, &v, out)?,
                (None, Some(r)) => SweepSpec::from_range(&param, &r, out)?,
                (None, None) => unreachable!("clap requires --values or --range"),
            };
            let rows = commands::sweep(&setup, &spec)?;
            emit(common.json, &rows, |r| commands::sweep_csv(r));
        }
        Command::Repro { json } => {
            let report = commands::repro();
            emit(json, &report, commands::ReproReport::render);
            if !report.all_pass {
                return Err(CliError::ReproMismatch(report.failures().join("; ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("passfeas: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
