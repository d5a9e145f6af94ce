use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oqs_cli::commands::{self, load_config, Format};
use oqs_cli::{Engine, Overrides, Result};

#[derive(Parser, Debug)]
#[command(name = "oqs", version, about = "Open quantum system runs: CSV time series and SVG plots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one configuration
    Simulate(RunArgs),
    /// Run every point of the configuration's sweep
    Sweep(RunArgs),
    /// Run a trajectory ensemble and also write the jump records
    Trajectories(RunArgs),
    /// Render an SVG from an existing CSV, or run a configuration straight to SVG
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides mcwf.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured engine
    #[arg(long)]
    engine: Option<Engine>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// CSV previously written by simulate, sweep or trajectories
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    input: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    engine: Option<Engine>,
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = load_config(&a.config, Overrides { engine: a.engine, seed: a.seed })?;
            commands::simulate(&cfg, &a.out, a.format)
        }
        Command::Sweep(a) => {
            let cfg = load_config(&a.config, Overrides { engine: a.engine, seed: a.seed })?;
            commands::sweep(&cfg, &a.out, a.format)
        }
        Command::Trajectories(a) => {
            let cfg = load_config(&a.config, Overrides { engine: Some(Engine::Mcwf), seed: a.seed })?;
            commands::trajectories(&cfg, &a.out, a.format)
        }
        Command::Plot(a) => match (a.input, a.config) {
            (Some(input), _) => commands::plot_csv(&input, &a.out),
            (None, Some(config)) => {
                let cfg = load_config(&config, Overrides { engine: a.engine, seed: a.seed })?;
                if cfg.sweep.is_some() {
                    commands::sweep(&cfg, &a.out, Format::Svg)
                } else {
                    commands::simulate(&cfg, &a.out, Format::Svg)
                }
            }
            (None, None) => unreachable!("clap requires --input or --config"),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oqs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
