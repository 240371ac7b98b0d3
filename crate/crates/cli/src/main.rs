//! Command-line front end: simulate the reference diodes, extract figures
//! of merit from simulated or measured curves, and compare against the
//! embedded reference dataset.
//!
//! Exit codes: 0 success, 1 solver failure, 2 configuration error,
//! 3 extraction error.

mod commands;
mod config;
mod output;
mod reference;

use clap::{Parser, Subcommand};
use config::RunConfig;
use oxidiode::error::Error;
use std::path::PathBuf;

/// Environment variable providing the default output directory.
const OUTDIR_ENV: &str = "OXIDIODE_OUTDIR";

#[derive(Parser)]
#[command(
    name = "oxidiode",
    version,
    about = "1D drift-diffusion simulator and characterization toolkit for oxide diodes"
)]
struct Cli {
    /// Run configuration file (TOML); defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides config and OXIDIODE_OUTDIR)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Device preset override (schottky-fig1, heterojunction-fig2); may be
    /// repeated
    #[arg(long = "preset", global = true)]
    presets: Vec<String>,

    /// Temperature list override, in the configured unit
    #[arg(long, global = true, value_delimiter = ',')]
    temps: Vec<f64>,

    /// Temperature unit override ("C" or "K")
    #[arg(long, global = true)]
    temp_unit: Option<String>,

    /// Worker threads for independent (device, temperature) solves
    #[arg(long, default_value_t = 1, global = true)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium band diagrams per device and temperature
    BandDiagram,
    /// Temperature-swept I-V curves plus extracted metrics
    SimulateIv,
    /// Quasi-static C-V curves plus Mott-Schottky fits
    SimulateCv,
    /// Extract metrics from external curve CSV files
    Extract {
        /// I-V curve files (columns: voltage, current)
        #[arg(long = "iv")]
        iv: Vec<PathBuf>,
        /// C-V curve files (columns: voltage, capacitance)
        #[arg(long = "cv")]
        cv: Vec<PathBuf>,
        /// Override the curve temperature [K]
        #[arg(long)]
        temperature: Option<f64>,
        /// Metrics output path
        #[arg(long, default_value = "metrics_extracted.json")]
        output: PathBuf,
    },
    /// Grade metrics JSON files against the embedded reference dataset
    Compare {
        /// Metrics files produced by simulate-iv / simulate-cv / extract
        files: Vec<PathBuf>,
    },
    /// Print the fully resolved configuration
    ShowConfig,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Convergence { .. } => 1,
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Extraction(_) => 3,
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if !cli.presets.is_empty() {
        cfg.device = cli
            .presets
            .iter()
            .map(|p| config::DeviceConfig::preset(p))
            .collect();
    }
    if !cli.temps.is_empty() {
        cfg.sweep.temperatures = cli.temps.clone();
    }
    if let Some(unit) = &cli.temp_unit {
        cfg.sweep.temperature_unit = unit.clone();
    }
    if let Some(out) = &cli.out {
        cfg.output.directory = out.to_string_lossy().to_string();
    } else if let Ok(dir) = std::env::var(OUTDIR_ENV) {
        if cli.config.is_none() || cfg.output.directory == "out" {
            cfg.output.directory = dir;
        }
    }
    // fail early on anything malformed
    cfg.devices()?;
    cfg.sweep.kelvin()?;
    cfg.solver.to_solver_config()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Compare { files } => {
            if files.is_empty() {
                return Err(Error::config("compare needs at least one metrics file".to_string()));
            }
            let ok = commands::compare(files)?;
            if !ok {
                // hard comparison failures surface as a distinct exit path
                std::process::exit(4);
            }
            Ok(())
        }
        other => {
            let cfg = resolve_config(cli)?;
            let out = PathBuf::from(&cfg.output.directory);
            match other {
                Command::BandDiagram => commands::band_diagram(&cfg, &out, cli.jobs),
                Command::SimulateIv => commands::simulate_iv(&cfg, &out, cli.jobs),
                Command::SimulateCv => commands::simulate_cv(&cfg, &out, cli.jobs),
                Command::Extract {
                    iv,
                    cv,
                    temperature,
                    output,
                } => commands::extract(&cfg, iv, cv, *temperature, output),
                Command::ShowConfig => commands::show_config(&cfg),
                Command::Compare { .. } => unreachable!(),
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
