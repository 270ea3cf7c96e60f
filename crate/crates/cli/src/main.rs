use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use casimir_cli::app::{configure_threads, run_config, run_validate, CliError};
use casimir_cli::scenarios::ScenarioKind;

/// Casimir pressures, reflection tables, sphere modes and dipole-lattice checks.
///
/// Set CASIMIR_THREADS to cap the number of worker threads.
#[derive(Parser)]
#[command(name = "casimir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure and free energy between two half-spaces.
    Pressure { config: PathBuf },
    /// Pressure over a temperature or gap sweep.
    Sweep { config: PathBuf },
    /// Reflection coefficients on a (u, p) grid.
    Reflect { config: PathBuf },
    /// Spherical-mode coefficients of a dielectric ball.
    Sphere { config: PathBuf },
    /// Dipole-lattice free energies and forces.
    Oracle { config: PathBuf },
    /// Run the self-check suite; the table goes to stdout.
    Validate {
        /// Also write the table and a manifest here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(std::env::var("CASIMIR_THREADS").ok().as_deref()).and_then(|_| {
        let (kind, path) = match cli.command {
            Command::Pressure { config } => (ScenarioKind::Pressure, config),
            Command::Sweep { config } => (ScenarioKind::TemperatureSweep, config),
            Command::Reflect { config } => (ScenarioKind::ReflectionTable, config),
            Command::Sphere { config } => (ScenarioKind::SphereModes, config),
            Command::Oracle { config } => (ScenarioKind::OracleRun, config),
            Command::Validate { output } => return run_validate(output.as_deref(), &mut std::io::stdout().lock()),
        };
        let report = run_config(kind, &path)?;
        eprintln!("wrote {} rows to {} ({})", report.rows, report.output.display(), report.manifest.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
