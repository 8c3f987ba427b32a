use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qdswitch_cli::fit::{run_fit, FITTERS};
use qdswitch_cli::manifest::OutputDir;
use qdswitch_cli::{init_workers, list_scenarios, run_scenario, CliError, Config};

/// Cavity-QED switch simulations: reproduce each figure's computation from a
/// JSON config. Worker threads follow QDSWITCH_WORKERS when set.
#[derive(Parser)]
#[command(name = "qdswitch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered scenarios.
    List,
    /// Run a scenario and write its outputs and manifest.
    Run {
        scenario: String,
        /// JSON config; the bundled device defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dotted-path override, e.g. device.g=13.4. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write SVG plots.
        #[arg(long)]
        svg: bool,
    },
    /// Fit a two-column CSV and print the result as JSON.
    Fit {
        /// One of: lorentzian, gaussian, switching_curve, vacuum_rabi, eta.
        fitter: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Also write fit.json and a manifest into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the bundled default configuration.
    Defaults,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    init_workers()?;
    match cli.command {
        Command::List => print!("{}", list_scenarios()),
        Command::Defaults => print!("{}", qdswitch_cli::config::PAPER_DEFAULTS),
        Command::Run { scenario, config, overrides, out, svg } => {
            let cfg = Config::load(config.as_deref(), &overrides)?;
            let manifest = run_scenario(&scenario, &cfg, &out, svg)?;
            for f in &manifest.files {
                println!("{}  {}", f.sha256, out.join(&f.path).display());
            }
        }
        Command::Fit { fitter, data, config, overrides, out } => {
            let cfg = Config::load(config.as_deref(), &overrides)?;
            let fit = run_fit(&fitter, &data, &cfg)?;
            let text = serde_json::to_string_pretty(&fit).map_err(|e| CliError::Fs(e.to_string()))?;
            println!("{text}");
            if let Some(dir) = out {
                let mut od = OutputDir::create(&dir)?;
                od.write_json("fit.json", &fit)?;
                od.finish(&format!("fit:{fitter}"))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdswitch: {e}");
            if let CliError::Config(_) = e {
                let names: Vec<&str> = FITTERS.iter().map(|f| f.0).collect();
                eprintln!("(fitters: {})", names.join(", "));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
