use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasiherm::cli::{self, CliError, ScenarioArgs};
use quasiherm::dynamics::{builtins, Registry};

#[derive(Parser)]
#[command(
    name = "quasiherm",
    version,
    about = "Propagators and metric diagnostics for time-dependent quasi-Hermitian Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Number of grid steps (overrides the scenario)
    #[arg(long)]
    steps: Option<usize>,
    /// Reduced Planck constant (overrides the scenario)
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run diagnostics and print verdicts
    Run {
        /// Builtin name or path to a JSON scenario file
        #[arg(long)]
        scenario: String,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the naive and corrected generators
    Demo {
        #[arg(long, default_value = builtins::GROWING_METRIC_2D)]
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// List builtin scenarios
    List,
}

fn load(
    scenario: String,
    common: Common,
    registry: &Registry,
) -> Result<quasiherm::dynamics::Scenario, CliError> {
    cli::load_scenario(
        &ScenarioArgs {
            scenario,
            steps: common.steps,
            hbar: common.hbar,
        },
        registry,
    )
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let registry = Registry::builtin();
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr().lock();
    let code = match args.command {
        Command::List => cli::cmd_list(&registry, &mut stdout),
        Command::Run {
            scenario,
            out,
            common,
        } => match load(scenario, common, &registry) {
            Ok(s) => cli::cmd_run(&s, out.as_deref(), &mut stdout, &mut stderr),
            Err(e) => {
                eprintln!("error: {e}");
                e.code
            }
        },
        Command::Demo { scenario, common } => match load(scenario, common, &registry) {
            Ok(s) => cli::cmd_demo(&s, &mut stdout, &mut stderr),
            Err(e) => {
                eprintln!("error: {e}");
                e.code
            }
        },
    };
    ExitCode::from(code as u8)
}
