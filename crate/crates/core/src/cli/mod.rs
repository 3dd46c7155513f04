//! Scenario files, reports and the `quasiherm` subcommands.

pub mod commands;
pub mod report;
pub mod scenario_file;

pub use commands::{
    cmd_demo, cmd_list, cmd_run, load_scenario, CliError, ScenarioArgs, EXIT_INVALID, EXIT_OK,
    EXIT_USAGE, EXIT_VERDICT_FAILED,
};
pub use report::{csv_string, format_number, write_csv, write_verdicts, CSV_HEADER};
pub use scenario_file::{parse_scenario, parse_scenario_file, serialize_scenario, ScenarioFile};
