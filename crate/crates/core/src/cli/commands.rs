use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dynamics::{Registry, Scenario};
use crate::error::Error;
use crate::verify::{self, Check, Report};

use super::report::{csv_string, write_verdicts};
use super::scenario_file::parse_scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

/// Error carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn invalid(e: Error) -> CliError {
        CliError {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// `--scenario` (builtin name or JSON path) plus the common overrides.
#[derive(Debug, Clone, Default)]
pub struct ScenarioArgs {
    pub scenario: String,
    pub steps: Option<usize>,
    pub hbar: Option<f64>,
}

pub fn load_scenario(args: &ScenarioArgs, registry: &Registry) -> Result<Scenario, CliError> {
    let mut scenario = match registry.lookup(&args.scenario) {
        Some(entry) => entry.scenario().map_err(CliError::invalid)?,
        None => {
            let path = Path::new(&args.scenario);
            if !path.exists() {
                return Err(CliError::usage(format!(
                    "'{}' is neither a builtin ({}) nor a readable file",
                    args.scenario,
                    registry.names().join(", ")
                )));
            }
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            parse_scenario(&text, registry).map_err(|e| CliError {
                code: EXIT_INVALID,
                message: format!("{}: {e}", path.display()),
            })?
        }
    };
    if let Some(steps) = args.steps {
        scenario = scenario.with_steps(steps).map_err(CliError::invalid)?;
    }
    if let Some(hbar) = args.hbar {
        scenario = scenario.with_hbar(hbar).map_err(CliError::invalid)?;
    }
    Ok(scenario)
}

fn label(scenario: &Scenario) -> String {
    let name = scenario.builtin_name().unwrap_or("custom");
    let g = scenario.grid();
    format!(
        "scenario {name}: dim={} hbar={} t=[{}, {}] steps={}",
        scenario.dim(),
        scenario.hbar(),
        g.start(),
        g.end(),
        g.steps()
    )
}

/// Runs diagnostics. The CSV goes to `out` when given, otherwise to `stdout`;
/// the verdict summary goes to whichever stream the CSV does not use.
pub fn cmd_run(
    scenario: &Scenario,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let report = match verify::run(scenario) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let csv = csv_string(&report.rows);
    let summary: &mut dyn Write = match out {
        Some(path) => {
            if let Err(e) = fs::write(path, &csv) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            stdout
        }
        None => {
            if stdout.write_all(csv.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            stderr
        }
    };
    let _ = writeln!(summary, "{}", label(scenario));
    let _ = write_verdicts(&report.verdicts, &mut *summary);
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERDICT_FAILED
    }
}

fn demo_rows(report: &Report) -> Vec<usize> {
    let n = report.rows.len();
    let mut picks: Vec<usize> = [0.1, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| (((n as f64) * f).round() as usize).clamp(1, n) - 1)
        .collect();
    picks.dedup();
    picks
}

/// Side-by-side comparison of the two generators for one scenario.
pub fn cmd_demo(scenario: &Scenario, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let report = match verify::run(scenario) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let norm0 = {
        let phi = scenario.initial_components();
        let theta0 = scenario.model().theta().eval(scenario.grid().start());
        theta0
            .map(|th| phi.dotc(&th.apply(phi)).re)
            .unwrap_or(f64::NAN)
    };
    let w = stdout;
    let _ = writeln!(w, "{}", label(scenario));
    let _ = writeln!(w);
    let _ = writeln!(
        w,
        "{:>10}  {:>14}  {:>14}  {:>14}",
        "t", "res_naive", "res_corrected", "norm_drift"
    );
    for k in demo_rows(&report) {
        let r = &report.rows[k];
        let _ = writeln!(
            w,
            "{:>10.6}  {:>14.6e}  {:>14.6e}  {:>14.6e}",
            r.t,
            r.res_naive,
            r.res_corrected,
            (r.norm_phys / norm0 - 1.0).abs()
        );
    }
    let _ = writeln!(w);
    let _ = write_verdicts(&report.verdicts, &mut *w);
    let naive = report
        .verdict(Check::NaiveFailsIffMetricMoves)
        .map(|v| v.observed);
    let drift = report.verdict(Check::NormConserved).map(|v| v.observed);
    if let (Some(naive), Some(drift)) = (naive, drift) {
        let _ = writeln!(w);
        if naive >= scenario.tolerances().naive_fail {
            let _ = writeln!(
                w,
                "i*hbar*dU/dt = H*U misses by up to {naive:.3}; adding -i*hbar*omega^-1*d(omega)/dt repairs it."
            );
        } else {
            let _ = writeln!(w, "metric is (numerically) static: both generators agree.");
        }
        let _ = writeln!(
            w,
            "physical norm <phi|Theta(t)|phi> drifts by at most {drift:.1e}: evolution stays unitary while the metric moves."
        );
    }
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERDICT_FAILED
    }
}

pub fn cmd_list(registry: &Registry, stdout: &mut dyn Write) -> i32 {
    for b in registry.iter() {
        let _ = writeln!(
            stdout,
            "{:<22} dim={} t=[{}, {}]  {}",
            b.name, b.dim, b.span.0, b.span.1, b.summary
        );
    }
    EXIT_OK
}
