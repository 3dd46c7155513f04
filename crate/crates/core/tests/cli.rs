use std::fs;
use std::process::{Command, Output};

use quasiherm::cli::{
    self, ScenarioArgs, CSV_HEADER, EXIT_INVALID, EXIT_OK, EXIT_USAGE, EXIT_VERDICT_FAILED,
};
use quasiherm::dynamics::{builtins, Registry};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasiherm"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const NOT_QUASI_HERMITIAN: &str = r#"{
  "dimension": 2,
  "time": {"start": 0, "end": 1, "steps": 10},
  "model": {"kind": "direct",
            "H": [[[0,0],[1,0]],[[0,0],[0,0]]],
            "theta": [[[1,0],[0,0]],[[0,0],[1,0]]]},
  "initial_state": [[1,0],[0,0]]
}"#;

#[test]
fn list_prints_sorted_builtins() {
    let out = bin(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = text(&out.stdout)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_owned())
        .collect();
    assert_eq!(
        names,
        [
            builtins::CONSTANT_METRIC_2D,
            builtins::GROWING_METRIC_2D,
            builtins::NONHERMITIAN_DYSON,
            builtins::SCALAR_EXPONENTIAL
        ]
    );
}

#[test]
fn list_of_empty_registry() {
    let mut out = Vec::new();
    assert_eq!(cli::cmd_list(&Registry::empty(), &mut out), EXIT_OK);
    assert!(out.is_empty());
}

#[test]
fn run_writes_interior_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("growing.csv");
    let out = bin(&[
        "run",
        "--scenario",
        "growing-metric-2d",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 1999);
    assert!(text(&out.stdout).contains("PASS NAIVE_FAILS_IFF_METRIC_MOVES"));
}

#[test]
fn run_without_out_streams_csv() {
    let out = bin(&["run", "--scenario", "constant-metric-2d", "--steps", "10"]);
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with(CSV_HEADER));
    assert_eq!(stdout.lines().count(), 10);
    assert!(text(&out.stderr).contains("NORM_CONSERVED"));
}

#[test]
fn coarse_run_exits_with_verdict_failure() {
    let out = bin(&["run", "--scenario", "growing-metric-2d", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(EXIT_VERDICT_FAILED));
    assert!(text(&out.stderr).contains("FAIL NORM_CONSERVED"));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = bin(&[
        "run",
        "--scenario",
        "growing-metric-2d",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(text(&out.stderr).contains("cannot write"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin(&["run"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(
        bin(&["run", "--scenario", "no-such-thing"]).status.code(),
        Some(EXIT_USAGE)
    );
}

#[test]
fn invalid_scenarios_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, NOT_QUASI_HERMITIAN).unwrap();
    let out = bin(&["run", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(text(&out.stderr).contains("1.414"), "{}", text(&out.stderr));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\n  \"model\": [\n").unwrap();
    let out = bin(&["run", "--scenario", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(text(&out.stderr).contains("line"), "{}", text(&out.stderr));

    let out = bin(&["run", "--scenario", "growing-metric-2d", "--hbar", "0"]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
}

#[test]
fn scenario_file_runs_like_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.json");
    fs::write(&file, r#"{"model": {"kind": "builtin", "name": "growing-metric-2d"}, "time": {"start": 0, "end": 1, "steps": 300}}"#)
        .unwrap();
    let from_file = bin(&["run", "--scenario", file.to_str().unwrap()]);
    let direct = bin(&["run", "--scenario", "growing-metric-2d", "--steps", "300"]);
    assert_eq!(from_file.stdout, direct.stdout);
}

#[test]
fn demo_shows_the_naive_gap() {
    let out = bin(&["demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let last_row = last_table_row(&stdout);
    assert!((last_row[1] - 0.354).abs() < 1e-3, "{stdout}");
    assert!(last_row[2] <= 1e-4);
    assert!(last_row[3] <= 1e-8);

    let fine = text(&bin(&["demo", "--steps", "8000"]).stdout);
    assert!((last_table_row(&fine)[1] - last_row[1]).abs() < 5e-4);

    let constant = text(&bin(&["demo", "--scenario", "constant-metric-2d"]).stdout);
    let row = last_table_row(&constant);
    assert!(row[1] <= 1e-6 && row[2] <= 1e-6, "{constant}");
}

fn last_table_row(stdout: &str) -> Vec<f64> {
    stdout
        .lines()
        .rev()
        .find_map(|l| {
            let fields: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .ok()?;
            (fields.len() == 4).then_some(fields)
        })
        .expect("table rows")
}

#[test]
fn csv_is_deterministic_in_process() {
    let registry = Registry::builtin();
    for name in registry.names() {
        let scenario = cli::load_scenario(
            &ScenarioArgs {
                scenario: name.into(),
                steps: Some(200),
                hbar: None,
            },
            &registry,
        )
        .unwrap();
        let run = || {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            cli::cmd_run(&scenario, None, &mut out, &mut err);
            out
        };
        assert_eq!(run(), run(), "{name}");
    }
}

#[test]
fn serialized_scenarios_reproduce_diagnostics() {
    let registry = Registry::builtin();
    for name in registry.names() {
        let scenario = registry
            .lookup(name)
            .unwrap()
            .scenario()
            .unwrap()
            .with_steps(150)
            .unwrap()
            .with_hbar(0.75)
            .unwrap();
        let json = cli::serialize_scenario(&scenario).unwrap();
        let back = cli::parse_scenario(&json, &registry).unwrap();
        assert_eq!(cli::serialize_scenario(&back).unwrap(), json);
        assert_eq!(
            quasiherm::verify::run_diagnostics(&scenario).unwrap(),
            quasiherm::verify::run_diagnostics(&back).unwrap(),
            "{name}"
        );
    }
}
