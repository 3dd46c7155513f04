//! Compiles and runs a C program against the generated header and the
//! static library. Skipped when no C compiler is available.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "quasiherm.h"

int main(void) {
    QhScenario *s = NULL;
    if (qh_scenario_builtin("growing-metric-2d", &s) != QH_STATUS_OK) return 10;
    if (qh_scenario_set_steps(s, 1) != QH_STATUS_INVALID_ARGUMENT) return 11;
    QhReport *r = NULL;
    if (qh_run(s, &r) != QH_STATUS_OK) return 12;
    if (!qh_report_all_passed(r)) return 13;
    QhVerdict v;
    for (size_t i = 0; i < qh_report_verdict_count(r); i++) {
        if (qh_report_verdict(r, i, &v) != QH_STATUS_OK) return 14;
        printf("%s %s\n", v.passed ? "PASS" : "FAIL", qh_check_name(v.check));
    }
    qh_report_free(r);
    qh_scenario_free(s);
    if (qh_scenario_builtin("nope", &s) != QH_STATUS_INVALID_ARGUMENT) return 15;
    printf("error: %s\n", qh_last_error_message());
    return 0;
}
"#;

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}

fn static_lib() -> Option<PathBuf> {
    // target/tmp -> target/<profile>
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let target = tmp.parent()?;
    ["debug", "release"]
        .iter()
        .map(|p| target.join(p).join("libquasiherm_ffi.a"))
        .find(|p| p.exists())
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let syntax = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        syntax.status.success(),
        "{}",
        String::from_utf8_lossy(&syntax.stderr)
    );

    let Some(lib) = static_lib() else {
        eprintln!("static library not built, skipping link step");
        return;
    };
    let exe = dir.path().join("main");
    let link = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        link.status.success(),
        "{}",
        String::from_utf8_lossy(&link.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "exit {:?}: {stdout}",
        run.status.code()
    );
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("PASS")).count(),
        5,
        "{stdout}"
    );
    assert!(stdout.contains("unknown builtin"));
}
