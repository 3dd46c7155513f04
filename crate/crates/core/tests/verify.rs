use quasiherm::dynamics::{
    builtins, Model, OperatorSchedule, Registry, Scenario, TimeGrid, Tolerances,
};
use quasiherm::matcore::{ComplexMatrix, C64};
use quasiherm::verify::{self, Bound, Check, DiagnosticsRow, Probe};
use quasiherm::Error;

fn builtin(name: &str) -> Scenario {
    Registry::builtin()
        .lookup(name)
        .unwrap()
        .scenario()
        .unwrap()
}

fn passed(report: &verify::Report, check: Check) -> bool {
    report.verdict(check).unwrap().passed
}

#[test]
fn growing_metric_passes_all_five() {
    let report = verify::run(&builtin(builtins::GROWING_METRIC_2D)).unwrap();
    assert_eq!(report.rows.len(), 1999);
    assert_eq!(report.verdicts.len(), 5);
    assert!(report.all_passed(), "{:#?}", report.verdicts);
    let naive = report.verdict(Check::NaiveFailsIffMetricMoves).unwrap();
    assert_eq!(naive.bound, Bound::AtLeast);
    assert!(naive.observed > 0.3);
}

#[test]
fn constant_metric_passes_with_small_naive_residual() {
    let report = verify::run(&builtin(builtins::CONSTANT_METRIC_2D)).unwrap();
    assert!(report.all_passed(), "{:#?}", report.verdicts);
    let naive = report.verdict(Check::NaiveFailsIffMetricMoves).unwrap();
    assert_eq!(naive.bound, Bound::AtMost);
    for r in &report.rows {
        assert!(r.res_naive <= 1e-6 && r.res_corrected <= 1e-6);
    }
}

#[test]
fn every_builtin_passes() {
    for name in Registry::builtin().names() {
        let report = verify::run(&builtin(name)).unwrap();
        assert!(report.all_passed(), "{name}: {:#?}", report.verdicts);
    }
}

#[test]
fn growing_metric_rows_match_closed_form() {
    let rows = verify::run_diagnostics(&builtin(builtins::GROWING_METRIC_2D)).unwrap();
    for r in rows.iter().step_by(97) {
        // ||diag(0, t/(1+t^2)) U_R||_F; row 2 of U_R has norm 1/sqrt(1+t^2).
        let expected = r.t / (1.0 + r.t * r.t).powf(1.5);
        assert!(
            (r.res_naive - expected).abs() <= 1e-5,
            "t={} {} vs {expected}",
            r.t,
            r.res_naive
        );
        assert!(r.res_qh <= 1e-11);
        assert!(r.unitarity_defect <= 1e-12);
    }
}

#[test]
fn empty_rows_are_rejected() {
    let scenario = builtin(builtins::GROWING_METRIC_2D);
    assert_eq!(verify::verdicts(&[], &scenario), Err(Error::EmptyRows));
}

#[test]
fn nan_fails_the_verdict() {
    let scenario = builtin(builtins::CONSTANT_METRIC_2D);
    let mut rows = verify::run_diagnostics(&scenario.with_steps(20).unwrap()).unwrap();
    rows[3].norm_phys = f64::NAN;
    let verdicts = verify::verdicts(&rows, &scenario).unwrap();
    let norm = verdicts
        .iter()
        .find(|v| v.check == Check::NormConserved)
        .unwrap();
    assert!(!norm.passed);
    assert!(norm.observed.is_nan());
}

#[test]
fn coarse_grid_fails_norm_conservation() {
    let report = verify::run(&builtin(builtins::GROWING_METRIC_2D).with_steps(4).unwrap()).unwrap();
    assert!(!passed(&report, Check::NormConserved));
    assert!(!report.all_passed());
}

#[test]
fn tolerances_override_thresholds() {
    let scenario = builtin(builtins::GROWING_METRIC_2D);
    let strict = scenario
        .with_tolerances(Tolerances {
            corrected_analytic: 1e-9,
            ..Tolerances::default()
        })
        .unwrap();
    let report = verify::run(&strict).unwrap();
    let v = report.verdict(Check::CorrectedGeneratorOk).unwrap();
    assert!(!v.passed);
    assert_eq!(v.threshold, 1e-9);
}

#[test]
fn verdict_display() {
    let report = verify::run(
        &builtin(builtins::CONSTANT_METRIC_2D)
            .with_steps(100)
            .unwrap(),
    )
    .unwrap();
    let line = report.verdict(Check::NormConserved).unwrap().to_string();
    assert!(line.starts_with("PASS NORM_CONSERVED: observed "), "{line}");
    assert!(line.ends_with("<= 1.0e-8"), "{line}");
}

#[test]
fn refinement_never_breaks_a_passing_verdict() {
    let monotone = [
        Check::NormConserved,
        Check::MetricReconstructed,
        Check::QhHolds,
        Check::CorrectedGeneratorOk,
    ];
    for name in Registry::builtin().names() {
        let base = builtin(name);
        let mut previous = None;
        for n in [250, 500, 1000, 2000, 4000] {
            let report = verify::run(&base.with_steps(n).unwrap()).unwrap();
            let now: Vec<bool> = monotone.iter().map(|&c| passed(&report, c)).collect();
            if let Some(before) = previous.replace(now.clone()) {
                for ((check, was), is) in monotone.iter().zip(before).zip(now) {
                    assert!(!was || is, "{name}: {check} flipped to fail at N={n}");
                }
            }
        }
    }
}

#[test]
fn naive_residual_is_resolution_independent() {
    let at_end = |n: usize| {
        let rows =
            verify::run_diagnostics(&builtin(builtins::GROWING_METRIC_2D).with_steps(n).unwrap())
                .unwrap();
        rows.last().unwrap().res_naive
    };
    assert!((at_end(2000) - at_end(4000)).abs() <= 1e-3);
}

#[test]
fn diagnostics_are_bit_identical() {
    let scenario = builtin(builtins::GROWING_METRIC_2D);
    let a = verify::run_diagnostics(&scenario).unwrap();
    let b = verify::run_diagnostics(&scenario).unwrap();
    assert_eq!(a, b);
    let threaded: Vec<Vec<DiagnosticsRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| s.spawn(|| verify::run_diagnostics(&scenario).unwrap()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for rows in threaded {
        assert_eq!(rows, a);
    }
}

#[test]
fn convergence_orders() {
    let scenario = builtin(builtins::GROWING_METRIC_2D)
        .with_steps(250)
        .unwrap();
    let u = verify::convergence_order(&scenario, Probe::U).unwrap();
    assert!((3.7..=4.3).contains(&u), "{u}");
    let fd = verify::convergence_order(
        &scenario,
        Probe::UrCorrected {
            finite_difference: true,
        },
    )
    .unwrap();
    assert!((1.7..=2.3).contains(&fd), "{fd}");
    let analytic = verify::convergence_order(
        &scenario,
        Probe::UrCorrected {
            finite_difference: false,
        },
    )
    .unwrap();
    assert!((3.7..=4.3).contains(&analytic), "{analytic}");
}

#[test]
fn convergence_against_reference_run() {
    // Constant metric but a sampled, time-dependent h: no closed form.
    let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.2).collect();
    let snapshots: Vec<ComplexMatrix> = times
        .iter()
        .map(|&t| ComplexMatrix::from_real(2, &[t, 1.0, 1.0, -t]).unwrap())
        .collect();
    let h = OperatorSchedule::sampled(&times, snapshots).unwrap();
    let scenario = Scenario::new(
        TimeGrid::new(0.0, 1.0, 100).unwrap(),
        1.0,
        Model::Pair {
            h,
            theta: OperatorSchedule::constant(
                ComplexMatrix::from_real(2, &[2.0, 1.0, 1.0, 2.0]).unwrap(),
            ),
        },
        nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        Tolerances::default(),
    )
    .unwrap();
    let order = verify::convergence_order(&scenario, Probe::U).unwrap();
    assert!((3.5..=4.5).contains(&order), "{order}");
}

#[test]
fn zero_generator_is_not_measurable() {
    let scenario = Scenario::new(
        TimeGrid::new(0.0, 1.0, 50).unwrap(),
        1.0,
        Model::Pair {
            h: OperatorSchedule::constant(ComplexMatrix::zeros(2)),
            theta: OperatorSchedule::constant(ComplexMatrix::identity(2)),
        },
        nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        Tolerances::default(),
    )
    .unwrap();
    assert!(matches!(
        verify::convergence_order(&scenario, Probe::U),
        Err(Error::NotMeasurable(_))
    ));
}
