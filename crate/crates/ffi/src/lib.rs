//! C ABI over `quasiherm`.
//!
//! Scenarios and reports are opaque handles released with their `_free`
//! function. Every fallible call returns a [`QhStatus`]; on failure
//! [`qh_last_error_message`] describes the error for the calling thread.
//! Matrices cross the boundary as row-major arrays of interleaved
//! `(re, im)` doubles, `2 * n * n` values for an `n x n` matrix.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::OnceLock;

use quasiherm::cli;
use quasiherm::dynamics::{Registry, Scenario};
use quasiherm::matcore::{self, ComplexMatrix, C64};
use quasiherm::spaces::{self, SpaceTaggedVector};
use quasiherm::verify::{self, Bound, Check, Report};
use quasiherm::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhCheck {
    NormConserved = 0,
    MetricReconstructed = 1,
    QhHolds = 2,
    CorrectedGeneratorOk = 3,
    NaiveFailsIffMetricMoves = 4,
}

/// One interior grid node of a diagnostics run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QhDiagnosticsRow {
    pub t: f64,
    pub unitarity_defect: f64,
    pub norm_phys: f64,
    pub res_naive: f64,
    pub res_corrected: f64,
    pub res_metric: f64,
    pub res_qh: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QhVerdict {
    pub check: QhCheck,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    /// `observed >= threshold` is required when set, `<=` otherwise.
    pub at_least: bool,
}

/// Opaque scenario handle.
pub struct QhScenario(Scenario);

/// Opaque report handle.
pub struct QhReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> QhStatus {
    match e.root() {
        Error::Parse { .. } => QhStatus::Parse,
        Error::NonFinite | Error::NotMeasurable(_) | Error::OracleUnavailable(_) => {
            QhStatus::Numerical
        }
        Error::InvalidGrid(_) | Error::InvalidSchedule(_) | Error::OutOfRange { .. } => {
            QhStatus::InvalidArgument
        }
        _ => QhStatus::Validation,
    }
}

/// Runs `f`, recording the error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), QhStatus>) -> QhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QhStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            QhStatus::Panic
        }
    }
}

fn fail(e: Error) -> QhStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> QhStatus {
    set_error(format!("{what} is null"));
    QhStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, QhStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        QhStatus::InvalidArgument
    })
}

unsafe fn read_matrix(n: usize, data: *const f64, what: &str) -> Result<ComplexMatrix, QhStatus> {
    if data.is_null() {
        return Err(null(what));
    }
    let raw = slice::from_raw_parts(data, 2 * n * n);
    let entries: Vec<C64> = raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    ComplexMatrix::from_row_major(n, &entries).map_err(fail)
}

unsafe fn read_vector(n: usize, data: *const f64, what: &str) -> Result<Vec<C64>, QhStatus> {
    if data.is_null() {
        return Err(null(what));
    }
    let raw = slice::from_raw_parts(data, 2 * n);
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

unsafe fn write_matrix(m: &ComplexMatrix, out: *mut f64) {
    let n = m.dim();
    let dst = slice::from_raw_parts_mut(out, 2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            dst[2 * (i * n + j)] = z.re;
            dst[2 * (i * n + j) + 1] = z.im;
        }
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::builtin)
}

fn builtin_names() -> &'static [CString] {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    NAMES.get_or_init(|| {
        registry()
            .names()
            .into_iter()
            .map(|n| CString::new(n).unwrap())
            .collect()
    })
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn qh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn qh_builtin_count() -> usize {
    builtin_names().len()
}

/// Name of builtin `index` (sorted), or null when out of range. The string
/// is static.
#[no_mangle]
pub extern "C" fn qh_builtin_name(index: usize) -> *const c_char {
    builtin_names()
        .get(index)
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_builtin(
    name: *const c_char,
    out: *mut *mut QhScenario,
) -> QhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = read_str(name, "name")?;
        let Some(entry) = registry().lookup(name) else {
            set_error(format!(
                "unknown builtin '{name}'; available: {}",
                registry().names().join(", ")
            ));
            return Err(QhStatus::InvalidArgument);
        };
        let scenario = entry.scenario().map_err(fail)?;
        *out = Box::into_raw(Box::new(QhScenario(scenario)));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_from_json(
    json: *const c_char,
    out: *mut *mut QhScenario,
) -> QhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        let scenario = cli::parse_scenario(text, registry()).map_err(fail)?;
        *out = Box::into_raw(Box::new(QhScenario(scenario)));
        Ok(())
    })
}

/// Fully explicit JSON for the scenario; free with [`qh_string_free`].
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_to_json(
    scenario: *const QhScenario,
    out: *mut *mut c_char,
) -> QhStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = cli::serialize_scenario(&s.0).map_err(fail)?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_set_steps(
    scenario: *mut QhScenario,
    steps: usize,
) -> QhStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.0 = s.0.with_steps(steps).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_set_hbar(scenario: *mut QhScenario, hbar: f64) -> QhStatus {
    guard(|| {
        let s = scenario.as_mut().ok_or_else(|| null("scenario"))?;
        s.0 = s.0.with_hbar(hbar).map_err(fail)?;
        Ok(())
    })
}

/// Hilbert-space dimension, 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_dim(scenario: *const QhScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qh_scenario_free(scenario: *mut QhScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Evolves the scenario and evaluates the verdicts.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_run(scenario: *const QhScenario, out: *mut *mut QhReport) -> QhStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = verify::run(&s.0).map_err(fail)?;
        *out = Box::into_raw(Box::new(QhReport(report)));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_report_row_count(report: *const QhReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_report_row(
    report: *const QhReport,
    index: usize,
    out: *mut QhDiagnosticsRow,
) -> QhStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let Some(row) = r.0.rows.get(index) else {
            set_error(format!(
                "row {index} out of range ({} rows)",
                r.0.rows.len()
            ));
            return Err(QhStatus::InvalidArgument);
        };
        *out = QhDiagnosticsRow {
            t: row.t,
            unitarity_defect: row.unitarity_defect,
            norm_phys: row.norm_phys,
            res_naive: row.res_naive,
            res_corrected: row.res_corrected,
            res_metric: row.res_metric,
            res_qh: row.res_qh,
        };
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_report_verdict_count(report: *const QhReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.verdicts.len())
}

/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_report_verdict(
    report: *const QhReport,
    index: usize,
    out: *mut QhVerdict,
) -> QhStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let Some(v) = r.0.verdicts.get(index) else {
            set_error(format!(
                "verdict {index} out of range ({} verdicts)",
                r.0.verdicts.len()
            ));
            return Err(QhStatus::InvalidArgument);
        };
        *out = QhVerdict {
            check: match v.check {
                Check::NormConserved => QhCheck::NormConserved,
                Check::MetricReconstructed => QhCheck::MetricReconstructed,
                Check::QhHolds => QhCheck::QhHolds,
                Check::CorrectedGeneratorOk => QhCheck::CorrectedGeneratorOk,
                Check::NaiveFailsIffMetricMoves => QhCheck::NaiveFailsIffMetricMoves,
            },
            passed: v.passed,
            observed: v.observed,
            threshold: v.threshold,
            at_least: v.bound == Bound::AtLeast,
        };
        Ok(())
    })
}

/// Name of a check as printed in reports; static.
#[no_mangle]
pub extern "C" fn qh_check_name(check: QhCheck) -> *const c_char {
    let name: &'static CStr = match check {
        QhCheck::NormConserved => c"NORM_CONSERVED",
        QhCheck::MetricReconstructed => c"METRIC_RECONSTRUCTED",
        QhCheck::QhHolds => c"QH_HOLDS",
        QhCheck::CorrectedGeneratorOk => c"CORRECTED_GENERATOR_OK",
        QhCheck::NaiveFailsIffMetricMoves => c"NAIVE_FAILS_IFF_METRIC_MOVES",
    };
    name.as_ptr()
}

/// False for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_report_all_passed(report: *const QhReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.all_passed())
}

/// Diagnostics as CSV; free with [`qh_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qh_report_csv(report: *const QhReport, out: *mut *mut c_char) -> QhStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(cli::csv_string(&r.0.rows));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qh_report_free(report: *mut QhReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Principal square root of a Hermitian positive-definite matrix.
///
/// # Safety
/// `theta` and `out` must each hold `2 * n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qh_principal_sqrt(n: usize, theta: *const f64, out: *mut f64) -> QhStatus {
    guard(|| {
        let theta = read_matrix(n, theta, "theta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let root = matcore::principal_sqrt(&theta).map_err(fail)?;
        write_matrix(&root, out);
        Ok(())
    })
}

/// Relative residual `|Theta H - H^dagger Theta| / |Theta H|`.
///
/// # Safety
/// `h` and `theta` must each hold `2 * n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qh_quasi_hermiticity_residual(
    n: usize,
    h: *const f64,
    theta: *const f64,
    out: *mut f64,
) -> QhStatus {
    guard(|| {
        let h = read_matrix(n, h, "h")?;
        let theta = read_matrix(n, theta, "theta")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let metric = spaces::metric_from_theta(&theta).map_err(fail)?;
        *out = spaces::quasi_hermiticity_residual(&h, &metric).map_err(fail)?;
        Ok(())
    })
}

/// Physical inner product `phi^dagger Theta psi` of reference-space kets;
/// writes `(re, im)`.
///
/// # Safety
/// `theta` must hold `2 * n * n` doubles, `phi` and `psi` `2 * n` doubles,
/// and `out` two doubles.
#[no_mangle]
pub unsafe extern "C" fn qh_inner_physical(
    n: usize,
    theta: *const f64,
    phi: *const f64,
    psi: *const f64,
    out: *mut f64,
) -> QhStatus {
    guard(|| {
        let theta = read_matrix(n, theta, "theta")?;
        let phi = read_vector(n, phi, "phi")?;
        let psi = read_vector(n, psi, "psi")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let metric = spaces::metric_from_theta(&theta).map_err(fail)?;
        let phi = SpaceTaggedVector::reference(&phi).map_err(fail)?;
        let psi = SpaceTaggedVector::reference(&psi).map_err(fail)?;
        let z = spaces::inner_physical(&phi, &psi, &metric).map_err(fail)?;
        *out = z.re;
        *out.add(1) = z.im;
        Ok(())
    })
}
