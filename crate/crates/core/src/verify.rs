//! Residual diagnostics, pass/fail verdicts and integrator convergence order.

use std::fmt;

use crate::dynamics::{
    integrate_u, ur_from_corrected_generator, EvolutionResult, OmegaDerivative, Scenario,
    Tolerances,
};
use crate::error::{Error, Result};
use crate::matcore::{self, fro_norm, ComplexMatrix, C64};
use crate::spaces::quasi_hermiticity_residual_theta;

/// Diagnostics at one interior grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// `||u^H u - I||_F`.
    pub unitarity_defect: f64,
    /// `<Phi(t)|Theta(t)|Phi(t)>`.
    pub norm_phys: f64,
    /// Pointwise residual of `i hbar dU_R/dt = H U_R`.
    pub res_naive: f64,
    /// Pointwise residual of `i hbar dU_R/dt = (H - i hbar omega^-1 omega_dot) U_R`.
    pub res_corrected: f64,
    /// `||Theta_rec - Theta||_F / ||Theta||_F`.
    pub res_metric: f64,
    /// Quasi-Hermiticity residual of `H(t)` against `Theta(t)`.
    pub res_qh: f64,
}

/// One row per interior node `t_1 .. t_{N-1}`. The time derivative of the
/// definition-based `U_R` is taken as a central difference over the grid.
pub fn diagnostics(result: &EvolutionResult) -> Result<Vec<DiagnosticsRow>> {
    let grid = &result.grid;
    let n = grid.steps();
    let ihbar = C64::new(0.0, result.hbar);
    let inv2d = 1.0 / (2.0 * grid.spacing());
    let mut rows = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let ur = &result.ur_series[k];
        let u = &result.u_series[k];
        let dim = u.dim();
        let du = (&result.ur_series[k + 1] - &result.ur_series[k - 1]).scale_real(inv2d);
        let lhs = du.scale(ihbar);
        let h_ur = &result.hamiltonian[k] * ur;
        let drift = (&result.log_derivative[k] * ur).scale(ihbar);
        let naive = &lhs - &h_ur;
        let corrected = &naive + &drift;
        let theta = &result.theta[k];
        rows.push(DiagnosticsRow {
            t: grid.node(k),
            unitarity_defect: fro_norm(&(&(&u.adjoint() * u) - &ComplexMatrix::identity(dim))),
            norm_phys: result.norm_phys[k],
            res_naive: fro_norm(&naive),
            res_corrected: fro_norm(&corrected),
            res_metric: fro_norm(&(&result.theta_recon[k] - theta)) / fro_norm(theta),
            res_qh: quasi_hermiticity_residual_theta(&result.hamiltonian[k], theta)?,
        });
    }
    Ok(rows)
}

pub fn run_diagnostics(scenario: &Scenario) -> Result<Vec<DiagnosticsRow>> {
    diagnostics(&scenario.evolve()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    NormConserved,
    MetricReconstructed,
    QhHolds,
    CorrectedGeneratorOk,
    NaiveFailsIffMetricMoves,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::NormConserved,
        Check::MetricReconstructed,
        Check::QhHolds,
        Check::CorrectedGeneratorOk,
        Check::NaiveFailsIffMetricMoves,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::NormConserved => "NORM_CONSERVED",
            Check::MetricReconstructed => "METRIC_RECONSTRUCTED",
            Check::QhHolds => "QH_HOLDS",
            Check::CorrectedGeneratorOk => "CORRECTED_GENERATOR_OK",
            Check::NaiveFailsIffMetricMoves => "NAIVE_FAILS_IFF_METRIC_MOVES",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Direction of a threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    /// Must-fail checks: the observed value has to reach the threshold.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub check: Check,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl Verdict {
    fn new(check: Check, observed: f64, threshold: f64, bound: Bound) -> Verdict {
        let passed = match bound {
            Bound::AtMost => observed <= threshold,
            Bound::AtLeast => observed >= threshold,
        };
        Verdict {
            check,
            passed,
            observed,
            threshold,
            bound,
        }
    }

    pub fn name(&self) -> &'static str {
        self.check.name()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{} {}: observed {:.6e} {} {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.observed,
            op,
            self.threshold
        )
    }
}

/// Scenario facts the verdicts need beyond the rows.
struct Context {
    norm0: f64,
    metric_motion: f64,
    mode: OmegaDerivative,
}

fn max_of(rows: &[DiagnosticsRow], f: impl Fn(&DiagnosticsRow) -> f64) -> f64 {
    // NaN must surface as a failure, so it wins over any finite value.
    rows.iter().map(f).fold(0.0, |acc, x| {
        if x.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

fn judge(rows: &[DiagnosticsRow], ctx: &Context, tol: &Tolerances) -> Result<Vec<Verdict>> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let drift = if ctx.norm0 > 0.0 {
        max_of(rows, |r| (r.norm_phys / ctx.norm0 - 1.0).abs())
    } else {
        max_of(rows, |r| r.norm_phys.abs())
    };
    let corrected_threshold = match ctx.mode {
        OmegaDerivative::Analytic => tol.corrected_analytic,
        OmegaDerivative::FiniteDifference => tol.corrected_fd,
    };
    let naive = max_of(rows, |r| r.res_naive);
    let naive_verdict = if ctx.metric_motion >= tol.metric_motion {
        Verdict::new(
            Check::NaiveFailsIffMetricMoves,
            naive,
            tol.naive_fail,
            Bound::AtLeast,
        )
    } else {
        Verdict::new(
            Check::NaiveFailsIffMetricMoves,
            naive,
            tol.naive_hold,
            Bound::AtMost,
        )
    };
    Ok(vec![
        Verdict::new(Check::NormConserved, drift, tol.norm_drift, Bound::AtMost),
        Verdict::new(
            Check::MetricReconstructed,
            max_of(rows, |r| r.res_metric),
            tol.metric,
            Bound::AtMost,
        ),
        Verdict::new(
            Check::QhHolds,
            max_of(rows, |r| r.res_qh),
            tol.qh,
            Bound::AtMost,
        ),
        Verdict::new(
            Check::CorrectedGeneratorOk,
            max_of(rows, |r| r.res_corrected),
            corrected_threshold,
            Bound::AtMost,
        ),
        naive_verdict,
    ])
}

fn initial_norm(scenario: &Scenario, theta0: &ComplexMatrix) -> f64 {
    let phi = scenario.initial_components();
    phi.dotc(&theta0.apply(phi)).re
}

/// The fixed verdict set for diagnostics of `scenario`.
pub fn verdicts(rows: &[DiagnosticsRow], scenario: &Scenario) -> Result<Vec<Verdict>> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let omega = scenario.omega_schedule()?;
    let theta0 = omega.theta(scenario.grid().start())?;
    let mut motion: f64 = 0.0;
    for r in rows {
        motion = motion.max(fro_norm(&omega.omega_dot(r.t)?));
    }
    let ctx = Context {
        norm0: initial_norm(scenario, &theta0),
        metric_motion: motion,
        mode: omega.mode(),
    };
    judge(rows, &ctx, scenario.tolerances())
}

/// Diagnostics and verdicts of one run.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<DiagnosticsRow>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, check: Check) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check == check)
    }
}

pub fn run(scenario: &Scenario) -> Result<Report> {
    report_from(scenario, &scenario.evolve()?)
}

pub fn report_from(scenario: &Scenario, result: &EvolutionResult) -> Result<Report> {
    let rows = diagnostics(result)?;
    let n = result.grid.steps();
    let motion = result.omega_dot_norm[1..n]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let ctx = Context {
        norm0: initial_norm(scenario, &result.theta[0]),
        metric_motion: motion,
        mode: result.derivative_mode,
    };
    let verdicts = judge(&rows, &ctx, scenario.tolerances())?;
    Ok(Report { rows, verdicts })
}

/// Quantity whose end-time error is measured by [`convergence_order`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// The Hermitian propagator `u`.
    U,
    /// `U_R` from the corrected generator; `finite_difference` forces a
    /// differenced `omega_dot` even when a closed form exists.
    UrCorrected { finite_difference: bool },
}

/// Refuses reference runs longer than this many steps.
pub const MAX_REFERENCE_STEPS: usize = 1 << 22;

fn exact_u_end(scenario: &Scenario) -> Result<ComplexMatrix> {
    let grid = scenario.grid();
    let omega = scenario.omega_schedule()?;
    if scenario.has_constant_hermitian() {
        let h = scenario.hermitian_at(&omega, grid.start())?;
        let eig = matcore::eig_hermitian_gated(&h, &scenario.gates())?;
        let phase = (grid.end() - grid.start()) / scenario.hbar();
        return Ok(eig.map_spectrum(|lambda| C64::new(0.0, -lambda * phase).exp()));
    }
    let steps = grid
        .steps()
        .checked_mul(8)
        .filter(|&s| s <= MAX_REFERENCE_STEPS);
    let Some(steps) = steps else {
        return Err(Error::OracleUnavailable(format!(
            "reference run would need more than {MAX_REFERENCE_STEPS} steps"
        )));
    };
    let reference = scenario.with_steps(steps)?;
    let omega = reference.omega_schedule()?;
    let hermitian = |t: f64| reference.hermitian_at(&omega, t);
    let u = integrate_u(
        &hermitian,
        reference.grid(),
        reference.hbar(),
        &reference.gates(),
    )?;
    Ok(u.last().expect("non-empty series").clone())
}

fn oracle_end(scenario: &Scenario, probe: Probe) -> Result<ComplexMatrix> {
    let u = exact_u_end(scenario)?;
    match probe {
        Probe::U => Ok(u),
        Probe::UrCorrected { .. } => {
            let grid = scenario.grid();
            let omega = scenario.omega_schedule()?;
            let w_end_inv = matcore::inverse(&omega.omega(grid.end())?)?;
            Ok(&(&w_end_inv * &u) * &omega.omega(grid.start())?)
        }
    }
}

fn probe_end(scenario: &Scenario, probe: Probe) -> Result<ComplexMatrix> {
    let grid = scenario.grid();
    let omega = scenario.omega_schedule()?;
    let series = match probe {
        Probe::U => {
            let hermitian = |t: f64| scenario.hermitian_at(&omega, t);
            integrate_u(&hermitian, grid, scenario.hbar(), &scenario.gates())?
        }
        Probe::UrCorrected { finite_difference } => {
            let omega = if finite_difference {
                omega.with_finite_difference()
            } else {
                omega
            };
            let hamiltonian = |t: f64| scenario.hamiltonian_at(&omega, t);
            ur_from_corrected_generator(&hamiltonian, &omega, grid, scenario.hbar())?
        }
    };
    Ok(series.last().expect("non-empty series").clone())
}

/// `log2(err_N / err_2N)` of the end-time Frobenius error, with `N` the
/// scenario's step count.
///
/// The oracle is the closed-form exponential when `h` is constant, otherwise a
/// run at eight times the resolution.
pub fn convergence_order(scenario: &Scenario, probe: Probe) -> Result<f64> {
    let oracle = oracle_end(scenario, probe)?;
    let fine = scenario.with_steps(2 * scenario.grid().steps())?;
    let err_coarse = fro_norm(&(&probe_end(scenario, probe)? - &oracle));
    let err_fine = fro_norm(&(&probe_end(&fine, probe)? - &oracle));
    if !(err_coarse > 0.0 && err_fine > 0.0) || !err_coarse.is_finite() {
        return Err(Error::NotMeasurable(format!(
            "errors {err_coarse:e} and {err_fine:e} do not define an order"
        )));
    }
    Ok((err_coarse / err_fine).log2())
}
