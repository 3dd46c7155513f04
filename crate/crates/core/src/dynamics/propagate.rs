//! Fixed-step RK4 propagators and the quantities derived from them.
//!
//! No re-unitarization or step control is applied anywhere: defects are left
//! in the series so that diagnostics can measure them.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matcore::{self, hermiticity_defect, ComplexMatrix, Gates, C64};

use super::omega::OmegaSchedule;
use super::schedule::{OperatorSchedule, TimeGrid};

/// Anything that yields an operator at a given time.
pub trait TimeOperator {
    fn at(&self, t: f64) -> Result<ComplexMatrix>;
}

impl TimeOperator for OperatorSchedule {
    fn at(&self, t: f64) -> Result<ComplexMatrix> {
        self.eval(t)
    }
}

impl<F> TimeOperator for F
where
    F: Fn(f64) -> Result<ComplexMatrix>,
{
    fn at(&self, t: f64) -> Result<ComplexMatrix> {
        self(t)
    }
}

/// Integrates `i hbar dY/dt = G(t) Y`, `Y(t_start) = I`, returning `Y` at
/// every grid node. `G` is sampled at `t`, `t + delta/2` and `t + delta`.
pub fn rk4_propagator(
    generator: &impl TimeOperator,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<Vec<ComplexMatrix>> {
    let factor = C64::new(0.0, -1.0 / hbar);
    let delta = grid.spacing();
    let half = 0.5 * delta;
    let eval = |t: f64| -> Result<ComplexMatrix> {
        let g = generator.at(t).map_err(|e| e.at(t))?;
        Ok(g.scale(factor))
    };

    let mut a_now = eval(grid.start())?;
    let mut y = ComplexMatrix::identity(a_now.dim());
    let mut out = Vec::with_capacity(grid.steps() + 1);
    out.push(y.clone());
    for k in 0..grid.steps() {
        let t = grid.node(k);
        let a_mid = eval(t + half)?;
        let a_next = eval(grid.node(k + 1))?;
        let k1 = a_now.try_mul(&y)?;
        let k2 = a_mid.try_mul(&(&y + &k1.scale_real(half)))?;
        let k3 = a_mid.try_mul(&(&y + &k2.scale_real(half)))?;
        let k4 = a_next.try_mul(&(&y + &k3.scale_real(delta)))?;
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_real(2.0);
        y = &y + &incr.scale_real(delta / 6.0);
        if !y.is_finite() {
            return Err(Error::NonFinite.at(grid.node(k + 1)));
        }
        out.push(y.clone());
        a_now = a_next;
    }
    Ok(out)
}

/// Propagator `u(t)` of the Hermitian Hamiltonian, `i hbar du/dt = h u`.
///
/// Every stage evaluation of `h` must pass the Hermiticity gate.
pub fn integrate_u(
    h: &impl TimeOperator,
    grid: &TimeGrid,
    hbar: f64,
    gates: &Gates,
) -> Result<Vec<ComplexMatrix>> {
    let checked = |t: f64| -> Result<ComplexMatrix> {
        let value = h.at(t)?;
        let defect = hermiticity_defect(&value);
        if defect > gates.herm {
            return Err(Error::NotHermitian { defect });
        }
        Ok(value)
    };
    rk4_propagator(&checked, grid, hbar)
}

/// `U_R(t_k) = omega(t_k)^-1 u(t_k) omega(t_0)`, with `U_R(t_0) = I` exactly.
pub fn ur_from_definition(
    u_series: &[ComplexMatrix],
    omega: &OmegaSchedule,
    grid: &TimeGrid,
) -> Result<Vec<ComplexMatrix>> {
    check_series_len(u_series, grid)?;
    let omega0 = omega.omega(grid.start())?;
    u_series
        .iter()
        .enumerate()
        .map(|(k, u)| {
            if k == 0 {
                return Ok(ComplexMatrix::identity(u.dim()));
            }
            let t = grid.node(k);
            let w = omega.omega(t)?;
            let w_inv = matcore::inverse(&w).map_err(|e| e.at(t))?;
            Ok(&(&w_inv * u) * &omega0)
        })
        .collect()
}

/// Integrates `i hbar dU/dt = H(t) U`, the relation that only holds for a
/// time-independent metric.
pub fn ur_from_naive_generator(
    hamiltonian: &impl TimeOperator,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<Vec<ComplexMatrix>> {
    rk4_propagator(hamiltonian, grid, hbar)
}

/// `G(t) = H(t) - i hbar omega(t)^-1 d(omega)/dt`.
pub fn corrected_generator(
    hamiltonian: &impl TimeOperator,
    omega: &OmegaSchedule,
    hbar: f64,
    t: f64,
) -> Result<ComplexMatrix> {
    let h = hamiltonian.at(t)?;
    let log_dot = omega.point(t)?.log_derivative();
    h.try_sub(&log_dot.scale(C64::new(0.0, hbar)))
}

/// Integrates `i hbar dU/dt = G(t) U` with the corrected generator.
pub fn ur_from_corrected_generator(
    hamiltonian: &impl TimeOperator,
    omega: &OmegaSchedule,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<Vec<ComplexMatrix>> {
    let generator = |t: f64| corrected_generator(hamiltonian, omega, hbar, t);
    rk4_propagator(&generator, grid, hbar)
}

/// `Theta_rec(t_k) = (U_R^-1)^H Theta(t_0) U_R^-1`.
pub fn metric_from_ur(
    ur_series: &[ComplexMatrix],
    theta0: &ComplexMatrix,
    grid: &TimeGrid,
) -> Result<Vec<ComplexMatrix>> {
    check_series_len(ur_series, grid)?;
    ur_series
        .iter()
        .enumerate()
        .map(|(k, ur)| {
            let t = grid.node(k);
            let inv = matcore::inverse(ur).map_err(|e| e.at(t))?;
            Ok(&(&inv.adjoint() * theta0) * &inv)
        })
        .collect()
}

/// `|Phi(t_k)> = U_R(t_k) |Phi(0)>` together with `<Phi|Theta(t_k)|Phi>`.
#[derive(Debug, Clone)]
pub struct StateEvolution {
    pub states: Vec<DVector<C64>>,
    pub norm_phys: Vec<f64>,
}

pub fn propagate_state(
    ur_series: &[ComplexMatrix],
    thetas: &[ComplexMatrix],
    phi0: &DVector<C64>,
) -> Result<StateEvolution> {
    if ur_series.len() != thetas.len() {
        return Err(Error::DimensionMismatch {
            expected: ur_series.len(),
            found: thetas.len(),
        });
    }
    let mut states = Vec::with_capacity(ur_series.len());
    let mut norm_phys = Vec::with_capacity(ur_series.len());
    for (ur, theta) in ur_series.iter().zip(thetas) {
        if ur.dim() != phi0.len() {
            return Err(Error::DimensionMismatch {
                expected: ur.dim(),
                found: phi0.len(),
            });
        }
        let phi = ur.apply(phi0);
        norm_phys.push(phi.dotc(&theta.apply(&phi)).re);
        states.push(phi);
    }
    Ok(StateEvolution { states, norm_phys })
}

fn check_series_len(series: &[ComplexMatrix], grid: &TimeGrid) -> Result<()> {
    if series.len() != grid.steps() + 1 {
        return Err(Error::DimensionMismatch {
            expected: grid.steps() + 1,
            found: series.len(),
        });
    }
    Ok(())
}
