use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, Gates};

use super::schedule::{finite_difference, OperatorSchedule, TimeGrid};

/// How the time derivative of `omega(t)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaDerivative {
    Analytic,
    FiniteDifference,
}

/// Metric data at one instant.
#[derive(Debug, Clone)]
pub struct OmegaPoint {
    pub theta: ComplexMatrix,
    pub omega: ComplexMatrix,
    pub omega_inv: ComplexMatrix,
    pub omega_dot: ComplexMatrix,
}

impl OmegaPoint {
    /// `omega^-1 * d(omega)/dt`, the term separating the two generators.
    pub fn log_derivative(&self) -> ComplexMatrix {
        &self.omega_inv * &self.omega_dot
    }
}

/// `omega(t) = sqrt(Theta(t))` derived from a metric schedule.
///
/// `omega_dot` comes from the schedule's closed form when it provides one,
/// otherwise from a second-order difference of `omega` whose step is the
/// grid spacing.
#[derive(Debug, Clone)]
pub struct OmegaSchedule {
    theta: OperatorSchedule,
    gates: Gates,
    start: f64,
    end: f64,
    step: f64,
    mode: OmegaDerivative,
}

impl OmegaSchedule {
    /// Checks positivity at every grid node and reports the first failure.
    pub fn new(theta: &OperatorSchedule, grid: &TimeGrid, gates: Gates) -> Result<OmegaSchedule> {
        if !theta.covers(grid.start(), grid.end()) {
            let (start, end) = theta.span();
            return Err(Error::OutOfRange {
                t: if start > grid.start() {
                    grid.start()
                } else {
                    grid.end()
                },
                start,
                end,
            });
        }
        for t in grid.nodes() {
            let value = theta.eval(t).map_err(|e| e.at(t))?;
            let eig = matcore::eig_hermitian_gated(&value, &gates).map_err(|e| e.at(t))?;
            matcore::check_positive_definite(&eig, &gates).map_err(|e| e.at(t))?;
        }
        let mode = if theta.has_analytic_root_derivative() {
            OmegaDerivative::Analytic
        } else {
            OmegaDerivative::FiniteDifference
        };
        Ok(OmegaSchedule {
            theta: theta.clone(),
            gates,
            start: grid.start(),
            end: grid.end(),
            step: grid.spacing(),
            mode,
        })
    }

    /// Ignores any analytic root derivative.
    pub fn with_finite_difference(mut self) -> OmegaSchedule {
        self.mode = OmegaDerivative::FiniteDifference;
        self
    }

    pub fn mode(&self) -> OmegaDerivative {
        self.mode
    }

    pub fn theta_schedule(&self) -> &OperatorSchedule {
        &self.theta
    }

    pub fn theta(&self, t: f64) -> Result<ComplexMatrix> {
        self.theta.eval(t).map_err(|e| e.at(t))
    }

    pub fn omega(&self, t: f64) -> Result<ComplexMatrix> {
        let theta = self.theta(t)?;
        matcore::principal_sqrt_gated(&theta, &self.gates).map_err(|e| e.at(t))
    }

    pub fn omega_dot(&self, t: f64) -> Result<ComplexMatrix> {
        if self.mode == OmegaDerivative::Analytic {
            if let Some(d) = self.theta.analytic_root_derivative(t) {
                return d.map_err(|e| e.at(t));
            }
        }
        finite_difference(|x| self.omega(x), t, self.step, self.start, self.end)
    }

    pub fn point(&self, t: f64) -> Result<OmegaPoint> {
        let theta = self.theta(t)?;
        let omega = matcore::principal_sqrt_gated(&theta, &self.gates).map_err(|e| e.at(t))?;
        let omega_inv = matcore::inverse_gated(&omega, &self.gates).map_err(|e| e.at(t))?;
        let omega_dot = self.omega_dot(t)?;
        Ok(OmegaPoint {
            theta,
            omega,
            omega_inv,
            omega_dot,
        })
    }
}
