use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, fro_norm, ComplexMatrix, Gates, C64};
use crate::spaces::{quasi_hermiticity_residual_theta, Space, SpaceTaggedVector};

use super::omega::{OmegaDerivative, OmegaSchedule};
use super::propagate::{
    integrate_u, metric_from_ur, propagate_state, ur_from_corrected_generator, ur_from_definition,
    ur_from_naive_generator,
};
use super::schedule::{OperatorSchedule, TimeGrid};

/// Numerical gates and verdict thresholds. Every field may be overridden from
/// a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative Hermiticity gate.
    pub herm: f64,
    /// Relative positivity gate on `lambda_min / lambda_max`.
    pub pos: f64,
    /// Largest accepted condition number.
    pub kappa_max: f64,
    /// Quasi-Hermiticity residual above which a direct-mode `H` is rejected.
    pub res: f64,
    pub norm_drift: f64,
    pub metric: f64,
    pub qh: f64,
    /// Corrected-generator residual bound when `omega_dot` is differenced.
    pub corrected_fd: f64,
    /// Corrected-generator residual bound when `omega_dot` is analytic.
    pub corrected_analytic: f64,
    /// Naive residual must reach this when the metric moves.
    pub naive_fail: f64,
    /// Naive residual must stay below this when the metric is frozen.
    pub naive_hold: f64,
    /// `max ||omega_dot||_F` at or above which the metric counts as moving.
    pub metric_motion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: matcore::EPS_HERM,
            pos: matcore::EPS_POS,
            kappa_max: matcore::KAPPA_MAX,
            res: 1e-8,
            norm_drift: 1e-8,
            metric: 1e-6,
            qh: 1e-8,
            corrected_fd: 1e-4,
            corrected_analytic: 1e-6,
            naive_fail: 0.01,
            naive_hold: 1e-6,
            metric_motion: 0.01,
        }
    }
}

impl Tolerances {
    pub fn gates(&self) -> Gates {
        Gates {
            herm: self.herm,
            pos: self.pos,
            kappa_max: self.kappa_max,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    /// Hermitian `h(t)` and metric; `H = omega^-1 h omega` is derived.
    Pair {
        h: OperatorSchedule,
        theta: OperatorSchedule,
    },
    /// Quasi-Hermitian `H(t)` and metric; `h = omega H omega^-1` is derived.
    Direct {
        hamiltonian: OperatorSchedule,
        theta: OperatorSchedule,
    },
}

impl Model {
    pub fn theta(&self) -> &OperatorSchedule {
        match self {
            Model::Pair { theta, .. } | Model::Direct { theta, .. } => theta,
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, Model::Pair { .. })
    }

    fn operator(&self) -> &OperatorSchedule {
        match self {
            Model::Pair { h, .. } => h,
            Model::Direct { hamiltonian, .. } => hamiltonian,
        }
    }
}

/// A complete, validated problem description.
#[derive(Debug, Clone)]
pub struct Scenario {
    builtin: Option<String>,
    hbar: f64,
    grid: TimeGrid,
    model: Model,
    initial_state: DVector<C64>,
    tolerances: Tolerances,
}

impl Scenario {
    pub fn new(
        grid: TimeGrid,
        hbar: f64,
        model: Model,
        initial_state: DVector<C64>,
        tolerances: Tolerances,
    ) -> Result<Scenario> {
        let scenario = Scenario {
            builtin: None,
            hbar,
            grid,
            model,
            initial_state,
            tolerances,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub(crate) fn named(mut self, name: &str) -> Scenario {
        self.builtin = Some(name.to_string());
        self
    }

    /// Registry name when the scenario came from a builtin.
    pub fn builtin_name(&self) -> Option<&str> {
        self.builtin.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.initial_state.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn gates(&self) -> Gates {
        self.tolerances.gates()
    }

    pub fn initial_state(&self) -> SpaceTaggedVector {
        SpaceTaggedVector::new(Space::Reference, self.initial_state.clone())
            .expect("validated on construction")
    }

    pub fn initial_components(&self) -> &DVector<C64> {
        &self.initial_state
    }

    fn rebuilt(&self, f: impl FnOnce(&mut Scenario)) -> Result<Scenario> {
        let mut next = self.clone();
        f(&mut next);
        next.validate()?;
        Ok(next)
    }

    pub fn with_steps(&self, steps: usize) -> Result<Scenario> {
        let grid = self.grid.with_steps(steps)?;
        self.rebuilt(|s| s.grid = grid)
    }

    pub fn with_grid(&self, grid: TimeGrid) -> Result<Scenario> {
        self.rebuilt(|s| s.grid = grid)
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Scenario> {
        self.rebuilt(|s| s.hbar = hbar)
    }

    pub fn with_initial_state(&self, state: DVector<C64>) -> Result<Scenario> {
        self.rebuilt(|s| s.initial_state = state)
    }

    pub fn with_tolerances(&self, tolerances: Tolerances) -> Result<Scenario> {
        self.rebuilt(|s| s.tolerances = tolerances)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(Error::Validation(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::Validation("initial state is empty".into()));
        }
        if !self
            .initial_state
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        for schedule in [self.model.operator(), self.model.theta()] {
            if schedule.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: schedule.dim(),
                });
            }
            if !schedule.covers(self.grid.start(), self.grid.end()) {
                let (start, end) = schedule.span();
                return Err(Error::Validation(format!(
                    "schedule span [{start}, {end}] does not cover [{}, {}]",
                    self.grid.start(),
                    self.grid.end()
                )));
            }
        }
        let omega = self.omega_schedule()?;
        let gates = self.gates();
        for t in self.grid.nodes() {
            match &self.model {
                Model::Pair { h, .. } => {
                    let value = h.eval(t).map_err(|e| e.at(t))?;
                    let defect = matcore::hermiticity_defect(&value);
                    if defect > gates.herm {
                        return Err(Error::NotHermitian { defect }.at(t));
                    }
                }
                Model::Direct { hamiltonian, .. } => {
                    let value = hamiltonian.eval(t).map_err(|e| e.at(t))?;
                    let theta = omega.theta(t)?;
                    let residual = quasi_hermiticity_residual_theta(&value, &theta)?;
                    if !(residual <= self.tolerances.res) {
                        return Err(Error::Validation(format!(
                            "H is not quasi-Hermitian with respect to Theta: residual {residual:e} exceeds {:e}",
                            self.tolerances.res
                        ))
                        .at(t));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn omega_schedule(&self) -> Result<OmegaSchedule> {
        OmegaSchedule::new(self.model.theta(), &self.grid, self.gates())
    }

    /// Quasi-Hermitian `H(t)`.
    pub fn hamiltonian_at(&self, omega: &OmegaSchedule, t: f64) -> Result<ComplexMatrix> {
        match &self.model {
            Model::Pair { h, .. } => {
                let (w, w_inv) = root_pair(omega, t, &self.gates())?;
                Ok(&(&w_inv * &h.eval(t)?) * &w)
            }
            Model::Direct { hamiltonian, .. } => hamiltonian.eval(t),
        }
    }

    /// Hermitian `h(t)`.
    pub fn hermitian_at(&self, omega: &OmegaSchedule, t: f64) -> Result<ComplexMatrix> {
        match &self.model {
            Model::Pair { h, .. } => h.eval(t),
            Model::Direct { hamiltonian, .. } => {
                let (w, w_inv) = root_pair(omega, t, &self.gates())?;
                Ok(matcore::hermitize(
                    &(&(&w * &hamiltonian.eval(t)?) * &w_inv),
                ))
            }
        }
    }

    /// `h` is time-independent, so `u(t)` has a closed form.
    pub(crate) fn has_constant_hermitian(&self) -> bool {
        match &self.model {
            Model::Pair { h, .. } => h.as_constant().is_some(),
            Model::Direct { hamiltonian, theta } => {
                hamiltonian.as_constant().is_some() && theta.as_constant().is_some()
            }
        }
    }

    pub fn evolve(&self) -> Result<EvolutionResult> {
        evolve_with(self, self.omega_schedule()?)
    }

    /// Like [`Scenario::evolve`] but always differencing `omega`.
    pub fn evolve_finite_difference(&self) -> Result<EvolutionResult> {
        evolve_with(self, self.omega_schedule()?.with_finite_difference())
    }
}

fn root_pair(
    omega: &OmegaSchedule,
    t: f64,
    gates: &Gates,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let w = omega.omega(t)?;
    let w_inv = matcore::inverse_gated(&w, gates).map_err(|e| e.at(t))?;
    Ok((w, w_inv))
}

/// Everything produced by one integration of a scenario, sampled at the grid
/// nodes.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub grid: TimeGrid,
    pub hbar: f64,
    pub derivative_mode: OmegaDerivative,
    pub theta: Vec<ComplexMatrix>,
    pub hamiltonian: Vec<ComplexMatrix>,
    /// `omega^-1 d(omega)/dt`.
    pub log_derivative: Vec<ComplexMatrix>,
    pub omega_dot_norm: Vec<f64>,
    pub u_series: Vec<ComplexMatrix>,
    /// Definition-based `U_R`.
    pub ur_series: Vec<ComplexMatrix>,
    pub ur_naive: Vec<ComplexMatrix>,
    pub ur_corrected: Vec<ComplexMatrix>,
    pub theta_recon: Vec<ComplexMatrix>,
    pub states: Vec<DVector<C64>>,
    pub norm_phys: Vec<f64>,
}

fn evolve_with(scenario: &Scenario, omega: OmegaSchedule) -> Result<EvolutionResult> {
    let grid = *scenario.grid();
    let hbar = scenario.hbar();
    let gates = scenario.gates();
    let hermitian = |t: f64| scenario.hermitian_at(&omega, t);
    let hamiltonian = |t: f64| scenario.hamiltonian_at(&omega, t);

    let u_series = integrate_u(&hermitian, &grid, hbar, &gates)?;
    let ur_series = ur_from_definition(&u_series, &omega, &grid)?;
    let ur_naive = ur_from_naive_generator(&hamiltonian, &grid, hbar)?;
    let ur_corrected = ur_from_corrected_generator(&hamiltonian, &omega, &grid, hbar)?;

    let n = grid.steps() + 1;
    let mut theta = Vec::with_capacity(n);
    let mut ham = Vec::with_capacity(n);
    let mut log_derivative = Vec::with_capacity(n);
    let mut omega_dot_norm = Vec::with_capacity(n);
    for t in grid.nodes() {
        let point = omega.point(t)?;
        ham.push(hamiltonian(t).map_err(|e| e.at(t))?);
        omega_dot_norm.push(fro_norm(&point.omega_dot));
        log_derivative.push(point.log_derivative());
        theta.push(point.theta);
    }
    let theta_recon = metric_from_ur(&ur_series, &theta[0], &grid)?;
    let evolution = propagate_state(&ur_series, &theta, scenario.initial_components())?;

    Ok(EvolutionResult {
        grid,
        hbar,
        derivative_mode: omega.mode(),
        theta,
        hamiltonian: ham,
        log_derivative,
        omega_dot_norm,
        u_series,
        ur_series,
        ur_naive,
        ur_corrected,
        theta_recon,
        states: evolution.states,
        norm_phys: evolution.norm_phys,
    })
}
