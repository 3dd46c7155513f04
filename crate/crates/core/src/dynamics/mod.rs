//! Time-dependent schedules, propagator integration and metric reconstruction.

pub mod builtins;
mod omega;
mod propagate;
mod scenario;
mod schedule;

pub use builtins::{Builtin, Registry};
pub use omega::{OmegaDerivative, OmegaPoint, OmegaSchedule};
pub use propagate::{
    corrected_generator, integrate_u, metric_from_ur, propagate_state, rk4_propagator,
    ur_from_corrected_generator, ur_from_definition, ur_from_naive_generator, StateEvolution,
    TimeOperator,
};
pub use scenario::{EvolutionResult, Model, Scenario, Tolerances};
pub use schedule::{ClosedForm, MatrixFn, OperatorSchedule, ScheduleKind, TimeGrid};

use crate::error::Result;

/// Propagates the scenario's initial reference ket with the definition-based
/// `U_R` and records `<Phi(t)|Theta(t)|Phi(t)>` at every node.
pub fn evolve_state(scenario: &Scenario) -> Result<StateEvolution> {
    let omega = scenario.omega_schedule()?;
    let grid = scenario.grid();
    let hermitian = |t: f64| scenario.hermitian_at(&omega, t);
    let u = integrate_u(&hermitian, grid, scenario.hbar(), &scenario.gates())?;
    let ur = ur_from_definition(&u, &omega, grid)?;
    let thetas = grid
        .nodes()
        .map(|t| omega.theta(t))
        .collect::<Result<Vec<_>>>()?;
    propagate_state(&ur, &thetas, scenario.initial_components())
}
