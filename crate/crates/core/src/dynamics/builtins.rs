//! Closed-form reference scenarios. All use `hbar = 1`, the span `[0, 1]`,
//! 2000 steps, `h = sigma_x` and the initial reference ket `(1, 0)`.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::Result;
use crate::matcore::{self, ComplexMatrix, C64};

use super::scenario::{Model, Scenario, Tolerances};
use super::schedule::{ClosedForm, OperatorSchedule, TimeGrid};

pub const GROWING_METRIC_2D: &str = "growing-metric-2d";
pub const CONSTANT_METRIC_2D: &str = "constant-metric-2d";
pub const SCALAR_EXPONENTIAL: &str = "scalar-exponential";
pub const NONHERMITIAN_DYSON: &str = "nonhermitian-dyson";

pub const DEFAULT_STEPS: usize = 2000;
pub const DEFAULT_SPAN: (f64, f64) = (0.0, 1.0);

/// Registry entry.
#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub dim: usize,
    pub span: (f64, f64),
    pub summary: &'static str,
    build: fn() -> Result<Scenario>,
}

impl Builtin {
    pub fn scenario(&self) -> Result<Scenario> {
        Ok((self.build)()?.named(self.name))
    }
}

/// Named builtin scenarios, kept sorted by name.
#[derive(Debug, Clone)]
pub struct Registry {
    entries: Vec<Builtin>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

impl Registry {
    pub fn builtin() -> Registry {
        let mut entries = vec![
            Builtin {
                name: GROWING_METRIC_2D,
                dim: 2,
                span: DEFAULT_SPAN,
                summary: "Theta(t) = diag(1, 1 + t^2), analytic omega_dot",
                build: growing_metric_2d,
            },
            Builtin {
                name: CONSTANT_METRIC_2D,
                dim: 2,
                span: DEFAULT_SPAN,
                summary: "Theta = [[2, 1], [1, 2]], frozen metric",
                build: constant_metric_2d,
            },
            Builtin {
                name: SCALAR_EXPONENTIAL,
                dim: 2,
                span: DEFAULT_SPAN,
                summary: "Theta(t) = exp(2t) I, analytic omega_dot",
                build: scalar_exponential,
            },
            Builtin {
                name: NONHERMITIAN_DYSON,
                dim: 2,
                span: DEFAULT_SPAN,
                summary: "H = Omega^-1 sigma_x Omega with Omega = [[1, 1], [0, 1]]",
                build: nonhermitian_dyson,
            },
        ];
        entries.sort_by_key(|b| b.name);
        Registry { entries }
    }

    pub fn empty() -> Registry {
        Registry {
            entries: Vec::new(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Builtin> {
        self.entries.iter()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|b| b.name).collect()
    }

    pub fn lookup(&self, name: &str) -> Option<&Builtin> {
        self.entries.iter().find(|b| b.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

fn default_grid() -> TimeGrid {
    TimeGrid::new(DEFAULT_SPAN.0, DEFAULT_SPAN.1, DEFAULT_STEPS).expect("valid default grid")
}

fn default_state() -> DVector<C64> {
    DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

fn pair(theta: OperatorSchedule) -> Result<Scenario> {
    Scenario::new(
        default_grid(),
        1.0,
        Model::Pair {
            h: OperatorSchedule::constant(sigma_x()),
            theta,
        },
        default_state(),
        Tolerances::default(),
    )
}

fn growing_metric_2d() -> Result<Scenario> {
    let theta = OperatorSchedule::closed_form(
        ClosedForm {
            name: "diag(1, 1 + t^2)".into(),
            value: Arc::new(|t| ComplexMatrix::from_real_diagonal(&[1.0, 1.0 + t * t])),
            derivative: Arc::new(|t| ComplexMatrix::from_real_diagonal(&[0.0, 2.0 * t])),
            root_derivative: Some(Arc::new(|t| {
                ComplexMatrix::from_real_diagonal(&[0.0, t / (1.0 + t * t).sqrt()])
            })),
        },
        DEFAULT_SPAN.0,
        DEFAULT_SPAN.1,
    )?;
    pair(theta)
}

fn constant_metric_2d() -> Result<Scenario> {
    let theta = ComplexMatrix::from_real(2, &[2.0, 1.0, 1.0, 2.0])?;
    pair(OperatorSchedule::constant(theta))
}

fn scalar_exponential() -> Result<Scenario> {
    let theta = OperatorSchedule::closed_form(
        ClosedForm {
            name: "exp(2t) I".into(),
            value: Arc::new(|t| ComplexMatrix::identity(2).scale_real((2.0 * t).exp())),
            derivative: Arc::new(|t| ComplexMatrix::identity(2).scale_real(2.0 * (2.0 * t).exp())),
            root_derivative: Some(Arc::new(|t| ComplexMatrix::identity(2).scale_real(t.exp()))),
        },
        DEFAULT_SPAN.0,
        DEFAULT_SPAN.1,
    )?;
    pair(theta)
}

/// The general (non-Hermitian) Dyson map of the `nonhermitian-dyson` builtin.
pub fn dyson_map() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).expect("2x2")
}

fn nonhermitian_dyson() -> Result<Scenario> {
    let omega_g = dyson_map();
    let omega_inv = matcore::inverse(&omega_g)?;
    let hamiltonian = &(&omega_inv * &sigma_x()) * &omega_g;
    let theta = &omega_g.adjoint() * &omega_g;
    Scenario::new(
        default_grid(),
        1.0,
        Model::Direct {
            hamiltonian: OperatorSchedule::constant(hamiltonian),
            theta: OperatorSchedule::constant(theta),
        },
        default_state(),
        Tolerances::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_sorted_and_complete() {
        let reg = Registry::builtin();
        assert_eq!(
            reg.names(),
            vec![
                CONSTANT_METRIC_2D,
                GROWING_METRIC_2D,
                NONHERMITIAN_DYSON,
                SCALAR_EXPONENTIAL
            ]
        );
        for b in reg.iter() {
            let s = b.scenario().unwrap();
            assert_eq!(s.builtin_name(), Some(b.name));
            assert_eq!(s.dim(), b.dim);
            assert_eq!(s.grid().steps(), DEFAULT_STEPS);
            assert_eq!(s.hbar(), 1.0);
        }
        assert!(Registry::empty().is_empty());
        assert!(reg.lookup("nope").is_none());
    }

    #[test]
    fn dyson_hamiltonian_is_integer() {
        let s = Registry::builtin()
            .lookup(NONHERMITIAN_DYSON)
            .unwrap()
            .scenario()
            .unwrap();
        match s.model() {
            super::super::scenario::Model::Direct { hamiltonian, theta } => {
                assert_eq!(
                    hamiltonian.as_constant().unwrap(),
                    &ComplexMatrix::from_real(2, &[-1.0, 0.0, 1.0, 1.0]).unwrap()
                );
                assert_eq!(
                    theta.as_constant().unwrap(),
                    &ComplexMatrix::from_real(2, &[1.0, 1.0, 1.0, 2.0]).unwrap()
                );
            }
            _ => panic!("expected direct model"),
        }
    }
}
