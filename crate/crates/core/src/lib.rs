//! Numerical toolkit for quantum evolution under time-dependent quasi-Hermitian
//! Hamiltonians.
//!
//! The crate builds the operator quadruple `(Theta(t), omega(t), h(t), H(t))`,
//! integrates the Hermitian propagator `u(t)`, constructs the reference-space
//! propagator `U_R(t) = omega(t)^-1 u(t) omega(0)` by definition and by two
//! competing generators, and reports residuals showing which propagator
//! identities survive a moving metric.

// `!(x <= tol)` is used on purpose so that NaN fails the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod matcore;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, C64};
