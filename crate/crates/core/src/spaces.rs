//! Metrics, Dyson maps and the three Hilbert-space views of one state.
//!
//! Kets carry an explicit [`Space`] tag. A ket in the standard physical space
//! (where the Hermitian `h` acts) is mapped into the reference space (where the
//! quasi-Hermitian `H` acts) by the inverse Dyson map. The physical space built
//! on the reference kets is represented by a `(reference ket, Metric)` pair:
//! only its functionals differ, and those are produced by [`doubled_bra`].

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matcore::{self, fro_norm, hermiticity_defect, ComplexMatrix, Gates, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// Standard physical space, kets written `|phi}`.
    Standard,
    /// Reference space, kets written `|phi>`.
    Reference,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Standard => "standard",
            Space::Reference => "reference",
        }
    }

    pub fn parse(s: &str) -> Option<Space> {
        match s {
            "standard" => Some(Space::Standard),
            "reference" => Some(Space::Reference),
            _ => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Positive-definite metric `Theta` with its principal root `omega`.
#[derive(Debug, Clone)]
pub struct Metric {
    theta: ComplexMatrix,
    omega: ComplexMatrix,
    omega_inv: ComplexMatrix,
}

impl Metric {
    pub fn theta(&self) -> &ComplexMatrix {
        &self.theta
    }

    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    pub fn omega_inv(&self) -> &ComplexMatrix {
        &self.omega_inv
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// Assembles a metric from a known root, e.g. an analytic `omega(t)`.
    pub fn from_root(omega: ComplexMatrix, gates: &Gates) -> Result<Metric> {
        let defect = hermiticity_defect(&omega);
        if defect > gates.herm {
            return Err(Error::NotHermitian { defect });
        }
        let omega_inv = matcore::inverse_gated(&omega, gates)?;
        let theta = &omega * &omega;
        Ok(Metric {
            theta,
            omega,
            omega_inv,
        })
    }
}

pub fn metric_from_theta(theta: &ComplexMatrix) -> Result<Metric> {
    metric_from_theta_gated(theta, &Gates::default())
}

pub fn metric_from_theta_gated(theta: &ComplexMatrix, gates: &Gates) -> Result<Metric> {
    let omega = matcore::principal_sqrt_gated(theta, gates)?;
    let omega_inv = matcore::inverse_gated(&omega, gates)?;
    Ok(Metric {
        theta: theta.clone(),
        omega,
        omega_inv,
    })
}

/// General invertible map `Omega` with `Theta = Omega^H Omega`.
#[derive(Debug, Clone)]
pub struct DysonMap {
    map: ComplexMatrix,
    map_inv: ComplexMatrix,
}

impl DysonMap {
    pub fn map(&self) -> &ComplexMatrix {
        &self.map
    }

    pub fn map_inv(&self) -> &ComplexMatrix {
        &self.map_inv
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }
}

/// Builds the Dyson map and the metric it induces. Note that the metric's
/// root `omega = sqrt(Omega^H Omega)` differs from `Omega` unless `Omega` is
/// itself Hermitian positive definite.
pub fn metric_from_dyson(omega_g: &ComplexMatrix) -> Result<(DysonMap, Metric)> {
    metric_from_dyson_gated(omega_g, &Gates::default())
}

pub fn metric_from_dyson_gated(
    omega_g: &ComplexMatrix,
    gates: &Gates,
) -> Result<(DysonMap, Metric)> {
    let map_inv = matcore::inverse_gated(omega_g, gates)?;
    let theta = &omega_g.adjoint() * omega_g;
    let metric = metric_from_theta_gated(&matcore::hermitize(&theta), gates)?;
    Ok((
        DysonMap {
            map: omega_g.clone(),
            map_inv,
        },
        metric,
    ))
}

/// A ket tagged with the space it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTaggedVector {
    space: Space,
    components: DVector<C64>,
}

impl SpaceTaggedVector {
    pub fn new(space: Space, components: DVector<C64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if !components
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(SpaceTaggedVector { space, components })
    }

    pub fn from_slice(space: Space, components: &[C64]) -> Result<Self> {
        Self::new(space, DVector::from_column_slice(components))
    }

    pub fn standard(components: &[C64]) -> Result<Self> {
        Self::from_slice(Space::Standard, components)
    }

    pub fn reference(components: &[C64]) -> Result<Self> {
        Self::from_slice(Space::Reference, components)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn components(&self) -> &DVector<C64> {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    fn expect_space(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::SpaceMismatch {
                expected: space,
                found: self.space,
            });
        }
        Ok(())
    }
}

fn expect_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Plain sesquilinear product on the reference space, antilinear in `phi`.
pub fn inner_reference(phi: &SpaceTaggedVector, psi: &SpaceTaggedVector) -> Result<C64> {
    phi.expect_space(Space::Reference)?;
    psi.expect_space(Space::Reference)?;
    expect_dim(phi.dim(), psi.dim())?;
    Ok(phi.components.dotc(&psi.components))
}

/// Plain sesquilinear product on the standard space.
pub fn inner_standard(phi: &SpaceTaggedVector, psi: &SpaceTaggedVector) -> Result<C64> {
    phi.expect_space(Space::Standard)?;
    psi.expect_space(Space::Standard)?;
    expect_dim(phi.dim(), psi.dim())?;
    Ok(phi.components.dotc(&psi.components))
}

/// Metric-weighted product `<phi|Theta|psi>` on reference kets.
///
/// Evaluated as `doubled_bra(phi, m).apply(psi)`, so the two agree bit for bit.
pub fn inner_physical(phi: &SpaceTaggedVector, psi: &SpaceTaggedVector, m: &Metric) -> Result<C64> {
    psi.expect_space(Space::Reference)?;
    doubled_bra(phi, m)?.apply(psi)
}

/// `|phi> = Omega^-1 |phi}`.
pub fn map_to_reference(phi: &SpaceTaggedVector, d: &DysonMap) -> Result<SpaceTaggedVector> {
    phi.expect_space(Space::Standard)?;
    expect_dim(d.dim(), phi.dim())?;
    Ok(SpaceTaggedVector {
        space: Space::Reference,
        components: d.map_inv.apply(&phi.components),
    })
}

/// Linear functional `<<phi| = <phi| Theta` of the physical space.
///
/// Only [`doubled_bra`] creates one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFunctional {
    row: Vec<C64>,
}

impl PhysicalFunctional {
    pub fn row(&self) -> &[C64] {
        &self.row
    }

    pub fn apply(&self, psi: &SpaceTaggedVector) -> Result<C64> {
        psi.expect_space(Space::Reference)?;
        expect_dim(self.row.len(), psi.dim())?;
        Ok(self
            .row
            .iter()
            .zip(psi.components.iter())
            .fold(C64::new(0.0, 0.0), |acc, (r, p)| acc + r * p))
    }
}

pub fn doubled_bra(phi: &SpaceTaggedVector, m: &Metric) -> Result<PhysicalFunctional> {
    phi.expect_space(Space::Reference)?;
    expect_dim(m.dim(), phi.dim())?;
    let theta = m.theta.as_nalgebra();
    let row = (0..m.dim())
        .map(|j| {
            phi.components
                .iter()
                .enumerate()
                .fold(C64::new(0.0, 0.0), |acc, (i, p)| {
                    acc + p.conj() * theta[(i, j)]
                })
        })
        .collect();
    Ok(PhysicalFunctional { row })
}

/// Energies with an orthonormal set of eigenkets.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub energies: Vec<f64>,
    pub basis: Vec<DVector<C64>>,
}

/// Largest accepted `||G - I||_F` of the basis Gram matrix.
pub const GRAM_TOLERANCE: f64 = 1e-12;

impl SpectralData {
    pub fn gram_defect(&self) -> f64 {
        let n = self.basis.len();
        let mut sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                let g = self.basis[i].dotc(&self.basis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                sq += (g - C64::new(target, 0.0)).norm_sqr();
            }
        }
        sq.sqrt()
    }
}

/// `h = sum_n E_n |n}{n|`.
pub fn spectral_hamiltonian(s: &SpectralData) -> Result<ComplexMatrix> {
    let Some(first) = s.basis.first() else {
        return Err(Error::EmptyMatrix);
    };
    expect_dim(s.basis.len(), s.energies.len())?;
    let dim = first.len();
    for v in &s.basis {
        expect_dim(dim, v.len())?;
    }
    if s.basis.len() > dim {
        return Err(Error::BasisNotOrthonormal {
            defect: s.gram_defect(),
        });
    }
    let defect = s.gram_defect();
    if !(defect <= GRAM_TOLERANCE) {
        return Err(Error::BasisNotOrthonormal { defect });
    }
    let mut h = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    for (&energy, v) in s.energies.iter().zip(&s.basis) {
        h += (v * v.adjoint()) * C64::new(energy, 0.0);
    }
    ComplexMatrix::from_nalgebra(h)
}

/// `||Theta H - H^H Theta||_F / max(||Theta H||_F, tiny)`; zero iff `H` is
/// quasi-Hermitian with respect to `Theta`.
pub fn quasi_hermiticity_residual(h: &ComplexMatrix, m: &Metric) -> Result<f64> {
    quasi_hermiticity_residual_theta(h, &m.theta)
}

pub(crate) fn quasi_hermiticity_residual_theta(
    h: &ComplexMatrix,
    theta: &ComplexMatrix,
) -> Result<f64> {
    let th = theta.try_mul(h)?;
    let hth = &h.adjoint() * theta;
    Ok(fro_norm(&(&th - &hth)) / fro_norm(&th).max(f64::MIN_POSITIVE))
}

/// `h = omega H omega^-1` and its relative Hermiticity defect.
#[derive(Debug, Clone)]
pub struct HermitianEquivalent {
    pub h: ComplexMatrix,
    pub defect: f64,
}

pub fn hermitian_equivalent(h: &ComplexMatrix, m: &Metric) -> Result<HermitianEquivalent> {
    let mapped = &m.omega.try_mul(h)? * &m.omega_inv;
    let defect = hermiticity_defect(&mapped);
    Ok(HermitianEquivalent { h: mapped, defect })
}
