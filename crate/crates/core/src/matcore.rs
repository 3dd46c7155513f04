//! Dense complex matrix kernel.
//!
//! Everything here is desk-scale (dimension <= 16) and dense. The Hermitian
//! eigensolver and LU factorisation come from `nalgebra`; this module adds the
//! relative gates (Hermiticity, positivity, conditioning) that the rest of the
//! crate relies on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Hermiticity tolerance, `||A - A^H||_F <= EPS_HERM * ||A||_F`.
pub const EPS_HERM: f64 = 1e-10;
/// Relative positivity threshold, `lambda_min > EPS_POS * lambda_max`.
pub const EPS_POS: f64 = 1e-10;
/// Largest accepted 1-norm condition number for inversion.
pub const KAPPA_MAX: f64 = 1e8;

/// Row-major nest of `[re, im]` pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;
/// Array of `[re, im]` pairs.
pub type VectorLiteral = Vec<[f64; 2]>;

/// Thresholds used by the numerical gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gates {
    pub herm: f64,
    pub pos: f64,
    pub kappa_max: f64,
}

impl Default for Gates {
    fn default() -> Self {
        Gates {
            herm: EPS_HERM,
            pos: EPS_POS,
            kappa_max: KAPPA_MAX,
        }
    }
}

/// Square matrix of finite complex entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.inner)
    }
}

impl ComplexMatrix {
    pub fn from_nalgebra(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        if inner.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        if !inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { inner })
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_nalgebra(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(dim, &entries)
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        ComplexMatrix {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    pub fn from_literal(lit: &MatrixLiteral) -> Result<Self> {
        let dim = lit.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in lit {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            entries.extend(row.iter().map(|&[re, im]| C64::new(re, im)));
        }
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        Self::from_row_major(dim, &entries)
    }

    pub fn to_literal(&self) -> MatrixLiteral {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.inner[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> ComplexMatrix {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.inner * v
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Entrywise finiteness; true for every matrix built through the checked
    /// constructors, but arithmetic can overflow.
    pub fn is_finite(&self) -> bool {
        self.inner
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(other)?;
        Ok(self * other)
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(other)?;
        Ok(self - other)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            inner: -&self.inner,
        }
    }
}

pub fn vector_from_literal(lit: &VectorLiteral) -> Result<DVector<C64>> {
    let v = DVector::from_iterator(lit.len(), lit.iter().map(|&[re, im]| C64::new(re, im)));
    if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(v)
}

pub fn vector_to_literal(v: &DVector<C64>) -> VectorLiteral {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// `(A + A^H) / 2`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: (&a.inner + a.inner.adjoint()) * C64::new(0.5, 0.0),
    }
}

/// `||A - A^H||_F / ||A||_F`, or 0 for the zero matrix.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let norm = fro_norm(a);
    if norm == 0.0 {
        return 0.0;
    }
    (&a.inner - a.inner.adjoint()).norm() / norm
}

pub fn fro_norm(a: &ComplexMatrix) -> f64 {
    a.inner.norm()
}

/// Spectral decomposition `A = V diag(lambda) V^H` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^H`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = self.eigenvectors.as_nalgebra();
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        ComplexMatrix {
            inner: scaled * v.adjoint(),
        }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| C64::new(x, 0.0))
    }
}

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    eig_hermitian_gated(a, &Gates::default())
}

pub fn eig_hermitian_gated(a: &ComplexMatrix, gates: &Gates) -> Result<HermitianEigen> {
    let defect = hermiticity_defect(a);
    if defect > gates.herm {
        return Err(Error::NotHermitian { defect });
    }
    let eig = hermitize(a).inner.symmetric_eigen();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_nalgebra(eigenvectors)?,
    })
}

/// Fails unless the smallest eigenvalue exceeds `gates.pos` times the largest.
pub fn check_positive_definite(eig: &HermitianEigen, gates: &Gates) -> Result<()> {
    let min = eig.eigenvalues[0];
    let max = *eig.eigenvalues.last().expect("dim >= 1");
    if max <= 0.0 || min <= gates.pos * max {
        return Err(Error::NotPositiveDefinite { min, max });
    }
    Ok(())
}

pub fn principal_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    principal_sqrt_gated(a, &Gates::default())
}

/// Unique Hermitian positive-definite square root.
pub fn principal_sqrt_gated(a: &ComplexMatrix, gates: &Gates) -> Result<ComplexMatrix> {
    let eig = eig_hermitian_gated(a, gates)?;
    check_positive_definite(&eig, gates)?;
    Ok(eig.map_spectrum(|x| C64::new(x.sqrt(), 0.0)))
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number `||A||_1 ||A^-1||_1`; infinite for singular input.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    match a.inner.clone().lu().try_inverse() {
        Some(inv) => one_norm(&a.inner) * one_norm(&inv),
        None => f64::INFINITY,
    }
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    inverse_gated(a, &Gates::default())
}

pub fn inverse_gated(a: &ComplexMatrix, gates: &Gates) -> Result<ComplexMatrix> {
    let inv = match a.inner.clone().lu().try_inverse() {
        Some(inv) => inv,
        None => {
            return Err(Error::IllConditioned {
                cond: f64::INFINITY,
            })
        }
    };
    let cond = one_norm(&a.inner) * one_norm(&inv);
    if !cond.is_finite() || cond > gates.kappa_max {
        return Err(Error::IllConditioned { cond });
    }
    ComplexMatrix::from_nalgebra(inv)
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    pub fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let diff = fro_norm(&(a - b));
        assert!(
            diff <= tol,
            "||a - b||_F = {diff:e} > {tol:e}\na = {a:?}\nb = {b:?}"
        );
    }

    pub fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn hermitize_examples() {
        let a = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            hermitize(&a),
            ComplexMatrix::from_real(2, &[0.0, 0.5, 0.5, 0.0]).unwrap()
        );

        let h = ComplexMatrix::from_row_major(
            2,
            &[c(1.0, 0.0), c(2.0, -1.0), c(2.0, 1.0), c(-3.0, 0.0)],
        )
        .unwrap();
        assert_eq!(hermitize(&h), h);

        let anti = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, 1.0)]);
        assert_eq!(hermitize(&anti), ComplexMatrix::zeros(2));
    }

    #[test]
    fn eig_diagonal_swaps_basis() {
        let eig = eig_hermitian(&ComplexMatrix::from_real_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 3.0]);
        let v = &eig.eigenvectors;
        assert_eq!(v.get(0, 0).norm(), 0.0);
        assert_eq!(v.get(1, 0).norm(), 1.0);
        assert_eq!(v.get(0, 1).norm(), 1.0);
        assert_eq!(v.get(1, 1).norm(), 0.0);
    }

    #[test]
    fn eig_two_by_two() {
        let a = ComplexMatrix::from_real(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = eig_hermitian(&a).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 3.0).abs() < 1e-14);
        // Columns are fixed up to a phase: compare |<expected|v>| = 1.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[s, -s], [s, s]];
        for (j, e) in expected.iter().enumerate() {
            let overlap = e[0] * eig.eigenvectors.get(0, j) + e[1] * eig.eigenvectors.get(1, j);
            assert!((overlap.norm() - 1.0).abs() < 1e-14);
        }
        assert_close(&eig.reconstruct(), &a, 1e-12 * fro_norm(&a));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_examples() {
        let s = principal_sqrt(&ComplexMatrix::from_real_diagonal(&[1.0, 4.0])).unwrap();
        assert_eq!(s, ComplexMatrix::from_real_diagonal(&[1.0, 2.0]));

        let a = ComplexMatrix::from_real(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let r3 = 3f64.sqrt();
        let expected = ComplexMatrix::from_real(2, &[r3 + 1.0, r3 - 1.0, r3 - 1.0, r3 + 1.0])
            .unwrap()
            .scale_real(0.5);
        assert_close(&principal_sqrt(&a).unwrap(), &expected, 1e-14);
        assert!((expected.get(0, 0).re - 1.3660254037844386).abs() < 1e-15);

        let b = ComplexMatrix::from_real(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        match principal_sqrt(&b) {
            Err(Error::NotPositiveDefinite { min, max }) => {
                assert!((min + 1.0).abs() < 1e-14);
                assert!((max - 3.0).abs() < 1e-14);
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_of_scaled_identity_is_exact() {
        for &cval in &[0.25, 2.0, 7.5] {
            let s = principal_sqrt(&ComplexMatrix::identity(4).scale_real(cval)).unwrap();
            assert_eq!(s, ComplexMatrix::identity(4).scale_real(cval.sqrt()));
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            inverse(&ComplexMatrix::identity(3)).unwrap(),
            ComplexMatrix::identity(3)
        );
        assert_eq!(
            inverse(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap(),
            ComplexMatrix::from_real_diagonal(&[1.0, 0.5])
        );
        let a = ComplexMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_close(
            &inverse(&a).unwrap(),
            &ComplexMatrix::from_real(2, &[1.0, -1.0, 0.0, 1.0]).unwrap(),
            1e-15,
        );
    }

    #[test]
    fn inverse_rejects_singular_and_ill_conditioned() {
        let singular = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            inverse(&singular),
            Err(Error::IllConditioned { .. })
        ));
        let nearly = ComplexMatrix::from_real_diagonal(&[1.0, 1e-9]);
        match inverse(&nearly) {
            Err(Error::IllConditioned { cond }) => assert!((cond - 1e9).abs() < 1.0),
            other => panic!("expected IllConditioned, got {other:?}"),
        }
    }

    #[test]
    fn fro_norm_examples() {
        assert_eq!(fro_norm(&ComplexMatrix::zeros(3)), 0.0);
        assert_eq!(fro_norm(&ComplexMatrix::identity(2)), 2f64.sqrt());
        let a = ComplexMatrix::from_real(2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(fro_norm(&a), 2f64.sqrt());
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(
            ComplexMatrix::from_nalgebra(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            ComplexMatrix::from_real(0, &[]),
            Err(Error::EmptyMatrix)
        ));
        assert!(matches!(
            ComplexMatrix::from_real(1, &[f64::NAN]),
            Err(Error::NonFinite)
        ));
        let lit: MatrixLiteral = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        assert!(ComplexMatrix::from_literal(&lit).is_err());
    }

    #[test]
    fn literal_identity() {
        let lit: MatrixLiteral = serde_json::from_str("[[[1,0],[0,0]],[[0,0],[1,0]]]").unwrap();
        let m = ComplexMatrix::from_literal(&lit).unwrap();
        assert_eq!(m, ComplexMatrix::identity(2));
        assert_eq!(m.to_literal(), lit);
    }
}
