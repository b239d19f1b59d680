//! Phase-space linear algebra for Gaussian states.
//!
//! Quadratures are ordered `(q0, p0, q1, p1, ...)` and covariance matrices use
//! the convention in which the vacuum is the identity, so every physical
//! single-mode state has symplectic eigenvalue `nu >= 1`.

mod logm;

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};

use crate::error::{Error, Result};

pub use logm::real_matrix_log;

/// Default bound on `||S Omega S^T - Omega||_max` for accepted symplectic matrices.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// The single-mode symplectic form `[[0, 1], [-1, 0]]`.
pub fn omega2() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Block-diagonal symplectic form on `modes` quadrature pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid(
                "modes",
                "symplectic form needs at least one mode",
            ));
        }
        let dim = 2 * modes;
        let mut matrix = DMatrix::zeros(dim, dim);
        for k in 0..modes {
            matrix[(2 * k, 2 * k + 1)] = 1.0;
            matrix[(2 * k + 1, 2 * k)] = -1.0;
        }
        Ok(Self { matrix })
    }

    pub fn for_dimension(dim: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::invalid(
                "dim",
                format!("phase-space dimension must be even and positive, got {dim}"),
            ));
        }
        Self::new(dim / 2)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Max-norm of a dense matrix.
pub fn max_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_norm2(m: &Matrix2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Rotation by `theta`, oriented so that free evolution at rate `w` is
/// `q(t) = q cos(wt) + p sin(wt)`.
pub fn rotation_matrix(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Row-major vectorization: `vec(A B C^T) = kron(A, C) vec(B)`.
pub fn vectorize(m: &Matrix2<f64>) -> Vector4<f64> {
    Vector4::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

pub fn devectorize(v: &[f64]) -> Result<Matrix2<f64>> {
    match v {
        [a, b, c, d] => Ok(Matrix2::new(*a, *b, *c, *d)),
        _ => Err(Error::invalid(
            "v",
            format!("devectorize expects 4 entries, got {}", v.len()),
        )),
    }
}

/// Kronecker product of two 2x2 matrices, indexed consistently with [`vectorize`].
pub fn kron2(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|row, col| a[(row / 2, col / 2)] * b[(row % 2, col % 2)])
}

/// Deviation `||S Omega S^T - Omega||_max`; the caller decides on a tolerance.
pub fn check_symplectic(s: &DMatrix<f64>) -> Result<f64> {
    if !s.is_square() {
        return Err(Error::invalid("s", "matrix must be square"));
    }
    let form = SymplecticForm::for_dimension(s.nrows())?;
    let omega = form.matrix();
    Ok(max_norm(&(s * omega * s.transpose() - omega)))
}

/// Real square matrix that preserves the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    matrix: DMatrix<f64>,
    deviation: f64,
}

impl SymplecticMatrix {
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let deviation = check_symplectic(&matrix)?;
        if !(deviation <= tol) {
            return Err(Error::invalid(
                "matrix",
                format!("symplectic deviation {deviation:.3e} exceeds tolerance {tol:.3e}"),
            ));
        }
        Ok(Self { matrix, deviation })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim), 0.0)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `||S Omega S^T - Omega||_max`, measured at construction.
    pub fn deviation(&self) -> f64 {
        self.deviation
    }
}

/// Multi-mode covariance matrix (vacuum = identity).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Accepts a symmetric matrix satisfying `sigma + i Omega >= 0` up to `tol`.
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("matrix", "covariance must be square"));
        }
        let asym = max_norm(&(&matrix - matrix.transpose()));
        if asym > tol {
            return Err(Error::Unphysical(format!("asymmetry {asym:.3e}")));
        }
        let min_eig = min_uncertainty_eigenvalue(&matrix)?;
        if min_eig < -tol {
            return Err(Error::Unphysical(format!(
                "sigma + i Omega has eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Two-by-two block of mode `k`.
    pub fn mode_block(&self, k: usize) -> Matrix2<f64> {
        let b = self.matrix.fixed_view::<2, 2>(2 * k, 2 * k);
        Matrix2::from(b)
    }
}

/// Smallest eigenvalue of the Hermitian matrix `sigma + i Omega`, computed via
/// its real embedding `[[sigma, -Omega], [Omega, sigma]]`.
fn min_uncertainty_eigenvalue(sigma: &DMatrix<f64>) -> Result<f64> {
    let dim = sigma.nrows();
    let form = SymplecticForm::for_dimension(dim)?;
    let omega = form.matrix();
    let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
    embed.view_mut((0, 0), (dim, dim)).copy_from(sigma);
    embed.view_mut((dim, dim), (dim, dim)).copy_from(sigma);
    embed.view_mut((0, dim), (dim, dim)).copy_from(&(-omega));
    embed.view_mut((dim, 0), (dim, dim)).copy_from(omega);
    let sym = (&embed + embed.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    Ok(eig.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Single-mode probe covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct ProbeState(Matrix2<f64>);

/// Slack allowed on `det sigma >= 1` before a probe state is rejected.
pub const PHYSICALITY_TOL: f64 = 1e-10;

impl ProbeState {
    /// Checked constructor: symmetric with `det sigma >= 1` and positive diagonal.
    pub fn new(matrix: Matrix2<f64>) -> Result<Self> {
        let asym = (matrix[(0, 1)] - matrix[(1, 0)]).abs();
        if asym > PHYSICALITY_TOL * (1.0 + matrix.amax()) {
            return Err(Error::Unphysical(format!("asymmetry {asym:.3e}")));
        }
        let state = Self(symmetrize(&matrix));
        if !state.is_physical(PHYSICALITY_TOL) {
            return Err(Error::Unphysical(format!(
                "det = {:.12} < 1 or non-positive diagonal",
                state.det()
            )));
        }
        Ok(state)
    }

    /// Wraps a matrix without the physicality check (symmetrizes it).
    pub fn new_unchecked(matrix: Matrix2<f64>) -> Self {
        Self(symmetrize(&matrix))
    }

    pub fn vacuum() -> Self {
        Self(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.0[(0, 0)] > 0.0 && self.0[(1, 1)] > 0.0 && self.det() >= 1.0 - tol
    }
}

fn symmetrize(m: &Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}
