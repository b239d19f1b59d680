use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::phase_space::{omega2, ProbeState, SymplecticMatrix};

/// Affine Gaussian channel `sigma -> T sigma T^T + R` on the probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    pub t_matrix: Matrix2<f64>,
    pub r_matrix: Matrix2<f64>,
}

impl GaussianChannel {
    pub fn new(t_matrix: Matrix2<f64>, r_matrix: Matrix2<f64>) -> Self {
        Self { t_matrix, r_matrix }
    }

    pub fn identity() -> Self {
        Self::new(Matrix2::identity(), Matrix2::zeros())
    }

    /// Rotation of the probe phase space by `theta` with no added noise.
    pub fn rotation(theta: f64) -> Self {
        Self::new(crate::phase_space::rotation_matrix(theta), Matrix2::zeros())
    }

    pub fn apply_matrix(&self, sigma: &Matrix2<f64>) -> Matrix2<f64> {
        self.t_matrix * sigma * self.t_matrix.transpose() + self.r_matrix
    }

    pub fn apply(&self, sigma: &ProbeState) -> ProbeState {
        ProbeState::new_unchecked(self.apply_matrix(sigma.matrix()))
    }

    /// `self` after `first`: `sigma -> self(first(sigma))`.
    pub fn after(&self, first: &GaussianChannel) -> GaussianChannel {
        GaussianChannel {
            t_matrix: self.t_matrix * first.t_matrix,
            r_matrix: self.t_matrix * first.r_matrix * self.t_matrix.transpose() + self.r_matrix,
        }
    }

    /// Smallest eigenvalue of the Hermitian matrix `R + i Omega - i T Omega T^T`.
    ///
    /// For 2x2 `T`, `T Omega T^T = det(T) Omega`, so the matrix is
    /// `[[R00, R01 + i k], [R01 - i k, R11]]` with `k = 1 - det T`.
    pub fn complete_positivity_margin(&self) -> f64 {
        let r = &self.r_matrix;
        let k = 1.0 - self.t_matrix.determinant();
        let off = 0.5 * (r[(0, 1)] + r[(1, 0)]);
        let mean = 0.5 * (r[(0, 0)] + r[(1, 1)]);
        let half_diff = 0.5 * (r[(0, 0)] - r[(1, 1)]);
        mean - (half_diff * half_diff + off * off + k * k).sqrt()
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.complete_positivity_margin() >= -tol
    }

    pub fn omega() -> Matrix2<f64> {
        omega2()
    }
}

/// Probe marginal of a symplectic evolution with the field starting in vacuum:
/// `T` is the probe-probe block and `R = B B^T` with `B` the probe-field block.
pub fn reduce_channel(s: &SymplecticMatrix) -> GaussianChannel {
    reduce_probe_rows(&s.matrix().rows(0, 2).clone_owned())
}

/// Same reduction from only the two probe rows of `S`.
pub fn reduce_probe_rows(rows: &DMatrix<f64>) -> GaussianChannel {
    debug_assert_eq!(rows.nrows(), 2);
    let t_matrix = Matrix2::new(rows[(0, 0)], rows[(0, 1)], rows[(1, 0)], rows[(1, 1)]);
    let d = rows.ncols();
    let b = rows.columns(2, d - 2);
    let bbt = b * b.transpose();
    let r_matrix = Matrix2::new(bbt[(0, 0)], bbt[(0, 1)], bbt[(1, 0)], bbt[(1, 1)]);
    GaussianChannel {
        t_matrix,
        r_matrix: (r_matrix + r_matrix.transpose()) * 0.5,
    }
}
