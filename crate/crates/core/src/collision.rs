//! Repeated application of an affine Gaussian channel: fixed points, the
//! spectrum of the affine 5x5 representation, and the continuous generator
//! whose flow matches the discrete update exactly at every cell boundary.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Matrix5, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cell::GaussianChannel;
use crate::error::{Error, Result};
use crate::phase_space::{devectorize, kron2, real_matrix_log, vectorize, ProbeState};

/// Spectral radii of `T (x) T` at or above `1 - NEAR_UNIT` are treated as non-contracting.
pub const NEAR_UNIT: f64 = 1e-12;

/// `[[1, 0], [vec R, T (x) T]]`, acting on `(1, vec sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCellMatrix(Matrix5<f64>);

impl AffineCellMatrix {
    pub fn new(channel: &GaussianChannel) -> Self {
        let mut m = Matrix5::zeros();
        m[(0, 0)] = 1.0;
        let vr = vectorize(&channel.r_matrix);
        let tt = kron2(&channel.t_matrix, &channel.t_matrix);
        m.fixed_view_mut::<4, 1>(1, 0).copy_from(&vr);
        m.fixed_view_mut::<4, 4>(1, 1).copy_from(&tt);
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix5<f64> {
        &self.0
    }
}

pub fn apply_channel(channel: &GaussianChannel, sigma: &ProbeState) -> ProbeState {
    channel.apply(sigma)
}

/// `n` successive applications.
pub fn iterate_channel(channel: &GaussianChannel, sigma: &ProbeState, n: usize) -> ProbeState {
    let mut m = *sigma.matrix();
    for _ in 0..n {
        m = channel.apply_matrix(&m);
    }
    ProbeState::new_unchecked(m)
}

/// Largest eigenvalue modulus of a real 2x2 matrix.
pub fn spectral_radius2(t: &Matrix2<f64>) -> f64 {
    let tr = t.trace();
    let det = t.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (0.5 * tr + s).abs().max((0.5 * tr - s).abs())
    } else {
        det.abs().sqrt()
    }
}

/// `1 - rho(T (x) T)`: the per-cell contraction of the slowest relaxing direction.
pub fn spectral_gap(channel: &GaussianChannel) -> f64 {
    let rho = spectral_radius2(&channel.t_matrix);
    1.0 - rho * rho
}

fn require_contraction(channel: &GaussianChannel) -> Result<()> {
    let rho = spectral_radius2(&channel.t_matrix);
    if !(rho * rho < 1.0 - NEAR_UNIT) {
        return Err(Error::NoUniqueFixedPoint {
            spectral_radius: rho,
        });
    }
    Ok(())
}

/// Unique attractive fixed point from `(I - T (x) T) vec sigma = vec R`,
/// solved on the symmetric subspace. The antisymmetric direction has
/// eigenvalue `det T`, which sits next to 1 for weak coupling, so a full 4x4
/// solve leaks round-off into it.
pub fn fixed_point(channel: &GaussianChannel) -> Result<ProbeState> {
    require_contraction(channel)?;
    let t = &channel.t_matrix;
    let basis = [
        Matrix2::new(1.0, 0.0, 0.0, 0.0),
        Matrix2::new(0.0, 1.0, 1.0, 0.0),
        Matrix2::new(0.0, 0.0, 0.0, 1.0),
    ];
    let coords =
        |m: &Matrix2<f64>| Vector3::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mut k = Matrix3::zeros();
    for (j, e) in basis.iter().enumerate() {
        k.set_column(j, &coords(&(e - t * e * t.transpose())));
    }
    let v = k
        .lu()
        .solve(&coords(&channel.r_matrix))
        .ok_or_else(|| Error::Singular("I - T (x) T".into()))?;
    ProbeState::new(Matrix2::new(v[0], v[1], v[1], v[2]))
}

/// Fixed point read off the eigenvector of the affine matrix with eigenvalue 1,
/// normalised so its first component is 1.
pub fn fixed_point_from_eigenvector(channel: &GaussianChannel) -> Result<ProbeState> {
    require_contraction(channel)?;
    let m = AffineCellMatrix::new(channel);
    let shifted = m.matrix() - Matrix5::identity();
    let dm = DMatrix::from_fn(5, 5, |i, j| shifted[(i, j)]);
    let svd = dm.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Singular("SVD of M - I".into()))?;
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    let null = v_t.row(idx);
    if null[0].abs() < f64::EPSILON {
        return Err(Error::Singular(
            "fixed-point eigenvector lies outside the affine slice".into(),
        ));
    }
    let v = Vector4::new(null[1], null[2], null[3], null[4]) / null[0];
    // Near-unit det T mixes the antisymmetric direction into the null vector.
    let m = devectorize(v.as_slice())?;
    ProbeState::new((m + m.transpose()) * 0.5)
}

/// The five eigenvalues of the affine cell matrix, sorted by decreasing modulus.
pub fn convergence_spectrum(channel: &GaussianChannel) -> Vec<Complex64> {
    let m = AffineCellMatrix::new(channel);
    let mut eig: Vec<Complex64> = m.matrix().complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal))
    });
    eig
}

/// Generator of the Gaussian master equation
/// `d sigma/dt = D sigma + sigma D^T + C` interpolating the cell map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcmGenerator {
    /// `D = Log(T) / delta_t` (the `Omega A` of the master equation).
    pub drift: Matrix2<f64>,
    /// Symmetric noise matrix `C`.
    pub noise: Matrix2<f64>,
    pub delta_t: f64,
}

/// `D (x) I + I (x) D`, the generator of `sigma -> D sigma + sigma D^T` in vec form.
fn kron_sum(d: &Matrix2<f64>) -> Matrix4<f64> {
    let i = Matrix2::identity();
    kron2(d, &i) + kron2(&i, d)
}

/// Builds the generator from a contracting channel and the cell duration.
///
/// The noise is `K (T (x) T - I)^{-1} vec R` with `K` the vec-form drift, so
/// that `exp(K delta_t) = T (x) T` and the flow reproduces `sigma -> T sigma T^T + R`
/// at every multiple of `delta_t`.
pub fn icm_generator(channel: &GaussianChannel, delta_t: f64) -> Result<IcmGenerator> {
    if !(delta_t > 0.0) {
        return Err(Error::invalid("delta_t", "cell duration must be positive"));
    }
    let t = DMatrix::from_fn(2, 2, |i, j| channel.t_matrix[(i, j)]);
    let log_t = real_matrix_log(&t)?;
    let drift = Matrix2::new(log_t[(0, 0)], log_t[(0, 1)], log_t[(1, 0)], log_t[(1, 1)]) / delta_t;
    let tt_minus_i = kron2(&channel.t_matrix, &channel.t_matrix) - Matrix4::identity();
    let y = tt_minus_i
        .lu()
        .solve(&vectorize(&channel.r_matrix))
        .ok_or_else(|| Error::Singular("T (x) T - I".into()))?;
    let c = kron_sum(&drift) * y;
    let noise = devectorize(c.as_slice())?;
    Ok(IcmGenerator {
        drift,
        noise: (noise + noise.transpose()) * 0.5,
        delta_t,
    })
}

/// Closed-form exponential of a real 2x2 matrix.
pub fn expm2(a: &Matrix2<f64>) -> Matrix2<f64> {
    let half_tr = 0.5 * a.trace();
    let b = a - Matrix2::identity() * half_tr;
    // b^2 = -det(b) I
    let q = -b.determinant();
    let (c, s) = if q > 0.0 {
        let d = q.sqrt();
        (d.cosh(), if d > 0.0 { d.sinh() / d } else { 1.0 })
    } else if q < 0.0 {
        let d = (-q).sqrt();
        (d.cos(), d.sin() / d)
    } else {
        (1.0, 1.0)
    };
    (Matrix2::identity() * c + b * s) * half_tr.exp()
}

impl IcmGenerator {
    /// Exact solution of the master equation at time `t` from `sigma0`.
    pub fn evolve(&self, sigma0: &Matrix2<f64>, t: f64) -> Result<Matrix2<f64>> {
        let k = kron_sum(&self.drift);
        let e = expm2(&(self.drift * t));
        let ek = kron2(&e, &e);
        // (e^{Kt} - I) K^{-1} c
        let kinv_c = k
            .lu()
            .solve(&vectorize(&self.noise))
            .ok_or_else(|| Error::Singular("drift generator".into()))?;
        let v = ek * vectorize(sigma0) + (ek - Matrix4::identity()) * kinv_c;
        let m = devectorize(v.as_slice())?;
        Ok((m + m.transpose()) * 0.5)
    }

    /// Right-hand side `D sigma + sigma D^T + C`.
    pub fn rate(&self, sigma: &Matrix2<f64>) -> Matrix2<f64> {
        self.drift * sigma + sigma * self.drift.transpose() + self.noise
    }
}
