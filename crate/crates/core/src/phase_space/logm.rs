//! Principal real matrix logarithm via real Schur form and inverse scaling
//! and squaring.
//!
//! `M = Q T Q^T` with `T` quasi upper triangular. Square roots are taken on
//! `T` block by block until `T^(1/2^k)` is close to the identity, the
//! logarithm of the remainder is evaluated with a Gauss-Legendre partial
//! fraction expansion, and the result is scaled back by `2^k`.

use nalgebra::{DMatrix, Matrix2, Schur};

use crate::error::{Error, Result};

/// `||T^(1/2^k) - I||_1` threshold at which square rooting stops.
const SQRT_THRESHOLD: f64 = 0.1;
const MAX_SQRTS: usize = 60;
/// Gauss-Legendre nodes for `log(I + X)`; ample for `||X|| <= 0.1`.
const LOG_NODES: usize = 12;

/// Principal real logarithm of `m`.
///
/// Fails with [`Error::LogBranch`] if `m` has an eigenvalue on the closed
/// negative real axis (including zero), where no real principal logarithm
/// exists.
pub fn real_matrix_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::invalid(
            "m",
            "matrix logarithm needs a non-empty square matrix",
        ));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("m", "matrix has non-finite entries"));
    }
    let n = m.nrows();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::LogBranch("real Schur decomposition did not converge".into()))?;
    let (q, mut t) = schur.unpack();

    let blocks = diagonal_blocks(&t, scale);
    for &(start, size) in &blocks {
        check_block_branch(&t, start, size, scale)?;
    }

    let mut k = 0usize;
    loop {
        let dev = one_norm(&(&t - DMatrix::identity(n, n)));
        if dev <= SQRT_THRESHOLD {
            break;
        }
        if k == MAX_SQRTS {
            return Err(Error::LogBranch(format!(
                "square-root iteration stalled (||T - I||_1 = {dev:.3e})"
            )));
        }
        t = quasi_triangular_sqrt(&t, &blocks)?;
        k += 1;
    }

    let x = t - DMatrix::identity(n, n);
    let log_t = log_one_plus(&x)?;
    let factor = (k as f64).exp2();
    Ok(&q * log_t * q.transpose() * factor)
}

/// Splits the quasi triangular factor into 1x1 and 2x2 diagonal blocks.
fn diagonal_blocks(t: &DMatrix<f64>, scale: f64) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > f64::EPSILON * scale {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

fn check_block_branch(t: &DMatrix<f64>, start: usize, size: usize, scale: f64) -> Result<()> {
    let tiny = 1e3 * f64::EPSILON * scale;
    if size == 1 {
        let d = t[(start, start)];
        if d <= tiny {
            return Err(Error::LogBranch(format!(
                "real eigenvalue {d:.6e} on the closed negative axis"
            )));
        }
        return Ok(());
    }
    let b = block2(t, start);
    let tr = b.trace();
    let det = b.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        for ev in [(tr + sq) / 2.0, (tr - sq) / 2.0] {
            if ev <= tiny {
                return Err(Error::LogBranch(format!(
                    "real eigenvalue {ev:.6e} on the closed negative axis"
                )));
            }
        }
    } else if tr <= 0.0 && (-disc).sqrt() <= tiny {
        return Err(Error::LogBranch(
            "complex pair on the negative real axis".into(),
        ));
    }
    Ok(())
}

fn block2(t: &DMatrix<f64>, start: usize) -> Matrix2<f64> {
    Matrix2::new(
        t[(start, start)],
        t[(start, start + 1)],
        t[(start + 1, start)],
        t[(start + 1, start + 1)],
    )
}

/// Principal square root of a 2x2 real matrix whose eigenvalues avoid the
/// closed negative axis: `sqrt(B) = (B + sqrt(det B) I) / sqrt(tr B + 2 sqrt(det B))`.
fn sqrt2(b: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let det = b.determinant();
    if det <= 0.0 {
        return Err(Error::LogBranch(format!("2x2 block has det {det:.3e}")));
    }
    let s = det.sqrt();
    let denom = b.trace() + 2.0 * s;
    if denom <= 0.0 {
        return Err(Error::LogBranch(
            "2x2 block has no principal square root".into(),
        ));
    }
    Ok((b + Matrix2::identity() * s) / denom.sqrt())
}

/// Square root of a quasi upper triangular matrix by block back-substitution.
fn quasi_triangular_sqrt(t: &DMatrix<f64>, blocks: &[(usize, usize)]) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let mut u = DMatrix::zeros(n, n);
    for &(s, size) in blocks {
        if size == 1 {
            u[(s, s)] = t[(s, s)].sqrt();
        } else {
            let r = sqrt2(&block2(t, s))?;
            u.view_mut((s, s), (2, 2)).copy_from(&r);
        }
    }
    // Off-diagonal blocks, column block by column block, moving up from the diagonal.
    for j in 0..blocks.len() {
        let (cj, nj) = blocks[j];
        for i in (0..j).rev() {
            let (ri, ni) = blocks[i];
            let mut rhs = t.view((ri, cj), (ni, nj)).clone_owned();
            for &(rk, nk) in &blocks[i + 1..j] {
                rhs -= u.view((ri, rk), (ni, nk)) * u.view((rk, cj), (nk, nj));
            }
            let uii = u.view((ri, ri), (ni, ni)).clone_owned();
            let ujj = u.view((cj, cj), (nj, nj)).clone_owned();
            let x = solve_sylvester_small(&uii, &ujj, &rhs)?;
            u.view_mut((ri, cj), (ni, nj)).copy_from(&x);
        }
    }
    Ok(u)
}

/// Solves `A X + X B = C` for blocks of size at most 2 via the Kronecker form.
fn solve_sylvester_small(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (p, q) = (a.nrows(), b.nrows());
    let dim = p * q;
    // Row-major unknown index r*q + s for X[r, s].
    let mut k = DMatrix::zeros(dim, dim);
    for r in 0..p {
        for s in 0..q {
            let row = r * q + s;
            for m in 0..p {
                k[(row, m * q + s)] += a[(r, m)];
            }
            for m in 0..q {
                k[(row, r * q + m)] += b[(m, s)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_fn(dim, |idx, _| c[(idx / q, idx % q)]);
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LogBranch("singular Sylvester system in square root".into()))?;
    Ok(DMatrix::from_fn(p, q, |r, s| sol[r * q + s]))
}

/// `log(I + X) = sum_j w_j X (I + x_j X)^{-1}` with Gauss-Legendre nodes on [0, 1].
fn log_one_plus(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let (nodes, weights) = gauss_legendre_unit(LOG_NODES);
    let mut acc = DMatrix::zeros(n, n);
    for (xj, wj) in nodes.iter().zip(weights.iter()) {
        let denom = DMatrix::identity(n, n) + x * *xj;
        let lu = denom.lu();
        // X (I + x_j X)^{-1} = (I + x_j X)^{-1} X since they commute.
        let term = lu
            .solve(x)
            .ok_or_else(|| Error::LogBranch("singular Pade denominator".into()))?;
        acc += term * *wj;
    }
    Ok(acc)
}

/// Gauss-Legendre nodes and weights mapped to [0, 1].
pub(crate) fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, z);
        dp = if d != 0.0 { d } else { dp };
        nodes.push(0.5 * (1.0 + z));
        weights.push(1.0 / ((1.0 - z * z) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let mf = m as f64;
    let d = mf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{max_norm, rotation_matrix};
    use nalgebra::Complex;
    use proptest::prelude::*;

    /// exp via complex eigendecomposition; independent of the Schur path.
    fn expm_eig(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let mc: DMatrix<Complex<f64>> = m.map(|x| Complex::new(x, 0.0));
        let eig = nalgebra::Schur::new(mc.clone());
        // Complex Schur is upper triangular; diagonalise by back substitution.
        let (q, t) = eig.unpack();
        let mut v = DMatrix::<Complex<f64>>::identity(n, n);
        for j in 0..n {
            for i in (0..j).rev() {
                let mut s = Complex::new(0.0, 0.0);
                for k in i + 1..=j {
                    s += t[(i, k)] * v[(k, j)];
                }
                v[(i, j)] = s / (t[(j, j)] - t[(i, i)]);
            }
        }
        let evecs = &q * &v;
        let inv = evecs.clone().try_inverse().unwrap();
        let d = DMatrix::from_diagonal(&t.diagonal().map(|z| z.exp()));
        (evecs * d * inv).map(|z| z.re)
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = real_matrix_log(&DMatrix::identity(4, 4)).unwrap();
        assert!(max_norm(&l) < 1e-15);
    }

    #[test]
    fn log_of_rotation_is_generator() {
        let r = rotation_matrix(0.5);
        let m = DMatrix::from_row_slice(2, 2, r.as_slice()).transpose();
        let l = real_matrix_log(&m).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        assert!(max_norm(&(l - expected)) < 1e-14);
    }

    #[test]
    fn round_trip_contracted_rotation() {
        let r = rotation_matrix(0.3) * 0.9;
        let m = DMatrix::from_fn(2, 2, |i, j| r[(i, j)]);
        let l = real_matrix_log(&m).unwrap();
        assert!(max_norm(&(expm_eig(&l) - &m)) < 1e-10);
    }

    #[test]
    fn round_trip_five_by_five_affine() {
        // Same block shape as the affine cell matrix.
        let t = rotation_matrix(0.7) * 0.95;
        let mut m = DMatrix::zeros(5, 5);
        m[(0, 0)] = 1.0;
        let k = crate::phase_space::kron2(&t, &t);
        m.view_mut((1, 1), (4, 4)).copy_from(&k);
        m[(1, 0)] = 0.1;
        m[(4, 0)] = 0.1;
        let l = real_matrix_log(&m).unwrap();
        assert!(max_norm(&(expm_eig(&l) - &m)) < 1e-10);
    }

    #[test]
    fn negative_eigenvalue_is_branch_error() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(real_matrix_log(&m), Err(Error::LogBranch(_))));
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            real_matrix_log(&singular),
            Err(Error::LogBranch(_))
        ));
        // Rotation by pi: double eigenvalue -1.
        let r = rotation_matrix(std::f64::consts::PI);
        let m = DMatrix::from_fn(2, 2, |i, j| r[(i, j)]);
        assert!(matches!(real_matrix_log(&m), Err(Error::LogBranch(_))));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_unit(LOG_NODES);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(7)).sum();
        assert!((s - 1.0 / 8.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip_random_well_conditioned(entries in prop::collection::vec(-0.5..0.5f64, 16)) {
            // exp of a random generator has no eigenvalues on the negative axis.
            let gen = DMatrix::from_row_slice(4, 4, &entries);
            let m = expm_eig(&gen);
            let l = real_matrix_log(&m).unwrap();
            prop_assert!(max_norm(&(expm_eig(&l) - &m)) < 1e-10 * max_norm(&m).max(1.0));
        }
    }
}
