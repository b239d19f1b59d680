//! Brute-force interaction-picture evolution of the probe and a few cavity
//! modes in a truncated number basis.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cell::{trajectory, CellConfig, CellKinematics};
use crate::error::{Error, Result};
use crate::phase_space::ProbeState;

pub const MAX_FOCK_MODES: usize = 3;
pub const MAX_FOCK_CUTOFF: usize = 10;
pub const MAX_FOCK_DIMENSION: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockConfig {
    pub n_modes: usize,
    /// Highest occupation kept per oscillator.
    pub fock_cutoff: usize,
    pub ode_tol: f64,
    pub base: CellConfig,
}

impl FockConfig {
    pub fn new(base: CellConfig, n_modes: usize, fock_cutoff: usize) -> Result<Self> {
        let cfg = Self {
            n_modes,
            fock_cutoff,
            ode_tol: 1e-10,
            base,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.n_modes == 0 || self.n_modes > MAX_FOCK_MODES {
            return Err(Error::invalid(
                "n_modes",
                format!("need 1..={MAX_FOCK_MODES}, got {}", self.n_modes),
            ));
        }
        if self.fock_cutoff == 0 || self.fock_cutoff > MAX_FOCK_CUTOFF {
            return Err(Error::invalid(
                "fock_cutoff",
                format!("need 1..={MAX_FOCK_CUTOFF}, got {}", self.fock_cutoff),
            ));
        }
        if self.dimension() > MAX_FOCK_DIMENSION {
            return Err(Error::invalid(
                "fock_cutoff",
                format!("Hilbert dimension {} too large", self.dimension()),
            ));
        }
        if !(self.ode_tol > 0.0) {
            return Err(Error::invalid("ode_tol", "must be positive"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        (self.fock_cutoff + 1).pow(self.n_modes as u32 + 1)
    }
}

/// Probe covariance after cavity 1 plus integration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockEvolution {
    pub probe: ProbeState,
    /// Largest `| <psi|psi> - 1 |` seen at an accepted step.
    pub max_norm_error: f64,
    /// Max-norm covariance change when the cutoff is doubled.
    pub cutoff_change: f64,
    pub steps: usize,
}

/// `c = q cos(phi) + p sin(phi) = (a e^{-i phi} + a^dag e^{i phi}) / sqrt 2` acting on
/// the oscillator with digit stride `stride`, accumulated as `out += coef * c psi`.
fn add_quadrature(
    psi: &[Complex64],
    out: &mut [Complex64],
    levels: usize,
    stride: usize,
    phi: f64,
    coef: f64,
) {
    let lower = Complex64::from_polar(coef * std::f64::consts::FRAC_1_SQRT_2, -phi);
    let raise = lower.conj();
    for (idx, o) in out.iter_mut().enumerate() {
        let k = (idx / stride) % levels;
        let mut acc = Complex64::new(0.0, 0.0);
        if k + 1 < levels {
            acc += lower * ((k + 1) as f64).sqrt() * psi[idx + stride];
        }
        if k > 0 {
            acc += raise * (k as f64).sqrt() * psi[idx - stride];
        }
        *o += acc;
    }
}

struct System {
    kin: CellKinematics,
    omega0: f64,
    lambda0: f64,
    n_modes: usize,
    levels: usize,
    scratch: Vec<Complex64>,
}

impl System {
    /// Probe is the most significant digit; field mode `n` has stride `levels^(n-1)`.
    fn probe_stride(&self) -> usize {
        self.levels.pow(self.n_modes as u32)
    }

    /// `out = -i H(tau) psi`.
    fn rhs(&mut self, tau: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let p = trajectory(&self.kin, tau.clamp(0.0, self.kin.tau_max)).expect("tau in cavity 1");
        self.scratch
            .iter_mut()
            .for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut stride = 1;
        for n in 1..=self.n_modes {
            let k = n as f64 * PI;
            let g = 2.0 * self.lambda0 * (k * p.x_local).sin() / k.sqrt();
            add_quadrature(
                psi,
                &mut self.scratch,
                self.levels,
                stride,
                k * p.t_local,
                g,
            );
            stride *= self.levels;
        }
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        add_quadrature(
            &self.scratch,
            out,
            self.levels,
            self.probe_stride(),
            self.omega0 * tau,
            1.0,
        );
        for v in out.iter_mut() {
            *v = Complex64::new(v.im, -v.re);
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Outcome {
    psi: Vec<Complex64>,
    max_norm_error: f64,
    steps: usize,
}

fn integrate(sys: &mut System, mut psi: Vec<Complex64>, tau_end: f64, tol: f64) -> Result<Outcome> {
    let dim = psi.len();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    let mut tau = 0.0;
    let mut h = 1e-3 * tau_end.max(1e-3);
    let mut steps = 0;
    let mut max_norm_error: f64 = 0.0;
    sys.rhs(tau, &psi, &mut k[0]);
    while tau < tau_end {
        if steps > 1_000_000 {
            return Err(Error::Unphysical(
                "Fock integration exceeded the step budget".into(),
            ));
        }
        h = h.min(tau_end - tau);
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = psi[i];
                for j in 0..s {
                    if A[s][j] != 0.0 {
                        acc += k[j][i] * (h * A[s][j]);
                    }
                }
                stage[i] = acc;
            }
            sys.rhs(tau + C[s] * h, &stage, &mut k[s]);
        }
        // stage now holds the 5th-order solution (FSAL: row 6 equals the b weights).
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                e += k[j][i] * (A[6].get(j).copied().unwrap_or(0.0) - B4[j]);
            }
            err = err.max((e * h).norm());
        }
        if err <= tol {
            tau += h;
            psi.copy_from_slice(&stage);
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            max_norm_error = max_norm_error.max((norm - 1.0).abs());
            k.swap(0, 6);
            steps += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            0.9 * (tol / err).powf(0.2)
        };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(Outcome {
        psi,
        max_norm_error,
        steps,
    })
}

/// Symmetrised probe second moments `sigma_ij = <{X_i, X_j}> - 2 <X_i><X_j>`.
fn probe_covariance(psi: &[Complex64], levels: usize, stride: usize) -> Matrix2<f64> {
    let mut aa = Complex64::new(0.0, 0.0); // <a a>
    let mut ada = 0.0; // <a^dag a>
    let mut a = Complex64::new(0.0, 0.0); // <a>
    for (idx, z) in psi.iter().enumerate() {
        let k = (idx / stride) % levels;
        ada += k as f64 * z.norm_sqr();
        if k >= 1 {
            a += psi[idx - stride].conj() * z * (k as f64).sqrt();
        }
        if k >= 2 {
            aa += psi[idx - 2 * stride].conj() * z * ((k * (k - 1)) as f64).sqrt();
        }
    }
    // q = (a + a^dag)/sqrt2, p = -i (a - a^dag)/sqrt2
    let qq = 2.0 * ada + 1.0 + 2.0 * aa.re;
    let pp = 2.0 * ada + 1.0 - 2.0 * aa.re;
    let qp = 2.0 * aa.im;
    let mq = std::f64::consts::SQRT_2 * a.re;
    let mp = std::f64::consts::SQRT_2 * a.im;
    Matrix2::new(
        qq - 2.0 * mq * mq,
        qp - 2.0 * mq * mp,
        qp - 2.0 * mq * mp,
        pp - 2.0 * mp * mp,
    )
}

fn run(cfg: &FockConfig, cutoff: usize) -> Result<(Matrix2<f64>, Outcome)> {
    let kin = CellKinematics::new(cfg.base.a0)?;
    let levels = cutoff + 1;
    let dim = levels.pow(cfg.n_modes as u32 + 1);
    let mut sys = System {
        kin,
        omega0: cfg.base.omega0,
        lambda0: cfg.base.lambda0,
        n_modes: cfg.n_modes,
        levels,
        scratch: vec![Complex64::new(0.0, 0.0); dim],
    };
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0);
    let out = integrate(&mut sys, psi, kin.tau_max, cfg.ode_tol)?;
    let cov = probe_covariance(&out.psi, levels, sys.probe_stride());
    Ok((cov, out))
}

/// Probe covariance after crossing cavity 1 from the joint vacuum, checked
/// against a run with twice the cutoff.
pub fn fock_truncated_evolution(cfg: &FockConfig) -> Result<FockEvolution> {
    cfg.validate()?;
    let (cov, out) = run(cfg, cfg.fock_cutoff)?;
    let (cov2, _) = run(cfg, 2 * cfg.fock_cutoff)?;
    let change = (cov - cov2).amax();
    let limit = 10.0 * cfg.ode_tol;
    if change >= limit {
        return Err(Error::CutoffNotConverged { change, limit });
    }
    Ok(FockEvolution {
        probe: ProbeState::new_unchecked(cov),
        max_norm_error: out.max_norm_error,
        cutoff_change: change,
        steps: out.steps,
    })
}
