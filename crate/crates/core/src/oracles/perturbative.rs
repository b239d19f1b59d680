//! Second-order Dyson expansion of the cavity channels.
//!
//! With probe phase vector `u(tau)` and mode vectors
//! `v_n(tau) = g_n (cos(w_n t), sin(w_n t))`, the probe blocks of the
//! time-ordered exponential are, to order `lambda0^2`,
//!
//! `T = I + sum_n int int_{tau1 > tau2} g_n(1) g_n(2) sin(w_n (t2 - t1)) Omega u1 u2^T`
//! `R = sum_n Omega M_n M_n^T Omega^T`,  `M_n = int u v_n^T dtau`.

use std::f64::consts::PI;

use nalgebra::Matrix2;

use super::quadrature::{integrate, DEFAULT_MAX_SEGMENTS};
use crate::cell::{trajectory, CellConfig, CellKinematics, GaussianChannel};
use crate::error::{Error, Result};

/// Absolute tolerance for every integral, applied at unit coupling.
pub const DYSON_QUAD_TOL: f64 = 1e-12;

const OMEGA: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

struct Kernel {
    kin: CellKinematics,
    omega0: f64,
    n_modes: usize,
    /// Multiplies every `g_n`; the channel must depend only on its square.
    sign: f64,
}

impl Kernel {
    fn lab(&self, tau: f64) -> (f64, f64) {
        // Endpoints can stray past 2 tau_max by rounding; clamp into range.
        let tau = tau.clamp(0.0, 2.0 * self.kin.tau_max);
        let p = trajectory(&self.kin, tau).expect("tau clamped into the cell");
        (p.t_local, p.x_local)
    }

    fn probe(&self, tau: f64) -> [f64; 2] {
        let (s, c) = (self.omega0 * tau).sin_cos();
        [c, s]
    }

    /// `g_n` at unit coupling: `2 sin(n pi x) / sqrt(n pi)`.
    fn amplitude(&self, n: usize, x: f64) -> f64 {
        let k = n as f64 * PI;
        self.sign * 2.0 * (k * x).sin() / k.sqrt()
    }
}

fn mat(v: &[f64]) -> Matrix2<f64> {
    Matrix2::new(v[0], v[1], v[2], v[3])
}

fn omega() -> Matrix2<f64> {
    Matrix2::new(OMEGA[0][0], OMEGA[0][1], OMEGA[1][0], OMEGA[1][1])
}

fn cavity_channel(k: &Kernel, cavity: u8, lambda0: f64, tol: f64) -> Result<GaussianChannel> {
    let tm = k.kin.tau_max;
    let (ta, tb) = match cavity {
        1 => (0.0, tm),
        2 => (tm, 2.0 * tm),
        _ => {
            return Err(Error::invalid(
                "cavity",
                format!("must be 1 or 2, got {cavity}"),
            ))
        }
    };
    let n_modes = k.n_modes;

    // M_n for all n at once, row-major 2x2 per mode.
    let m = integrate(
        |tau, out| {
            let u = k.probe(tau);
            let (t, x) = k.lab(tau);
            for n in 1..=n_modes {
                let g = k.amplitude(n, x);
                let (s, c) = (n as f64 * PI * t).sin_cos();
                let v = [g * c, g * s];
                let o = &mut out[4 * (n - 1)..4 * n];
                o[0] = u[0] * v[0];
                o[1] = u[0] * v[1];
                o[2] = u[1] * v[0];
                o[3] = u[1] * v[1];
            }
        },
        ta,
        tb,
        4 * n_modes,
        tol,
        DEFAULT_MAX_SEGMENTS,
    )?;
    let om = omega();
    let mut r = Matrix2::zeros();
    for n in 0..n_modes {
        let mn = mat(&m[4 * n..4 * n + 4]);
        r += om * mn * mn.transpose() * om.transpose();
    }

    // Ordered double integral, inner over tau2 in [ta, tau1].
    let span = tb - ta;
    let inner_tol = 0.1 * tol / span;
    let mut failure = None;
    let a = integrate(
        |tau1, out| {
            let u1 = k.probe(tau1);
            let (t1, x1) = k.lab(tau1);
            let g1: Vec<f64> = (1..=n_modes).map(|n| k.amplitude(n, x1)).collect();
            let inner = integrate(
                |tau2, o| {
                    let u2 = k.probe(tau2);
                    let (t2, x2) = k.lab(tau2);
                    let mut w = 0.0;
                    for n in 1..=n_modes {
                        w += g1[n - 1] * k.amplitude(n, x2) * (n as f64 * PI * (t2 - t1)).sin();
                    }
                    o[0] = w * u2[0];
                    o[1] = w * u2[1];
                },
                ta,
                tau1,
                2,
                inner_tol,
                DEFAULT_MAX_SEGMENTS,
            );
            match inner {
                Ok(v) => {
                    out[0] = u1[0] * v[0];
                    out[1] = u1[0] * v[1];
                    out[2] = u1[1] * v[0];
                    out[3] = u1[1] * v[1];
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        },
        ta,
        tb,
        4,
        tol,
        DEFAULT_MAX_SEGMENTS,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let l2 = lambda0 * lambda0;
    let t = Matrix2::identity() + om * mat(&a) * l2;
    Ok(GaussianChannel::new(t, r * l2))
}

/// Interaction-picture channel of one cavity, to second order in `lambda0`.
pub fn perturbative_cavity_channel(cfg: &CellConfig, cavity: u8) -> Result<GaussianChannel> {
    perturbative_cavity_channel_signed(cfg, cavity, 1.0)
}

fn kernel(cfg: &CellConfig, sign: f64) -> Result<Kernel> {
    cfg.validate()?;
    Ok(Kernel {
        kin: CellKinematics::new(cfg.a0)?,
        omega0: cfg.omega0,
        n_modes: cfg.n_modes,
        sign,
    })
}

fn perturbative_cavity_channel_signed(
    cfg: &CellConfig,
    cavity: u8,
    sign: f64,
) -> Result<GaussianChannel> {
    let k = kernel(cfg, sign)?;
    cavity_channel(&k, cavity, cfg.lambda0, DYSON_QUAD_TOL)
}

/// Cell channel to second order: `T = R(2 Theta)(I + A1 + A2)`,
/// `R = R(2 Theta)(R1 + R2)R(2 Theta)^T`.
pub fn perturbative_channel(cfg: &CellConfig) -> Result<GaussianChannel> {
    let k = kernel(cfg, 1.0)?;
    let c1 = cavity_channel(&k, 1, cfg.lambda0, DYSON_QUAD_TOL)?;
    let c2 = cavity_channel(&k, 2, cfg.lambda0, DYSON_QUAD_TOL)?;
    let th = 2.0 * k.kin.tau_max * cfg.omega0;
    let (s, c) = th.sin_cos();
    let rot = Matrix2::new(c, s, -s, c);
    let t = rot * (c1.t_matrix + c2.t_matrix - Matrix2::identity());
    let r = rot * (c1.r_matrix + c2.r_matrix) * rot.transpose();
    Ok(GaussianChannel::new(t, r))
}
