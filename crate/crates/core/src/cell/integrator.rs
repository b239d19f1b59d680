//! Time-ordered exponential of `Omega F(tau)` over one cavity.
//!
//! The interaction is a product of one probe quadrature and one field
//! quadrature, `H = (w_p . X)(w_f . X)`, so `F = w_p w_f^T + w_f w_p^T` and
//! `(Omega F)^2 = 0`. The midpoint exponential of each step is therefore
//! exactly `I + h Omega F(tau_mid)`, a rank-two symplectic update applied
//! in `O(N D)` operations.

use nalgebra::DMatrix;

use super::config::{CellConfig, StepScheme};
use super::kinematics::{point_in_cavity, CellKinematics};
use crate::error::{Error, Result};

/// Triple-jump weights: `c1 = 1 / (2 - 2^(1/3))`, `c2 = 1 - 2 c1`.
fn substep_weights(scheme: StepScheme) -> &'static [f64] {
    const MIDPOINT: [f64; 1] = [1.0];
    const C1: f64 = 1.351_207_191_959_657_8;
    const C2: f64 = -1.702_414_383_919_315_5;
    const TRIPLE: [f64; 3] = [C1, C2, C1];
    match scheme {
        StepScheme::Midpoint => &MIDPOINT,
        StepScheme::TripleJump => &TRIPLE,
    }
}

/// Coupling vectors at one instant: the probe phase vector and, per mode,
/// `g_n (cos(n pi t), sin(n pi t))`.
#[derive(Debug, Clone)]
pub(crate) struct Couplings {
    pub probe: [f64; 2],
    pub field: Vec<[f64; 2]>,
}

/// One cavity's interaction, parametrised by global proper time.
#[derive(Debug, Clone)]
pub(crate) struct CavityPath {
    pub kin: CellKinematics,
    pub cavity: u8,
    pub omega0: f64,
    pub lambda0: f64,
    pub n_modes: usize,
    /// Offset added to the local lab time in the field-mode phases.
    pub t_origin: f64,
    inv_sqrt_npi: Vec<f64>,
}

impl CavityPath {
    pub fn new(cfg: &CellConfig, cavity: u8, t_origin: f64) -> Result<Self> {
        if cavity != 1 && cavity != 2 {
            return Err(Error::invalid(
                "cavity",
                format!("must be 1 or 2, got {cavity}"),
            ));
        }
        let kin = CellKinematics::new(cfg.a0)?;
        let inv_sqrt_npi = (1..=cfg.n_modes)
            .map(|n| 1.0 / (n as f64 * std::f64::consts::PI).sqrt())
            .collect();
        Ok(Self {
            kin,
            cavity,
            omega0: cfg.omega0,
            lambda0: cfg.lambda0,
            n_modes: cfg.n_modes,
            t_origin,
            inv_sqrt_npi,
        })
    }

    pub fn tau_range(&self) -> (f64, f64) {
        let tm = self.kin.tau_max;
        match self.cavity {
            1 => (0.0, tm),
            _ => (tm, 2.0 * tm),
        }
    }

    pub fn new_couplings(&self) -> Couplings {
        Couplings {
            probe: [1.0, 0.0],
            field: vec![[0.0; 2]; self.n_modes],
        }
    }

    /// Fills `out` at proper time `tau`, using rotation recurrences for the
    /// per-mode harmonics.
    pub fn couplings_at(&self, tau: f64, out: &mut Couplings) {
        let (sp, cp) = (self.omega0 * tau).sin_cos();
        out.probe = [cp, sp];
        let pt = point_in_cavity(&self.kin, tau, self.cavity);
        let pi = std::f64::consts::PI;
        let (sx, cx) = (pi * pt.x_local).sin_cos();
        let (st, ct) = (pi * (pt.t_local + self.t_origin)).sin_cos();
        // Running values of sin(n pi x) and exp(i n pi t).
        let (mut sin_nx, mut cos_nx) = (sx, cx);
        let (mut re, mut im) = (ct, st);
        let scale = 2.0 * self.lambda0;
        for (n, slot) in out.field.iter_mut().enumerate() {
            let g = scale * sin_nx * self.inv_sqrt_npi[n];
            *slot = [g * re, g * im];
            let next_sin = sin_nx * cx + cos_nx * sx;
            cos_nx = cos_nx * cx - sin_nx * sx;
            sin_nx = next_sin;
            let next_re = re * ct - im * st;
            im = re * st + im * ct;
            re = next_re;
        }
    }
}

/// Row-major propagator state with scratch buffers.
struct Propagator<'a> {
    path: &'a CavityPath,
    dim: usize,
    couplings: Couplings,
    y_field: Vec<f64>,
    y_probe: Vec<f64>,
}

impl<'a> Propagator<'a> {
    fn new(path: &'a CavityPath) -> Self {
        let dim = 2 * (path.n_modes + 1);
        Self {
            path,
            dim,
            couplings: path.new_couplings(),
            y_field: vec![0.0; dim],
            y_probe: vec![0.0; dim],
        }
    }

    /// `S <- (I + h Omega F(tau)) S` on a full row-major `D x D` matrix.
    fn left_step(&mut self, s: &mut [f64], h: f64, tau: f64) {
        let d = self.dim;
        self.path.couplings_at(tau, &mut self.couplings);
        let c = &self.couplings;
        self.y_field.iter_mut().for_each(|v| *v = 0.0);
        for (n, w) in c.field.iter().enumerate() {
            let base = 2 * (n + 1) * d;
            let (rq, rp) = s[base..base + 2 * d].split_at(d);
            for ((y, q), p) in self.y_field.iter_mut().zip(rq).zip(rp) {
                *y += w[0] * q + w[1] * p;
            }
        }
        {
            let (rq, rp) = s[..2 * d].split_at(d);
            for ((y, q), p) in self.y_probe.iter_mut().zip(rq).zip(rp) {
                *y = c.probe[0] * q + c.probe[1] * p;
            }
        }
        let (a0, a1) = (h * c.probe[1], -h * c.probe[0]);
        for (j, y) in self.y_field.iter().enumerate() {
            s[j] += a0 * y;
            s[d + j] += a1 * y;
        }
        for (n, w) in c.field.iter().enumerate() {
            let base = 2 * (n + 1) * d;
            let (b0, b1) = (h * w[1], -h * w[0]);
            if b0 == 0.0 && b1 == 0.0 {
                continue;
            }
            for j in 0..d {
                let y = self.y_probe[j];
                s[base + j] += b0 * y;
                s[base + d + j] += b1 * y;
            }
        }
    }

    /// `E <- E (I + h Omega F(tau))` on the two probe rows `E` (row-major `2 x D`).
    fn right_step(&mut self, e: &mut [f64], h: f64, tau: f64) {
        let d = self.dim;
        self.path.couplings_at(tau, &mut self.couplings);
        let c = &self.couplings;
        for row in e.chunks_exact_mut(d) {
            // (E Omega w_p) and (E Omega w_f); Omega (a, b) = (b, -a).
            let ep = row[0] * c.probe[1] - row[1] * c.probe[0];
            let mut ef = 0.0;
            for (n, w) in c.field.iter().enumerate() {
                let k = 2 * (n + 1);
                ef += row[k] * w[1] - row[k + 1] * w[0];
            }
            row[0] += h * ef * c.probe[0];
            row[1] += h * ef * c.probe[1];
            for (n, w) in c.field.iter().enumerate() {
                let k = 2 * (n + 1);
                row[k] += h * ep * w[0];
                row[k + 1] += h * ep * w[1];
            }
        }
    }
}

/// Substep lengths and midpoints for `steps` uniform steps over the cavity,
/// in chronological order.
fn schedule(path: &CavityPath, steps: usize, scheme: StepScheme) -> Vec<(f64, f64)> {
    let (t0, t1) = path.tau_range();
    let h = (t1 - t0) / steps as f64;
    let weights = substep_weights(scheme);
    let mut out = Vec::with_capacity(steps * weights.len());
    for k in 0..steps {
        let mut start = t0 + k as f64 * h;
        for w in weights {
            let hs = w * h;
            out.push((hs, start + 0.5 * hs));
            start += hs;
        }
    }
    out
}

/// Full symplectic matrix of one cavity for a fixed step count.
pub(crate) fn propagate_full(path: &CavityPath, steps: usize, scheme: StepScheme) -> DMatrix<f64> {
    let mut prop = Propagator::new(path);
    let d = prop.dim;
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        s[i * d + i] = 1.0;
    }
    for (h, tau) in schedule(path, steps, scheme) {
        prop.left_step(&mut s, h, tau);
    }
    DMatrix::from_row_slice(d, d, &s)
}

/// The two probe rows of the cavity's symplectic matrix, accumulated from the
/// latest factor backwards.
pub(crate) fn propagate_probe_rows(
    path: &CavityPath,
    steps: usize,
    scheme: StepScheme,
) -> DMatrix<f64> {
    let mut prop = Propagator::new(path);
    let d = prop.dim;
    let mut e = vec![0.0; 2 * d];
    e[0] = 1.0;
    e[d + 1] = 1.0;
    for (h, tau) in schedule(path, steps, scheme).into_iter().rev() {
        prop.right_step(&mut e, h, tau);
    }
    DMatrix::from_row_slice(2, d, &e)
}

/// Outcome of step doubling.
#[derive(Debug, Clone)]
pub struct Converged {
    pub matrix: DMatrix<f64>,
    pub steps: usize,
    pub last_diff: f64,
}

/// Doubles the step count until successive results agree to `richardson_tol`.
pub(crate) fn converge<F>(cfg: &CellConfig, mut run: F) -> Result<Converged>
where
    F: FnMut(usize) -> DMatrix<f64>,
{
    let integ = cfg.integrator;
    let mut steps = integ.initial_steps;
    let mut prev = run(steps);
    let mut last_diff = f64::INFINITY;
    for _ in 0..integ.max_doublings {
        steps *= 2;
        let next = run(steps);
        last_diff = (&next - &prev).amax();
        prev = next;
        if last_diff < integ.richardson_tol {
            return Ok(Converged {
                matrix: prev,
                steps,
                last_diff,
            });
        }
    }
    Err(Error::IntegratorNoConvergence {
        doublings: integ.max_doublings,
        last_diff,
        tol: integ.richardson_tol,
    })
}
