//! Single-cell dynamics: trajectory, mode couplings, the interaction
//! quadratic form, per-cavity symplectic evolution and the cell channel.

mod channel;
mod config;
mod integrator;
mod kinematics;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use channel::{reduce_channel, reduce_probe_rows, GaussianChannel};
pub use config::{
    CellConfig, IntegratorConfig, StepScheme, CONVERGENCE_N_MODES, DEFAULT_LAMBDA0, DEFAULT_N_MODES,
};
pub use integrator::Converged;
pub use kinematics::{
    a0_for_m_ratio, arccosh_one_plus, trajectory, CellKinematics, TrajectoryPoint,
};

use crate::error::{Error, Result};
use crate::phase_space::{rotation_matrix, SymplecticMatrix, SYMPLECTIC_TOL};
use integrator::{converge, propagate_full, propagate_probe_rows, CavityPath};

/// Above this many modes the cell channel is built from the probe rows only.
pub const FULL_MATRIX_MAX_MODES: usize = 64;

pub fn cell_kinematics(a0: f64) -> Result<CellKinematics> {
    CellKinematics::new(a0)
}

/// Dimensionless amplitude `g_n = 2 lambda0 sin(n pi x) / sqrt(n pi)` multiplying
/// `q_P (q_n cos(w_n t) + p_n sin(w_n t))` in the interaction Hamiltonian.
pub fn mode_coupling(n: usize, x_local: f64, cfg: &CellConfig) -> Result<f64> {
    if n == 0 || n > cfg.n_modes {
        return Err(Error::invalid(
            "n",
            format!("mode index {n} outside 1..={}", cfg.n_modes),
        ));
    }
    if !(0.0..=1.0).contains(&x_local) {
        return Err(Error::invalid(
            "x_local",
            format!("{x_local} outside [0, 1]"),
        ));
    }
    let k = n as f64 * PI;
    Ok(2.0 * cfg.lambda0 * (k * x_local).sin() / k.sqrt())
}

/// Symmetric `2(N+1) x 2(N+1)` matrix `F(tau)` with `H_I = X^T F X / 2`.
pub fn interaction_generator(tau: f64, cfg: &CellConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let kin = CellKinematics::new(cfg.a0)?;
    let point = trajectory(&kin, tau)?;
    let path = CavityPath::new(cfg, point.cavity, 0.0)?;
    let mut c = path.new_couplings();
    path.couplings_at(tau, &mut c);
    let d = cfg.dimension();
    let mut f = DMatrix::zeros(d, d);
    for (n, w) in c.field.iter().enumerate() {
        let k = 2 * (n + 1);
        for (i, pv) in c.probe.iter().enumerate() {
            for (j, fv) in w.iter().enumerate() {
                f[(i, k + j)] = pv * fv;
                f[(k + j, i)] = pv * fv;
            }
        }
    }
    Ok(f)
}

fn check_cavity(cavity: u8) -> Result<()> {
    if cavity == 1 || cavity == 2 {
        Ok(())
    } else {
        Err(Error::invalid(
            "cavity",
            format!("must be 1 or 2, got {cavity}"),
        ))
    }
}

/// Interaction-picture symplectic matrix of cavity 1 (accelerating) or 2
/// (decelerating), step-doubled to `richardson_tol`.
pub fn integrate_cavity(cavity: u8, cfg: &CellConfig) -> Result<SymplecticMatrix> {
    integrate_cavity_detailed(cavity, cfg, 0.0).map(|(s, _)| s)
}

/// As [`integrate_cavity`] with the field-mode lab-time origin shifted by
/// `t_origin`; also reports the step count that converged.
pub fn integrate_cavity_detailed(
    cavity: u8,
    cfg: &CellConfig,
    t_origin: f64,
) -> Result<(SymplecticMatrix, Converged)> {
    check_cavity(cavity)?;
    cfg.validate()?;
    let path = CavityPath::new(cfg, cavity, t_origin)?;
    let scheme = cfg.integrator.scheme;
    let conv = converge(cfg, |steps| propagate_full(&path, steps, scheme))?;
    let s = SymplecticMatrix::new(conv.matrix.clone(), SYMPLECTIC_TOL)?;
    Ok((s, conv))
}

/// Probe rows `[T | B]` of the cavity's symplectic matrix, computed in
/// `O(N)` per step; enough to build the reduced channel.
pub fn integrate_cavity_probe_rows(
    cavity: u8,
    cfg: &CellConfig,
    t_origin: f64,
) -> Result<Converged> {
    check_cavity(cavity)?;
    cfg.validate()?;
    let path = CavityPath::new(cfg, cavity, t_origin)?;
    let scheme = cfg.integrator.scheme;
    converge(cfg, |steps| propagate_probe_rows(&path, steps, scheme))
}

/// Both cavity channels, the composed cell channel and integration bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellChannel {
    pub cavity1: GaussianChannel,
    pub cavity2: GaussianChannel,
    pub cell: GaussianChannel,
    /// `||S Omega S^T - Omega||_max` for each cavity when the full matrix was built.
    pub symplectic_deviation: Option<[f64; 2]>,
    pub steps: [usize; 2],
    pub kinematics: CellKinematics,
}

/// Schrodinger-picture cell channel: both interaction-picture cavity maps
/// followed by two free probe rotations, `T = R(2 Theta) T2 T1`,
/// `R = R(2 Theta) (T2 R1 T2^T + R2) R(2 Theta)^T`.
pub fn cell_channel(cfg: &CellConfig) -> Result<CellChannel> {
    cfg.validate()?;
    let kin = CellKinematics::new(cfg.a0)?;
    let full = cfg.n_modes <= FULL_MATRIX_MAX_MODES;
    let mut channels = [GaussianChannel::identity(); 2];
    let mut deviations = [0.0; 2];
    let mut steps = [0; 2];
    for (idx, cavity) in [1u8, 2].into_iter().enumerate() {
        if full {
            let (s, conv) = integrate_cavity_detailed(cavity, cfg, 0.0)?;
            channels[idx] = reduce_channel(&s);
            deviations[idx] = s.deviation();
            steps[idx] = conv.steps;
        } else {
            let conv = integrate_cavity_probe_rows(cavity, cfg, 0.0)?;
            channels[idx] = reduce_probe_rows(&conv.matrix);
            steps[idx] = conv.steps;
        }
    }
    let [cavity1, cavity2] = channels;
    let free = GaussianChannel::new(
        rotation_matrix(2.0 * kin.theta(cfg.omega0)),
        nalgebra::Matrix2::zeros(),
    );
    let cell = free.after(&cavity2.after(&cavity1));
    Ok(CellChannel {
        cavity1,
        cavity2,
        cell,
        symplectic_deviation: full.then_some(deviations),
        steps,
        kinematics: kin,
    })
}
