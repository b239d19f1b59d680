use nalgebra::Matrix2;
use serde::Serialize;

use crate::cell::{cell_channel, CellConfig, CellKinematics};
use crate::collision::{fixed_point, spectral_gap};
use crate::error::{Error, Result};
use crate::thermometry::{thermality_report, StandardForm, ThermalityReport};

/// The three regime diagnostics plus the channel's per-cell contraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Probe phase per cavity, `Omega0 tau_max`.
    pub theta_phase: f64,
    pub m_ratio: f64,
    pub r_sweep: f64,
    pub spectral_gap: Option<f64>,
}

impl Diagnostics {
    pub fn new(kin: &CellKinematics, omega0: f64) -> Self {
        Self {
            theta_phase: kin.theta(omega0),
            m_ratio: kin.m_ratio,
            r_sweep: kin.r_sweep(omega0),
            spectral_gap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointError {
    pub code: &'static str,
    pub message: String,
}

impl From<&Error> for PointError {
    fn from(e: &Error) -> Self {
        Self {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

/// Everything computed for one `(a0, Omega0)` point. Fields after the
/// diagnostics are absent when the pipeline failed; `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub a0: f64,
    pub omega0: f64,
    pub lambda0: f64,
    pub n_modes_used: usize,
    pub diagnostics: Option<Diagnostics>,
    pub sigma_infinity: Option<Matrix2<f64>>,
    pub standard_form: Option<StandardForm>,
    pub thermality: Option<ThermalityReport>,
    /// Per-cavity `||S Omega S^T - Omega||_max`, when full matrices were built.
    pub symplectic_deviation: Option<[f64; 2]>,
    pub error: Option<PointError>,
}

impl PointResult {
    fn empty(cfg: &CellConfig) -> Self {
        Self {
            a0: cfg.a0,
            omega0: cfg.omega0,
            lambda0: cfg.lambda0,
            n_modes_used: cfg.n_modes,
            diagnostics: None,
            sigma_infinity: None,
            standard_form: None,
            thermality: None,
            symplectic_deviation: None,
            error: None,
        }
    }

    pub fn temperature(&self) -> Option<f64> {
        self.thermality.map(|t| t.temperature)
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs cell channel, fixed point, standard form and thermality for one
/// configuration. Failures are recorded in the result, never raised.
pub fn run_point(cfg: &CellConfig) -> PointResult {
    let mut out = PointResult::empty(cfg);
    if let Err(e) = fill(cfg, &mut out) {
        out.error = Some(PointError::from(&e));
    }
    out
}

fn fill(cfg: &CellConfig, out: &mut PointResult) -> Result<()> {
    cfg.validate()?;
    let kin = CellKinematics::new(cfg.a0)?;
    out.diagnostics = Some(Diagnostics::new(&kin, cfg.omega0));
    let cc = cell_channel(cfg)?;
    out.symplectic_deviation = cc.symplectic_deviation;
    if let Some(d) = out.diagnostics.as_mut() {
        d.spectral_gap = Some(spectral_gap(&cc.cell));
    }
    let sigma = fixed_point(&cc.cell)?;
    out.sigma_infinity = Some(*sigma.matrix());
    let report = thermality_report(&sigma, cfg.omega0)?;
    out.standard_form = Some(report.standard_form);
    out.thermality = Some(report);
    Ok(())
}
