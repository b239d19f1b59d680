//! Temperature and thermality diagnostics for a single-mode Gaussian state.
//!
//! A covariance matrix is written as `sigma = nu R(theta) diag(e^r, e^-r) R(theta)^T`
//! with symplectic eigenvalue `nu` and squeezing `r`. The thermal part
//! defines the temperature; `r` measures the departure from a Gibbs state.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{ProbeState, PHYSICALITY_TOL};

/// Below this squeezing the rotation angle is reported as zero.
pub const SQUEEZE_ANGLE_TIE: f64 = 1e-14;
/// Distance from the ground state below which squeezing diagnostics are undefined.
pub const GROUND_STATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    pub nu: f64,
    pub r: f64,
    /// Squeezing axis in `(-pi/2, pi/2]`.
    pub theta: f64,
}

pub fn standard_form(sigma: &ProbeState) -> Result<StandardForm> {
    standard_form_matrix(sigma.matrix())
}

pub fn standard_form_matrix(m: &Matrix2<f64>) -> Result<StandardForm> {
    let a = m[(0, 0)];
    let c = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let det = a * c - b * b;
    if !det.is_finite() || det < 1.0 - PHYSICALITY_TOL || a <= 0.0 {
        return Err(Error::Unphysical(format!(
            "covariance determinant {det} is below the uncertainty bound"
        )));
    }
    let nu = det.max(1.0).sqrt();
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    let rho = half_diff.hypot(b);
    let r = (rho / mean).atanh();
    let theta = if r < SQUEEZE_ANGLE_TIE {
        0.0
    } else {
        0.5 * (-2.0 * b).atan2(a - c)
    };
    Ok(StandardForm { nu, r, theta })
}

/// `arccoth(nu)` for `nu > 1`.
pub fn arccoth(nu: f64) -> f64 {
    0.5 * (2.0 / (nu - 1.0)).ln_1p()
}

/// `Omega0 / (2 arccoth nu)`; zero at `nu = 1`.
pub fn temperature(nu: f64, omega0: f64) -> Result<f64> {
    if !(nu >= 1.0) {
        return Err(Error::invalid(
            "nu",
            format!("symplectic eigenvalue {nu} is below 1"),
        ));
    }
    if nu == 1.0 {
        return Ok(0.0);
    }
    Ok(omega0 / (2.0 * arccoth(nu)))
}

/// Inverse of [`temperature`].
pub fn nu_for_temperature(temp: f64, omega0: f64) -> f64 {
    if temp <= 0.0 {
        1.0
    } else {
        1.0 / (omega0 / (2.0 * temp)).tanh()
    }
}

fn check_excited(nu: f64, r: f64) -> Result<()> {
    if nu - 1.0 < GROUND_STATE_TOL && r > 0.0 {
        return Err(Error::GroundStateDivergence {
            nu_minus_one: nu - 1.0,
            r,
        });
    }
    Ok(())
}

/// `nu (cosh r - 1) / (nu - 1)`.
pub fn delta_measure(nu: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    check_excited(nu, r)?;
    let s = (0.5 * r).sinh();
    Ok(nu * 2.0 * s * s / (nu - 1.0))
}

/// `nu^2 r^2 / (2 (nu^2 - 1)^2 arccoth nu)`.
pub fn epsilon_measure(nu: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    check_excited(nu, r)?;
    let w = (nu - 1.0) * (nu + 1.0);
    Ok(nu * nu * r * r / (2.0 * w * w * arccoth(nu)))
}

/// Populations of the three lowest Fock states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockPopulations {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Fock populations of the state with standard form `(nu, r)`, using the
/// eigenvalues `nu e^{+-r}` of the covariance matrix.
pub fn fock_populations(nu: f64, r: f64) -> Result<FockPopulations> {
    if !(nu >= 1.0) || !(r >= 0.0) {
        return Err(Error::invalid(
            "nu",
            format!("need nu >= 1 and r >= 0, got ({nu}, {r})"),
        ));
    }
    let l1 = nu * r.exp();
    let l2 = nu * (-r).exp();
    let ch = r.cosh();
    let sh = r.sinh();
    // (1 + l1)(1 + l2) and 2 + l1^2 + l2^2 - 6 l1 l2 + 2 l1^2 l2^2, rearranged
    // to avoid cancellation near the vacuum.
    let w = 1.0 + 2.0 * nu * ch + nu * nu;
    let nu2m1 = (nu - 1.0) * (nu + 1.0);
    let p0 = 2.0 / w.sqrt();
    let p1 = 2.0 * nu2m1 / w.powf(1.5);
    let p2_num = 2.0 * nu2m1 * nu2m1 + 4.0 * nu * nu * sh * sh;
    let p2 = p2_num / w.powf(2.5);
    debug_assert!((l1 * l2 - nu * nu).abs() <= 1e-9 * nu * nu);
    Ok(FockPopulations { p0, p1, p2 })
}

impl FockPopulations {
    pub fn get(&self, n: usize) -> Option<f64> {
        match n {
            0 => Some(self.p0),
            1 => Some(self.p1),
            2 => Some(self.p2),
            _ => None,
        }
    }
}

/// Detailed-balance temperature from the populations of levels `n < m`:
/// `(m - n) Omega0 / ln(P_n / P_m)`.
pub fn edr_temperature(n: usize, m: usize, pn: f64, pm: f64, omega0: f64) -> Result<f64> {
    if m <= n {
        return Err(Error::invalid(
            "m",
            format!("need n < m, got n = {n}, m = {m}"),
        ));
    }
    if !(pn > 0.0) || !(pm >= 0.0) {
        return Err(Error::invalid(
            "population",
            format!("got P_n = {pn}, P_m = {pm}"),
        ));
    }
    if pm >= pn {
        return Err(Error::PopulationInversion { pn, pm });
    }
    if pm == 0.0 {
        return Ok(0.0);
    }
    Ok((m - n) as f64 * omega0 / (pn / pm).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalityReport {
    pub standard_form: StandardForm,
    pub temperature: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub populations: FockPopulations,
    pub t_edr_01: f64,
    pub t_edr_02: f64,
    pub t_edr_12: f64,
}

pub fn thermality_report(sigma: &ProbeState, omega0: f64) -> Result<ThermalityReport> {
    let sf = standard_form(sigma)?;
    let temperature = temperature(sf.nu, omega0)?;
    let delta = delta_measure(sf.nu, sf.r)?;
    let epsilon = epsilon_measure(sf.nu, sf.r)?;
    let p = fock_populations(sf.nu, sf.r)?;
    Ok(ThermalityReport {
        standard_form: sf,
        temperature,
        delta,
        epsilon,
        populations: p,
        t_edr_01: edr_temperature(0, 1, p.p0, p.p1, omega0)?,
        t_edr_02: edr_temperature(0, 2, p.p0, p.p2, omega0)?,
        t_edr_12: edr_temperature(1, 2, p.p1, p.p2, omega0)?,
    })
}
