use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `arccosh(1 + y)` without forming `1 + y`, with a series below `y = 1e-8`.
pub fn arccosh_one_plus(y: f64) -> f64 {
    if y < 1e-8 {
        // arccosh(1 + y) = sqrt(2y) (1 - y/12 + 3y^2/160 - ...)
        (2.0 * y).sqrt() * (1.0 - y / 12.0 + 3.0 * y * y / 160.0)
    } else {
        (1.0 + y + (y * (2.0 + y)).sqrt()).ln()
    }
}

/// Per-cavity timing and the three regime diagnostics for one acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellKinematics {
    pub a0: f64,
    /// Proper time to cross one cavity, `c tau_max / L`.
    pub tau_max: f64,
    /// Lab time to cross one cavity, `c t_max / L`.
    pub t_max: f64,
    pub gamma_max: f64,
    /// Cavity-crossing time in units of the light-crossing time.
    pub m_ratio: f64,
}

impl CellKinematics {
    pub fn new(a0: f64) -> Result<Self> {
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::invalid(
                "a0",
                format!("acceleration must be positive, got {a0}"),
            ));
        }
        let tau_max = arccosh_one_plus(a0) / a0;
        let t_max = (1.0 + 2.0 / a0).sqrt();
        Ok(Self {
            a0,
            tau_max,
            t_max,
            gamma_max: 1.0 + a0,
            m_ratio: t_max,
        })
    }

    /// Probe phase accumulated inside one cavity, `Theta = Omega0 tau_max`.
    pub fn theta(&self, omega0: f64) -> f64 {
        omega0 * self.tau_max
    }

    /// Number of cavity modes swept by the Doppler-shifted gap, `a0 Omega0 / pi`.
    pub fn r_sweep(&self, omega0: f64) -> f64 {
        self.a0 * omega0 / PI
    }

    /// Proper duration of one two-cavity cell.
    pub fn cell_duration(&self) -> f64 {
        2.0 * self.tau_max
    }
}

/// Acceleration at which the crossing ratio equals `m`: `a0 = 2 / (m^2 - 1)`.
pub fn a0_for_m_ratio(m: f64) -> f64 {
    2.0 / (m * m - 1.0)
}

/// Position and lab time of the probe measured inside its current cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t_local: f64,
    pub x_local: f64,
    /// 1 while accelerating, 2 while decelerating.
    pub cavity: u8,
}

/// Probe position inside the given cavity at global proper time `tau`.
///
/// The decelerating leg is the mirror image of the accelerating one:
/// `x = 1 - x_acc(2 tau_max - tau)`, `t = t_max - t_acc(2 tau_max - tau)`.
pub(crate) fn point_in_cavity(kin: &CellKinematics, tau: f64, cavity: u8) -> TrajectoryPoint {
    let a = kin.a0;
    let (t_local, x_local) = match cavity {
        1 => {
            let (t, x) = accelerating_leg(a, tau);
            (t, x)
        }
        _ => {
            let (t, x) = accelerating_leg(a, 2.0 * kin.tau_max - tau);
            (kin.t_max - t, 1.0 - x)
        }
    };
    TrajectoryPoint {
        t_local,
        x_local: x_local.clamp(0.0, 1.0),
        cavity,
    }
}

fn accelerating_leg(a: f64, tau: f64) -> (f64, f64) {
    let half = (0.5 * a * tau).sinh();
    // cosh(a tau) - 1 = 2 sinh^2(a tau / 2)
    ((a * tau).sinh() / a, 2.0 * half * half / a)
}

/// Probe trajectory over one cell, `tau` in `[0, 2 tau_max]`.
pub fn trajectory(kin: &CellKinematics, tau: f64) -> Result<TrajectoryPoint> {
    let end = 2.0 * kin.tau_max;
    if !(0.0..=end).contains(&tau) {
        return Err(Error::invalid(
            "tau",
            format!("proper time {tau} outside [0, {end}]"),
        ));
    }
    let cavity = if tau <= kin.tau_max { 1 } else { 2 };
    Ok(point_in_cavity(kin, tau, cavity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quarter_acceleration_values() {
        let k = CellKinematics::new(0.25).unwrap();
        assert_eq!(k.gamma_max, 1.25);
        assert_relative_eq!(k.m_ratio, 3.0, epsilon = 1e-15);
        assert_relative_eq!(k.tau_max, 4.0 * 2f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_acceleration() {
        assert!(CellKinematics::new(0.0).is_err());
        assert!(CellKinematics::new(-1.0).is_err());
        assert!(CellKinematics::new(f64::NAN).is_err());
    }

    #[test]
    fn arccosh_series_matches_log_form() {
        for y in [1e-12_f64, 1e-9, 5e-9, 2e-8, 1e-3, 1.0, 50.0] {
            let reference = (1.0 + y + (y * (2.0 + y)).sqrt()).ln();
            assert_relative_eq!(arccosh_one_plus(y), reference, max_relative = 1e-7);
        }
        // Continuity across the switch.
        let below = arccosh_one_plus(1e-8 * (1.0 - 1e-12));
        let above = arccosh_one_plus(1e-8);
        assert_relative_eq!(below, above, max_relative = 1e-9);
    }

    #[test]
    fn small_acceleration_stays_accurate() {
        // tau_max -> sqrt(2 / a0) as a0 -> 0.
        let k = CellKinematics::new(1e-10).unwrap();
        assert_relative_eq!(k.tau_max, (2.0 / 1e-10f64).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn trajectory_endpoints() {
        let k = CellKinematics::new(1.3).unwrap();
        let start = trajectory(&k, 0.0).unwrap();
        assert_eq!((start.t_local, start.x_local, start.cavity), (0.0, 0.0, 1));

        let mid = trajectory(&k, k.tau_max).unwrap();
        assert_eq!(mid.cavity, 1);
        assert_relative_eq!(mid.x_local, 1.0, epsilon = 1e-14);
        assert_relative_eq!(mid.t_local, k.t_max, epsilon = 1e-14);
        let entering = point_in_cavity(&k, k.tau_max, 2);
        assert_relative_eq!(entering.x_local, 0.0, epsilon = 1e-14);
        assert_relative_eq!(entering.t_local, 0.0, epsilon = 1e-14);

        let end = trajectory(&k, 2.0 * k.tau_max).unwrap();
        assert_eq!(end.cavity, 2);
        assert_relative_eq!(end.t_local, k.t_max, epsilon = 1e-14);
        assert_relative_eq!(end.x_local, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trajectory_rejects_out_of_range() {
        let k = CellKinematics::new(1.0).unwrap();
        assert!(trajectory(&k, -1e-9).is_err());
        assert!(trajectory(&k, 2.0 * k.tau_max + 1e-9).is_err());
    }

    #[test]
    fn lab_time_is_monotone_in_each_cavity() {
        let k = CellKinematics::new(3.0).unwrap();
        let n = 200;
        let mut prev = (-1.0, 0u8);
        for i in 0..=n {
            let tau = 2.0 * k.tau_max * i as f64 / n as f64;
            let p = trajectory(&k, tau).unwrap();
            if p.cavity == prev.1 {
                assert!(p.t_local > prev.0);
            }
            prev = (p.t_local, p.cavity);
        }
    }

    #[test]
    fn m_line_inverse() {
        let a = a0_for_m_ratio(3.0);
        assert_relative_eq!(a, 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            CellKinematics::new(a).unwrap().m_ratio,
            3.0,
            epsilon = 1e-14
        );
    }
}
