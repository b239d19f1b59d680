use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{column_slope, worker_pool, SweepResult};
use super::point::run_point;
use crate::cell::{a0_for_m_ratio, CellConfig, CellKinematics, IntegratorConfig};
use crate::error::{Error, Result};

/// `dT0/da0` on a log-spaced (or any increasing) `a0` grid: three-point
/// differences in `ln a0`, one-sided at the ends, then divided by `a0`.
/// NaN temperatures poison only the stencils that use them.
pub fn temperature_slope(a0: &[f64], t0: &[f64]) -> Result<Vec<f64>> {
    let n = a0.len();
    if n < 2 {
        return Err(Error::invalid(
            "a0_values",
            format!("need at least 2 points to differentiate, got {n}"),
        ));
    }
    if t0.len() != n {
        return Err(Error::invalid(
            "t0",
            format!("length {} does not match {n} a0 values", t0.len()),
        ));
    }
    if a0.iter().any(|a| !(*a > 0.0)) || a0.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "a0_values",
            "must be positive and strictly increasing",
        ));
    }
    let u: Vec<f64> = a0.iter().map(|a| a.ln()).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = if i == 0 {
            (t0[1] - t0[0]) / (u[1] - u[0])
        } else if i == n - 1 {
            (t0[n - 1] - t0[n - 2]) / (u[n - 1] - u[n - 2])
        } else {
            let hm = u[i] - u[i - 1];
            let hp = u[i + 1] - u[i];
            (hm * hm * (t0[i + 1] - t0[i]) + hp * hp * (t0[i] - t0[i - 1])) / (hm * hp * (hm + hp))
        };
        out.push(d / a0[i]);
    }
    Ok(out)
}

/// `a0` at which the per-cavity probe phase equals `phase` for gap `omega0`.
pub fn a0_for_theta(phase: f64, omega0: f64) -> Option<f64> {
    if !(phase > 0.0) || !(omega0 > 0.0) {
        return None;
    }
    let theta = |ln_a: f64| {
        CellKinematics::new(ln_a.exp())
            .map(|k| k.theta(omega0))
            .unwrap_or(f64::NAN)
    };
    // Theta decreases monotonically in a0.
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    if !(theta(lo) >= phase && theta(hi) <= phase) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta(mid) > phase {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaLine {
    pub n: u32,
    /// `(omega0, a0)` pairs with `Theta = n pi / 2`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MLine {
    pub m: u32,
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RLine {
    pub r: u32,
    /// `(a0, omega0)` pairs with `a0 Omega0 / pi = r`.
    pub points: Vec<(f64, f64)>,
}

/// Overlay curves for the `(a0, Omega0)` plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticCurves {
    pub theta_lines: Vec<ThetaLine>,
    pub m_lines: Vec<MLine>,
    pub r_lines: Vec<RLine>,
}

pub fn diagnostic_curves(a0_values: &[f64], omega0_values: &[f64]) -> DiagnosticCurves {
    let (a_lo, a_hi) = (a0_values[0], a0_values[a0_values.len() - 1]);
    let (w_lo, w_hi) = (omega0_values[0], omega0_values[omega0_values.len() - 1]);
    let in_a = |a: f64| a >= a_lo && a <= a_hi;
    let mut theta_lines = Vec::new();
    for n in 1.. {
        let pts: Vec<(f64, f64)> = omega0_values
            .iter()
            .filter_map(|&w| {
                a0_for_theta(n as f64 * PI / 2.0, w)
                    .filter(|a| in_a(*a))
                    .map(|a| (w, a))
            })
            .collect();
        if pts.is_empty() {
            // Higher lines sit further right; stop once the largest gap no longer reaches the grid.
            if a0_for_theta(n as f64 * PI / 2.0, w_hi).is_none_or(|a| a < a_lo) {
                break;
            }
        }
        theta_lines.push(ThetaLine { n, points: pts });
        if n > 10_000 {
            break;
        }
    }
    let mut m_lines = Vec::new();
    for m in 3.. {
        let a = a0_for_m_ratio(m as f64);
        if a < a_lo {
            break;
        }
        if in_a(a) {
            m_lines.push(MLine { m, a0: a });
        }
    }
    let r_lines = (1..=3)
        .map(|r| RLine {
            r,
            points: a0_values
                .iter()
                .map(|&a| (a, r as f64 * PI / a))
                .filter(|&(_, w)| w >= w_lo && w <= w_hi)
                .collect(),
        })
        .collect();
    DiagnosticCurves {
        theta_lines,
        m_lines,
        r_lines,
    }
}

/// Temperature and its `a0` derivative per `Omega0` row, with overlays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeTable {
    pub a0_values: Vec<f64>,
    pub omega0_values: Vec<f64>,
    /// `t0[j][i]` at `(a0_values[i], omega0_values[j])`.
    pub t0: Vec<Vec<Option<f64>>>,
    pub slope: Vec<Vec<Option<f64>>>,
    pub curves: DiagnosticCurves,
}

/// Slope map of a finished sweep; needs at least three `a0` values.
pub fn slope_table(sweep: &SweepResult) -> Result<SlopeTable> {
    let a0 = &sweep.grid.a0_values;
    let w = &sweep.grid.omega0_values;
    if a0.len() < 3 {
        return Err(Error::invalid(
            "a0_values",
            format!("need at least 3 points, got {}", a0.len()),
        ));
    }
    let t0: Vec<Vec<Option<f64>>> = (0..w.len()).map(|j| sweep.temperature_column(j)).collect();
    let slope = t0.iter().map(|col| column_slope(a0, col)).collect();
    Ok(SlopeTable {
        a0_values: a0.clone(),
        omega0_values: w.clone(),
        t0,
        slope,
        curves: diagnostic_curves(a0, w),
    })
}

/// One mode count's curve compared with the largest mode count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCurve {
    pub n_modes: usize,
    pub t0: Vec<f64>,
    pub slope: Vec<f64>,
    pub rel_dev_t0: Vec<f64>,
    pub rel_dev_slope: Vec<f64>,
    /// Smallest `a0` at which the slope departs from the reference by more than 1%.
    pub split_a0: Option<f64>,
    /// Largest `a0` below `split_a0` (the whole range when there is no split).
    pub agrees_up_to: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeConvergence {
    pub a0_values: Vec<f64>,
    pub omega0: f64,
    pub lambda0: f64,
    pub reference_n_modes: usize,
    pub curves: Vec<ModeCurve>,
}

pub const MODE_SPLIT_TOL: f64 = 0.01;

pub fn mode_convergence(
    a0_values: &[f64],
    omega0: f64,
    lambda0: f64,
    n_list: &[usize],
    integrator: IntegratorConfig,
    workers: usize,
) -> Result<ModeConvergence> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "n_list",
            "must be non-empty and strictly ascending",
        ));
    }
    let jobs: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| a0_values.iter().map(move |&a| (n, a)))
        .collect();
    for &(n, a) in &jobs {
        CellConfig::new(a, omega0, lambda0, n)?.with_integrator(integrator)?;
    }
    let pool = worker_pool(workers)?;
    let temps: Vec<Result<f64>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, a0)| {
                let cfg = CellConfig {
                    a0,
                    omega0,
                    lambda0,
                    n_modes: n,
                    integrator,
                };
                let res = run_point(&cfg);
                match (res.temperature(), res.error) {
                    (Some(t), None) => Ok(t),
                    (_, Some(e)) => Err(Error::Unphysical(format!(
                        "N = {n}, a0 = {a0}: {}",
                        e.message
                    ))),
                    _ => Err(Error::Unphysical(format!(
                        "N = {n}, a0 = {a0}: no temperature"
                    ))),
                }
            })
            .collect()
    });
    let temps: Vec<f64> = temps.into_iter().collect::<Result<_>>()?;
    let na = a0_values.len();
    let mut curves: Vec<ModeCurve> = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let t0 = temps[k * na..(k + 1) * na].to_vec();
        let slope = if na >= 2 {
            temperature_slope(a0_values, &t0)?
        } else {
            vec![f64::NAN; na]
        };
        curves.push(ModeCurve {
            n_modes: n,
            t0,
            slope,
            rel_dev_t0: Vec::new(),
            rel_dev_slope: Vec::new(),
            split_a0: None,
            agrees_up_to: None,
        });
    }
    let reference = curves.last().expect("non-empty").clone();
    for c in &mut curves {
        c.rel_dev_t0 =
            c.t0.iter()
                .zip(&reference.t0)
                .map(|(x, r)| ((x - r) / r).abs())
                .collect();
        c.rel_dev_slope = c
            .slope
            .iter()
            .zip(&reference.slope)
            .map(|(x, r)| ((x - r) / r).abs())
            .collect();
        let split = c.rel_dev_slope.iter().position(|d| !(*d <= MODE_SPLIT_TOL));
        c.split_a0 = split.map(|i| a0_values[i]);
        c.agrees_up_to = match split {
            Some(0) => None,
            Some(i) => Some(a0_values[i - 1]),
            None => a0_values.last().copied(),
        };
    }
    Ok(ModeConvergence {
        a0_values: a0_values.to_vec(),
        omega0,
        lambda0,
        reference_n_modes: reference.n_modes,
        curves,
    })
}
