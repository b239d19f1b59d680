use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::Serialize;

use super::fock::{fock_truncated_evolution, FockConfig};
use super::perturbative::perturbative_channel;
use crate::cell::{cell_channel, integrate_cavity, reduce_channel, CellConfig, IntegratorConfig};
use crate::error::Result;

/// One line of the oracle comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

fn row(name: impl Into<String>, value: f64, limit: impl Into<String>, passed: bool) -> VerifyRow {
    VerifyRow {
        name: name.into(),
        value,
        limit: limit.into(),
        passed,
    }
}

/// Weak-coupling configuration with a tight step-doubling tolerance, so the
/// integrator error sits well below the `lambda0^4` residual.
pub fn dyson_config(lambda0: f64) -> Result<CellConfig> {
    CellConfig::new(1.0, PI / 16.0, lambda0, 5)?.with_integrator(IntegratorConfig {
        richardson_tol: 1e-13,
        max_doublings: 10,
        ..IntegratorConfig::default()
    })
}

/// Max-norm difference between the exact and second-order cell channels.
pub fn dyson_residual(lambda0: f64) -> Result<f64> {
    let cfg = dyson_config(lambda0)?;
    let pert = perturbative_channel(&cfg)?;
    let exact = cell_channel(&cfg)?.cell;
    Ok((exact.r_matrix - pert.r_matrix)
        .amax()
        .max((exact.t_matrix - pert.t_matrix).amax()))
}

/// Max-norm difference between the Fock-basis and Gaussian probe covariance
/// after cavity 1, plus the Fock run's worst norm error.
pub fn fock_gaussian_difference(
    a0: f64,
    omega0: f64,
    lambda0: f64,
    cutoff: usize,
) -> Result<(f64, f64)> {
    let base = CellConfig::new(a0, omega0, lambda0, 2)?;
    let ev = fock_truncated_evolution(&FockConfig::new(base, 2, cutoff)?)?;
    let gauss = reduce_channel(&integrate_cavity(1, &base)?).apply_matrix(&Matrix2::identity());
    Ok(((ev.probe.matrix() - gauss).amax(), ev.max_norm_error))
}

pub const DYSON_LAMBDA: f64 = 1e-3;
pub const DYSON_NORMALISED_LIMIT: f64 = 1e-4;
/// Allowed relative departure of each residual growth ratio from 16.
pub const QUARTIC_RATIO_TOL: f64 = 0.1;
pub const FOCK_ENTRY_LIMIT: f64 = 1e-3;
pub const FOCK_NORM_LIMIT: f64 = 1e-9;

/// `(a0, Omega0)` smoke grid for the Fock comparison at `lambda0 = 0.05`.
pub const FOCK_SMOKE_GRID: [(f64, f64); 5] = [
    (0.5, PI / 16.0),
    (0.5, PI / 8.0),
    (1.0, PI / 8.0),
    (2.0, PI / 16.0),
    (2.0, PI / 8.0),
];

/// Runs every oracle comparison. Errors inside a check become failed rows.
pub fn verify_suite() -> Vec<VerifyRow> {
    let mut rows = Vec::new();
    let l = DYSON_LAMBDA;
    match (
        dyson_residual(l),
        dyson_residual(2.0 * l),
        dyson_residual(4.0 * l),
    ) {
        (Ok(r1), Ok(r2), Ok(r4)) => {
            let norm = r1 / (l * l);
            rows.push(row(
                "dyson residual / lambda0^2 at lambda0 = 1e-3",
                norm,
                "<= 1e-4",
                norm <= DYSON_NORMALISED_LIMIT,
            ));
            for (name, ratio) in [
                ("dyson residual growth 1e-3 -> 2e-3", r2 / r1),
                ("dyson residual growth 2e-3 -> 4e-3", r4 / r2),
            ] {
                let ok = (ratio / 16.0 - 1.0).abs() <= QUARTIC_RATIO_TOL;
                rows.push(row(name, ratio, "16 +- 10%", ok));
            }
        }
        (a, b, c) => {
            let msg = [a.err(), b.err(), c.err()]
                .into_iter()
                .flatten()
                .next()
                .map(|e| e.to_string());
            rows.push(row(
                format!("dyson residual ({})", msg.unwrap_or_default()),
                f64::NAN,
                "<= 1e-4",
                false,
            ));
        }
    }
    match fock_gaussian_difference(1.0, PI / 16.0, 0.05, 8) {
        Ok((diff, norm)) => {
            rows.push(row(
                "fock vs gaussian, a0 = 1, pi/16, cutoff 8",
                diff,
                "<= 1e-3",
                diff <= FOCK_ENTRY_LIMIT,
            ));
            rows.push(row(
                "fock norm drift",
                norm,
                "<= 1e-9",
                norm <= FOCK_NORM_LIMIT,
            ));
        }
        Err(e) => rows.push(row(
            format!("fock vs gaussian ({e})"),
            f64::NAN,
            "<= 1e-3",
            false,
        )),
    }
    for (a0, w) in FOCK_SMOKE_GRID {
        let name = format!("fock smoke a0 = {a0}, omega0 = pi/{:.0}", PI / w);
        match fock_gaussian_difference(a0, w, 0.05, 8) {
            Ok((diff, _)) => rows.push(row(name, diff, "<= 1e-3", diff <= FOCK_ENTRY_LIMIT)),
            Err(e) => rows.push(row(format!("{name} ({e})"), f64::NAN, "<= 1e-3", false)),
        }
    }
    rows
}
