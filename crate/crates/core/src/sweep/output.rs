use std::io::Write;

use serde::Serialize;

use super::grid::SweepResult;
use super::point::PointResult;
use super::slope::ModeConvergence;
use crate::error::{Error, Result};

/// First line of every sweep CSV; bump the version when columns change.
pub const CSV_SCHEMA_LINE: &str = "# unruh-cavity sweep schema v1";

pub const CSV_COLUMNS: [&str; 22] = [
    "a0",
    "omega0",
    "lambda0",
    "n_modes",
    "nu",
    "r",
    "theta",
    "T0",
    "dT0_da0",
    "delta",
    "epsilon",
    "p0",
    "p1",
    "p2",
    "t_edr_01",
    "t_edr_02",
    "t_edr_12",
    "theta_phase",
    "m_ratio",
    "r_sweep",
    "spectral_gap",
    "error_code",
];

/// 17 significant digits; empty for missing values.
pub fn fmt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => String::new(),
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::invalid("out", e.to_string())
}

pub fn csv_record(p: &PointResult, dt0_da0: Option<f64>) -> Vec<String> {
    let sf = p.standard_form;
    let th = p.thermality;
    let d = p.diagnostics;
    let f = fmt_f64;
    vec![
        f(Some(p.a0)),
        f(Some(p.omega0)),
        f(Some(p.lambda0)),
        p.n_modes_used.to_string(),
        f(sf.map(|s| s.nu)),
        f(sf.map(|s| s.r)),
        f(sf.map(|s| s.theta)),
        f(th.map(|t| t.temperature)),
        f(dt0_da0),
        f(th.map(|t| t.delta)),
        f(th.map(|t| t.epsilon)),
        f(th.map(|t| t.populations.p0)),
        f(th.map(|t| t.populations.p1)),
        f(th.map(|t| t.populations.p2)),
        f(th.map(|t| t.t_edr_01)),
        f(th.map(|t| t.t_edr_02)),
        f(th.map(|t| t.t_edr_12)),
        f(d.map(|d| d.theta_phase)),
        f(d.map(|d| d.m_ratio)),
        f(d.map(|d| d.r_sweep)),
        f(d.and_then(|d| d.spectral_gap)),
        p.error
            .as_ref()
            .map(|e| e.code.to_string())
            .unwrap_or_default(),
    ]
}

/// Writes the schema line, the header and one row per point in grid order.
pub fn write_points_csv<W: Write>(mut out: W, rows: &[(&PointResult, Option<f64>)]) -> Result<()> {
    writeln!(out, "{CSV_SCHEMA_LINE}").map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io_err)?;
    for (p, s) in rows {
        w.write_record(csv_record(p, *s)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let rows: Vec<_> = sweep
        .points
        .iter()
        .zip(sweep.dt0_da0.iter().copied())
        .collect();
    write_points_csv(out, &rows)
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(io_err)?;
    writeln!(out).map_err(io_err)
}

pub const MODES_CSV_COLUMNS: [&str; 7] = [
    "n_modes",
    "a0",
    "T0",
    "dT0_da0",
    "rel_dev_T0",
    "rel_dev_slope",
    "reference_n_modes",
];

pub fn write_modes_csv<W: Write>(mut out: W, mc: &ModeConvergence) -> Result<()> {
    writeln!(out, "# unruh-cavity modes schema v1").map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MODES_CSV_COLUMNS).map_err(io_err)?;
    for c in &mc.curves {
        for (i, a0) in mc.a0_values.iter().enumerate() {
            w.write_record([
                c.n_modes.to_string(),
                fmt_f64(Some(*a0)),
                fmt_f64(Some(c.t0[i])),
                fmt_f64(Some(c.slope[i])),
                fmt_f64(Some(c.rel_dev_t0[i])),
                fmt_f64(Some(c.rel_dev_slope[i])),
                mc.reference_n_modes.to_string(),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CellConfig;
    use crate::sweep::run_point;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, 123456.789, -0.1] {
            let s = fmt_f64(Some(x));
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(fmt_f64(None), "");
    }

    #[test]
    fn csv_has_schema_and_all_columns() {
        let ok = run_point(&CellConfig::new(1.0, 0.2, 0.01, 3).unwrap());
        let bad = run_point(&CellConfig::new(1.0, 0.2, 0.0, 3).unwrap());
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &[(&ok, Some(0.5)), (&bad, None)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_SCHEMA_LINE);
        assert_eq!(lines[1], CSV_COLUMNS.join(","));
        assert_eq!(lines[2].split(',').count(), 22);
        assert!(lines[2].ends_with(','));
        assert!(lines[3].ends_with("no_unique_fixed_point"));
    }
}
