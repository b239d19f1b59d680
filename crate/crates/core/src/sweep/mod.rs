//! Single points, 2-D sweeps, slope maps, mode-count studies and output.

mod grid;
mod output;
mod point;
mod settings;
mod slope;
mod units;

pub use grid::{
    log_spaced, parse_number, run_sweep, worker_pool, GridSpec, SweepGrid, SweepResult,
};
pub use output::{
    csv_record, fmt_f64, write_json, write_modes_csv, write_points_csv, write_sweep_csv,
    CSV_COLUMNS, CSV_SCHEMA_LINE, MODES_CSV_COLUMNS,
};
pub use point::{run_point, Diagnostics, PointError, PointResult};
pub use settings::{FileSettings, GridValues, Number, OutputFormat};
pub use slope::{
    a0_for_theta, diagnostic_curves, mode_convergence, slope_table, temperature_slope,
    DiagnosticCurves, MLine, ModeConvergence, ModeCurve, RLine, SlopeTable, ThetaLine,
    MODE_SPLIT_TOL,
};
pub use units::{physical_units, PhysicalUnits, SPEED_OF_LIGHT, STANDARD_GRAVITY};
