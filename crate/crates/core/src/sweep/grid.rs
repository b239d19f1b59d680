use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::point::{run_point, PointResult};
use super::slope::temperature_slope;
use crate::cell::{CellConfig, IntegratorConfig, DEFAULT_LAMBDA0, DEFAULT_N_MODES};
use crate::error::{Error, Result};

/// `min:max:count`, expanded log-spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let g = Self { min, max, count };
        g.values()?;
        Ok(g)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        log_spaced(self.min, self.max, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(
                "grid",
                format!("expected min:max:count, got `{s}`"),
            ));
        }
        let num = |p: &str| {
            parse_number(p)
                .ok_or_else(|| Error::invalid("grid", format!("bad number `{p}` in `{s}`")))
        };
        let count = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::invalid("grid", format!("bad count `{}` in `{s}`", parts[2])))?;
        Self::new(num(parts[0])?, num(parts[1])?, count)
    }
}

/// Parses a float, also accepting `pi`, `pi/k` and `m*pi/k` forms.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coef = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim_end_matches('*').trim().parse::<f64>().ok()?,
        None => return None,
    };
    Some(coef * PI / den)
}

/// `count` log-spaced values from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max > 0.0) || !min.is_finite() || !max.is_finite() {
        return Err(Error::invalid(
            "grid",
            format!("bounds must be positive, got {min}:{max}"),
        ));
    }
    if count == 0 {
        return Err(Error::invalid("grid", "count must be positive"));
    }
    if count == 1 {
        if min != max {
            return Err(Error::invalid(
                "grid",
                "a single-point grid needs min = max",
            ));
        }
        return Ok(vec![min]);
    }
    if !(max > min) {
        return Err(Error::invalid(
            "grid",
            format!("need min < max, got {min}:{max}"),
        ));
    }
    let (l0, l1) = (min.ln(), max.ln());
    let step = (l1 - l0) / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|i| (l0 + i as f64 * step).exp()).collect();
    v[0] = min;
    v[count - 1] = max;
    Ok(v)
}

fn check_sorted(name: &'static str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(name, "grid is empty"));
    }
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::invalid(
            name,
            "grid values must be positive and finite",
        ));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(name, "grid must be strictly increasing"));
    }
    Ok(())
}

/// A 2-D `(a0, Omega0)` sweep at fixed coupling and mode count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub a0_values: Vec<f64>,
    pub omega0_values: Vec<f64>,
    pub lambda0: f64,
    pub n_modes: usize,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

impl SweepGrid {
    pub fn new(
        a0_values: Vec<f64>,
        omega0_values: Vec<f64>,
        lambda0: f64,
        n_modes: usize,
    ) -> Result<Self> {
        let g = Self {
            a0_values,
            omega0_values,
            lambda0,
            n_modes,
            integrator: IntegratorConfig::default(),
        };
        g.validate()?;
        Ok(g)
    }

    /// 40 x 40 log-spaced grid, `a0` in `[1e-2, 1e2]`, `Omega0` in `[pi/32, 4 pi]`.
    pub fn default_map() -> Self {
        Self {
            a0_values: log_spaced(1e-2, 1e2, 40).expect("static grid"),
            omega0_values: log_spaced(PI / 32.0, 4.0 * PI, 40).expect("static grid"),
            lambda0: DEFAULT_LAMBDA0,
            n_modes: DEFAULT_N_MODES,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sorted("a0_values", &self.a0_values)?;
        check_sorted("omega0_values", &self.omega0_values)?;
        self.config(self.a0_values[0], self.omega0_values[0])?;
        Ok(())
    }

    pub fn config(&self, a0: f64, omega0: f64) -> Result<CellConfig> {
        CellConfig::new(a0, omega0, self.lambda0, self.n_modes)?.with_integrator(self.integrator)
    }

    pub fn len(&self) -> usize {
        self.a0_values.len() * self.omega0_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Points ordered by `(a0 index, Omega0 index)`, with the `a0` derivative of
/// the temperature along each `Omega0` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub points: Vec<PointResult>,
    pub dt0_da0: Vec<Option<f64>>,
}

impl SweepResult {
    pub fn index(&self, i_a0: usize, j_omega0: usize) -> usize {
        i_a0 * self.grid.omega0_values.len() + j_omega0
    }

    pub fn point(&self, i_a0: usize, j_omega0: usize) -> &PointResult {
        &self.points[self.index(i_a0, j_omega0)]
    }

    /// Temperatures along `a0` at one `Omega0` index (`None` for failed points).
    pub fn temperature_column(&self, j_omega0: usize) -> Vec<Option<f64>> {
        (0..self.grid.a0_values.len())
            .map(|i| self.point(i, j_omega0).temperature())
            .collect()
    }
}

/// Builds a pool with `workers` threads (0 = rayon default).
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))
}

/// Evaluates every grid point; results do not depend on `workers`.
pub fn run_sweep(grid: &SweepGrid, workers: usize) -> Result<SweepResult> {
    grid.validate()?;
    let jobs: Vec<(f64, f64)> = grid
        .a0_values
        .iter()
        .flat_map(|&a| grid.omega0_values.iter().map(move |&w| (a, w)))
        .collect();
    let pool = worker_pool(workers)?;
    let points: Vec<PointResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a0, omega0)| {
                let cfg = CellConfig {
                    a0,
                    omega0,
                    lambda0: grid.lambda0,
                    n_modes: grid.n_modes,
                    integrator: grid.integrator,
                };
                run_point(&cfg)
            })
            .collect()
    });
    let mut result = SweepResult {
        grid: grid.clone(),
        points,
        dt0_da0: Vec::new(),
    };
    let n_a = grid.a0_values.len();
    let n_w = grid.omega0_values.len();
    let mut slopes = vec![None; n_a * n_w];
    if n_a >= 2 {
        for j in 0..n_w {
            let col = result.temperature_column(j);
            for (i, s) in column_slope(&grid.a0_values, &col).into_iter().enumerate() {
                slopes[i * n_w + j] = s;
            }
        }
    }
    result.dt0_da0 = slopes;
    Ok(result)
}

/// Derivative along a column that may contain failed points; a slope is
/// reported only where its whole stencil succeeded.
pub(crate) fn column_slope(a0: &[f64], t0: &[Option<f64>]) -> Vec<Option<f64>> {
    let vals: Vec<f64> = t0.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    match temperature_slope(a0, &vals) {
        Ok(s) => s.into_iter().map(|v| v.is_finite().then_some(v)).collect(),
        Err(_) => vec![None; a0.len()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_spacing() {
        let v = log_spaced(1e-2, 1e2, 5).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 1e-2);
        assert_eq!(v[4], 1e2);
        assert_relative_eq!(v[2], 1.0, max_relative = 1e-15);
        assert!(log_spaced(0.0, 1.0, 3).is_err());
        assert!(log_spaced(2.0, 1.0, 3).is_err());
        assert_eq!(log_spaced(3.0, 3.0, 1).unwrap(), vec![3.0]);
    }

    #[test]
    fn parse_grid_specs() {
        let g: GridSpec = "0.01:100:40".parse().unwrap();
        assert_eq!((g.min, g.max, g.count), (0.01, 100.0, 40));
        let g: GridSpec = "pi/32:4*pi:40".parse().unwrap();
        assert_relative_eq!(g.min, PI / 32.0);
        assert_relative_eq!(g.max, 4.0 * PI);
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("1:x:3".parse::<GridSpec>().is_err());
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("3pi/4"), Some(3.0 * PI / 4.0));
    }

    #[test]
    fn default_map_shape() {
        let g = SweepGrid::default_map();
        assert_eq!(g.len(), 1600);
        assert!(g.validate().is_ok());
        assert_relative_eq!(g.omega0_values[39], 4.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn rejects_unsorted_grids() {
        assert!(SweepGrid::new(vec![1.0, 0.5], vec![0.2], 0.01, 4).is_err());
        assert!(SweepGrid::new(vec![1.0], vec![], 0.01, 4).is_err());
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let grid = SweepGrid::new(vec![0.5, 1.0, 2.0], vec![PI / 16.0, PI / 8.0], 0.01, 4).unwrap();
        let a = run_sweep(&grid, 1).unwrap();
        let b = run_sweep(&grid, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.point(2, 1).a0, 2.0);
        assert_eq!(a.point(2, 1).omega0, PI / 8.0);
        assert!(a.dt0_da0.iter().all(Option::is_some));
    }

    #[test]
    fn failed_points_only_blank_their_stencil() {
        let a0 = [1.0, 2.0, 4.0, 8.0, 16.0];
        let t = [Some(1.0), Some(2.0), None, Some(8.0), Some(16.0)];
        let s = column_slope(&a0, &t);
        assert!(s[0].is_some());
        assert!(s[1].is_none() && s[2].is_none() && s[3].is_none());
        assert!(s[4].is_some());
    }
}
