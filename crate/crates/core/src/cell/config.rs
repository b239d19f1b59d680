use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Splitting used inside one integrator step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepScheme {
    /// One exponential of `Omega F` at the step midpoint (second order).
    Midpoint,
    /// Three midpoint exponentials with triple-jump weights (fourth order).
    #[default]
    TripleJump,
}

/// Controls for the time-ordered exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    /// Steps per cavity on the first pass.
    pub initial_steps: usize,
    /// Max-norm change between successive step doublings accepted as converged.
    pub richardson_tol: f64,
    pub max_doublings: u32,
    pub scheme: StepScheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            initial_steps: 256,
            richardson_tol: 1e-9,
            max_doublings: 8,
            scheme: StepScheme::default(),
        }
    }
}

/// Dimensionless scenario: `a0 = aL/c^2`, `omega0 = Omega_P L / c`,
/// `lambda0 = lambda L / sqrt(hbar c)` and the number of cavity modes kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub a0: f64,
    pub omega0: f64,
    pub lambda0: f64,
    pub n_modes: usize,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

/// Coupling used throughout the sweeps.
pub const DEFAULT_LAMBDA0: f64 = 0.01;
/// Mode count adequate for `a0 <~ 6`.
pub const DEFAULT_N_MODES: usize = 20;
/// Mode count used for convergence studies.
pub const CONVERGENCE_N_MODES: usize = 210;

impl CellConfig {
    pub fn new(a0: f64, omega0: f64, lambda0: f64, n_modes: usize) -> Result<Self> {
        let cfg = Self {
            a0,
            omega0,
            lambda0,
            n_modes,
            integrator: IntegratorConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig) -> Result<Self> {
        self.integrator = integrator;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0) || !self.a0.is_finite() {
            return Err(Error::invalid(
                "a0",
                format!("must be positive, got {}", self.a0),
            ));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::invalid(
                "omega0",
                format!("must be positive, got {}", self.omega0),
            ));
        }
        if !(self.lambda0 >= 0.0) || !self.lambda0.is_finite() {
            return Err(Error::invalid(
                "lambda0",
                format!("must be non-negative, got {}", self.lambda0),
            ));
        }
        if self.n_modes == 0 {
            return Err(Error::invalid("n_modes", "need at least one cavity mode"));
        }
        let integ = &self.integrator;
        if integ.initial_steps == 0 {
            return Err(Error::invalid("initial_steps", "must be positive"));
        }
        if !(integ.richardson_tol > 0.0) {
            return Err(Error::invalid("richardson_tol", "must be positive"));
        }
        Ok(())
    }

    /// Phase-space dimension `2 (N + 1)`.
    pub fn dimension(&self) -> usize {
        2 * (self.n_modes + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(CellConfig::new(1.0, 0.2, 0.01, 20).is_ok());
        assert!(CellConfig::new(0.0, 0.2, 0.01, 20).is_err());
        assert!(CellConfig::new(1.0, -0.2, 0.01, 20).is_err());
        assert!(CellConfig::new(1.0, 0.2, -0.01, 20).is_err());
        assert!(CellConfig::new(1.0, 0.2, 0.01, 0).is_err());
        assert!(CellConfig::new(1.0, 0.2, 0.0, 1).is_ok());
    }

    #[test]
    fn config_parses_from_toml_with_default_integrator() {
        let cfg: CellConfig =
            toml::from_str("a0 = 1.0\nomega0 = 0.5\nlambda0 = 0.01\nn_modes = 4\n").unwrap();
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        let cfg: CellConfig = toml::from_str(
            "a0 = 1.0\nomega0 = 0.5\nlambda0 = 0.01\nn_modes = 4\n[integrator]\nscheme = \"midpoint\"\ninitial_steps = 64\n",
        )
        .unwrap();
        assert_eq!(cfg.integrator.scheme, StepScheme::Midpoint);
        assert_eq!(cfg.integrator.initial_steps, 64);
        assert_eq!(cfg.integrator.max_doublings, 8);
    }
}
