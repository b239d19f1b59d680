use thiserror::Error;

/// Errors raised anywhere in the cell pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("matrix logarithm has no real principal branch: {0}")]
    LogBranch(String),

    #[error("time-ordered integration did not converge after {doublings} doublings (last difference {last_diff:.3e}, tolerance {tol:.3e})")]
    IntegratorNoConvergence {
        doublings: u32,
        last_diff: f64,
        tol: f64,
    },

    #[error(
        "channel has no unique attractive fixed point (spectral radius of T = {spectral_radius})"
    )]
    NoUniqueFixedPoint { spectral_radius: f64 },

    #[error("state too close to the ground state for this measure (nu - 1 = {nu_minus_one:.3e}, r = {r:.3e})")]
    GroundStateDivergence { nu_minus_one: f64, r: f64 },

    #[error("population inversion: P_n = {pn:.6e} <= P_m = {pm:.6e}")]
    PopulationInversion { pn: f64, pm: f64 },

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("Fock cutoff not converged: max covariance change {change:.3e} exceeds {limit:.3e}")]
    CutoffNotConverged { change: f64, limit: f64 },

    #[error("linear system is singular: {0}")]
    Singular(String),
}

impl Error {
    pub fn invalid(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            arg,
            reason: reason.into(),
        }
    }

    /// Short stable identifier written to the `error_code` CSV column.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument { .. } => "invalid_argument",
            Error::LogBranch(_) => "log_branch",
            Error::IntegratorNoConvergence { .. } => "integrator_no_convergence",
            Error::NoUniqueFixedPoint { .. } => "no_unique_fixed_point",
            Error::GroundStateDivergence { .. } => "ground_state_divergence",
            Error::PopulationInversion { .. } => "population_inversion",
            Error::Unphysical(_) => "unphysical",
            Error::Quadrature(_) => "quadrature",
            Error::CutoffNotConverged { .. } => "cutoff_not_converged",
            Error::Singular(_) => "singular",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
