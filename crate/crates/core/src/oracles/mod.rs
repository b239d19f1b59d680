//! Independent reference calculations for the Gaussian pipeline. They share
//! only the configuration and trajectory with it.

mod fock;
mod perturbative;
pub mod quadrature;
mod verify;

pub use fock::{
    fock_truncated_evolution, FockConfig, FockEvolution, MAX_FOCK_CUTOFF, MAX_FOCK_DIMENSION,
    MAX_FOCK_MODES,
};
pub use perturbative::{perturbative_cavity_channel, perturbative_channel, DYSON_QUAD_TOL};
pub use verify::{
    dyson_config, dyson_residual, fock_gaussian_difference, verify_suite, VerifyRow, DYSON_LAMBDA,
    DYSON_NORMALISED_LIMIT, FOCK_ENTRY_LIMIT, FOCK_NORM_LIMIT, FOCK_SMOKE_GRID, QUARTIC_RATIO_TOL,
};
