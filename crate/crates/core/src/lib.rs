#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod cell;
pub mod collision;
pub mod error;
pub mod oracles;
pub mod phase_space;
pub mod sweep;
pub mod thermometry;

pub use error::{Error, Result};
