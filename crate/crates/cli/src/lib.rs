//! Command-line front end for `selstbc`: run descriptions, SNR sweeps, the
//! figure presets, CSV output, comparison reports and the acceptance checks.

pub mod check;
pub mod compare;
pub mod config;
pub mod error;
pub mod grid;
pub mod presets;
pub mod sweep;

pub use error::{CliError, CliResult};
