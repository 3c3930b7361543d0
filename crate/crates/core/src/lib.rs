//! Pseudo-spectral incompressible Navier-Stokes on the periodic 3-torus,
//! with Littlewood-Paley block analysis, frequency-localized energy flux
//! diagnostics and Besov-type regularity monitors.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod error;
pub mod flux_analysis;
pub mod littlewood_paley;
pub mod nse_solver;
pub mod oracle;
pub mod regularity_monitor;
pub mod spectral_field;

pub use error::{Error, Result};
