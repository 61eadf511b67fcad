//! Spectral counting on metric cones.

pub mod asymptotics;
pub mod cone;
pub mod energy;
pub mod oracle;
pub mod error;
pub mod spectra;

pub use error::{Error, Result};
