//! Simulation and analysis of the universal scaling of driven, strongly
//! interacting frozen Rydberg gases.

pub mod analysis;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod lda;
pub mod meanfield;
pub mod params;
pub mod quadrature;
pub mod quantum;
pub mod roots;
pub mod superatom;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
