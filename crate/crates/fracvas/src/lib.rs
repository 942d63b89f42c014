//! Non-ergodic fractional Vasicek model: fBm simulation, drift MLEs,
//! closed-form moment generating functions, limit laws and a Monte Carlo harness.

pub mod error;
pub mod estimators;
pub mod fbm;
pub mod harness;
pub mod limits;
pub mod mgf;
pub mod model;
pub mod quadrature;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};
