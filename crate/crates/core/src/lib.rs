//! WaveHoltz: Helmholtz solutions by filtering time-periodic wave solutions,
//! with spectral tools that predict how fast the fixed-point iteration converges.

pub mod dg;
pub mod error;
pub mod experiment;
pub mod fd;
pub mod filter;
pub mod iteration;
pub mod linalg;
pub mod spectral;
pub mod system;
pub mod time;

pub use error::{Error, Result};
