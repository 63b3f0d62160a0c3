//! Sprays, Finsler metrics, S-curvature and the projective Ricci curvature,
//! evaluated numerically with nested forward-mode dual numbers.

pub mod analysis;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod functions;
pub mod geoflow;
pub mod jets;
pub mod linalg;
pub mod probe;
pub mod riemann;
pub mod sampling;
pub mod scurv;
pub mod spray;

pub use error::{Error, Result};
