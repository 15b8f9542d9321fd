//! Boundary data maps for one-dimensional Schrödinger operators.
//!
//! Everything is built for `-u'' + V u = z u` on `[0, R]` with separated
//! boundary conditions of Robin type,
//!
//! ```text
//! cos θ0 · u(0) + sin θ0 · u'(0) = 0,    cos θR · u(R) − sin θR · u'(R) = 0.
//! ```
//!
//! The numerical backbone is a single complex ODE solve for the fundamental
//! system `θ, φ` at `x = R`. The characteristic determinant `Δ` and every
//! boundary data map are algebraic in those four numbers, so a map costs one
//! solve per `z` and stays finite at the poles of the auxiliary normalizations.

pub mod bdmap;
pub mod error;
pub mod lft;
pub mod mat2;
pub mod odecore;
pub mod potential;
pub mod quadrature;
pub mod resolvent;
pub mod spectrum;
pub mod traces;
pub mod verify;
pub mod weyl;

pub use error::{Error, Result};
pub use mat2::Mat2;
pub use num_complex::Complex64;

/// Default integration tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
