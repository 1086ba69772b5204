//! Normalized standing-wave solver.
//!
//! Computes couples (u, λ) solving -Δu = λu + f(u) on ℝ^N under the mass
//! constraint ∫|u|² dx = a², for a Sobolev-critical combined power
//! nonlinearity in dimension N ≥ 3 and an exponential-critical model in the
//! plane. The solver works on truncated radial grids: a dilation fiber map
//! supplies the mountain-pass direction, a projected descent walks the
//! mass sphere, and a bordered Newton stage refines the stationary system.
//! Companion modules certify the growth conditions and the critical
//! inequality constants the estimates rest on.

pub mod constants;
pub mod energy;
pub mod error;
pub mod fiber_map;
mod interp;
pub mod nonlinearity;
pub mod optimizer;
pub mod profiles;
pub mod radial_domain;

pub use error::{Result, SolverError};
pub use nonlinearity::NonlinearityModel;
pub use radial_domain::{make_grid, Grading, RadialFunction, RadialGrid};
