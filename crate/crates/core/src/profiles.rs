//! Seed and sample profiles: Gaussian seeds, random Gaussian mixtures for
//! probes and property tests, the slowly decaying extremal bubble for the
//! Sobolev quotient, and truncated-logarithm concentration profiles for the
//! planar exponential stress tests.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SolverError};
use crate::radial_domain::{RadialFunction, RadialGrid};

/// e^{-r²/(2 width²)} sampled on the grid.
pub fn gaussian(grid: &Arc<RadialGrid>, width: f64) -> Result<RadialFunction> {
    if !(width.is_finite() && width > 0.0) {
        return Err(SolverError::invalid(format!(
            "gaussian width must be positive, got {width}"
        )));
    }
    RadialFunction::from_fn(Arc::clone(grid), |r| (-r * r / (2.0 * width * width)).exp())
}

/// Signed mixture of 2–4 Gaussians with widths in `width_range`; the
/// generic smooth test profile.
pub fn random_mixture(
    grid: &Arc<RadialGrid>,
    rng: &mut ChaCha8Rng,
    width_range: (f64, f64),
) -> RadialFunction {
    let k = rng.random_range(2..=4);
    let comps: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0_f64),
                rng.random_range(width_range.0..width_range.1),
            )
        })
        .collect();
    RadialFunction::from_fn(Arc::clone(grid), |r| {
        comps
            .iter()
            .map(|&(c, w)| c * (-r * r / (2.0 * w * w)).exp())
            .sum()
    })
    .expect("mixture values are finite")
}

/// Non-negative mixture, for contexts where sign changes are unwanted.
pub fn random_positive_mixture(
    grid: &Arc<RadialGrid>,
    rng: &mut ChaCha8Rng,
    width_range: (f64, f64),
) -> RadialFunction {
    let k = rng.random_range(2..=4);
    let comps: Vec<(f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.random_range(0.2..1.0_f64),
                rng.random_range(width_range.0..width_range.1),
            )
        })
        .collect();
    RadialFunction::from_fn(Arc::clone(grid), |r| {
        comps
            .iter()
            .map(|&(c, w)| c * (-r * r / (2.0 * w * w)).exp())
            .sum()
    })
    .expect("mixture values are finite")
}

/// The extremal profile (1 + (τ r)²)^{-(N-2)/2} of the Sobolev quotient,
/// shifted by its boundary value so the truncated profile stays continuous
/// at R (the quotient's numerator is unchanged by the shift).
pub fn sobolev_bubble(grid: &Arc<RadialGrid>, tau: f64) -> Result<RadialFunction> {
    let n = grid.dim();
    if n < 3 {
        return Err(SolverError::invalid(
            "the Sobolev bubble needs dimension ≥ 3".to_string(),
        ));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(SolverError::invalid(format!(
            "bubble concentration must be positive, got {tau}"
        )));
    }
    let expo = -(n as f64 - 2.0) / 2.0;
    let r_max = grid.radius();
    let boundary = (1.0 + (tau * r_max) * (tau * r_max)).powf(expo);
    RadialFunction::from_fn(Arc::clone(grid), |r| {
        (1.0 + (tau * r) * (tau * r)).powf(expo) - boundary
    })
}

/// Truncated-logarithm concentration profile on a planar grid:
/// constant √(log k)/√(2π) inside radius ρ/k, logarithmic down to zero at ρ.
/// Its Dirichlet energy is 1 in the continuum for every k > 1.
pub fn moser_profile(grid: &Arc<RadialGrid>, rho: f64, k: f64) -> Result<RadialFunction> {
    if grid.dim() != 2 {
        return Err(SolverError::invalid(
            "concentration profiles are defined on planar grids".to_string(),
        ));
    }
    if !(rho > 0.0 && rho < grid.radius()) {
        return Err(SolverError::invalid(format!(
            "support radius must lie inside the domain, got {rho}"
        )));
    }
    if !(k > 1.0) {
        return Err(SolverError::invalid(format!(
            "concentration parameter must exceed 1, got {k}"
        )));
    }
    let two_pi: f64 = std::f64::consts::TAU;
    let log_k = k.ln();
    let plateau = (log_k / two_pi).sqrt();
    let slope = 1.0 / (two_pi * log_k).sqrt();
    RadialFunction::from_fn(Arc::clone(grid), |r| {
        if r <= rho / k {
            plateau
        } else if r < rho {
            slope * (rho / r).ln()
        } else {
            0.0
        }
    })
}

/// Interpolate tabulated samples (r_k, u_k) onto a grid through the
/// shape-preserving cubic, zero beyond the last sample. Used to load stored
/// profiles and to move continuation seeds between grids.
pub fn from_samples(grid: &Arc<RadialGrid>, rs: &[f64], us: &[f64]) -> Result<RadialFunction> {
    if rs.len() != us.len() || rs.len() < 3 {
        return Err(SolverError::invalid(
            "profile samples need matching r/u columns with at least 3 rows".to_string(),
        ));
    }
    if rs.windows(2).any(|p| p[1] <= p[0]) || rs[0] != 0.0 {
        return Err(SolverError::invalid(
            "profile samples must start at r = 0 with strictly increasing radii".to_string(),
        ));
    }
    if rs.iter().chain(us.iter()).any(|v| !v.is_finite()) {
        return Err(SolverError::invalid(
            "profile samples must be finite".to_string(),
        ));
    }
    let interp = crate::interp::MonotoneCubic::new(rs, us);
    RadialFunction::from_fn(Arc::clone(grid), |r| interp.eval(r))
}

/// Seeded generator for reproducible sampling probes.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_domain::Grading;

    #[test]
    fn moser_profile_has_unit_dirichlet_energy() {
        let grid = RadialGrid::new(2, 2.0, 6000, Grading::Geometric { ratio: 1.002 }).unwrap();
        let u = moser_profile(&grid, 1.0, 8.0).unwrap();
        let g = u.grad_norm_sq();
        assert!((g - 1.0).abs() < 2e-3, "Dirichlet energy {g}");
    }

    #[test]
    fn moser_profile_mass_shrinks_with_concentration() {
        let grid = RadialGrid::new(2, 2.0, 4000, Grading::Uniform).unwrap();
        let m1 = moser_profile(&grid, 1.0, 4.0).unwrap().mass();
        let m2 = moser_profile(&grid, 1.0, 32.0).unwrap().mass();
        assert!(m2 < m1);
    }

    #[test]
    fn bubble_requires_dimension_three() {
        let grid2 = RadialGrid::new(2, 10.0, 100, Grading::Uniform).unwrap();
        assert!(sobolev_bubble(&grid2, 1.0).is_err());
    }
}
