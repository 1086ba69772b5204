//! Critical constants and inequality functionals: the Sobolev quotient and
//! its extremal-bubble minimization, Gagliardo–Nirenberg ratios, the planar
//! exponential functional with its concentration stress tests, and the
//! t-power integrability probe for solver iterate histories.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, SolverError};
use crate::nonlinearity::ALPHA_0;
use crate::profiles::sobolev_bubble;
use crate::radial_domain::{Grading, RadialFunction, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    Sobolev,
    GagliardoNirenberg,
    TrudingerMoser,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub grading: String,
}

impl GridMeta {
    pub fn of(grid: &RadialGrid) -> Self {
        GridMeta {
            m: grid.len(),
            radius: grid.radius(),
            grading: match grid.grading() {
                Grading::Uniform => "uniform".to_string(),
                Grading::Geometric { ratio } => format!("geometric({ratio})"),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: InequalityKind,
    pub value: f64,
    pub parameters: BTreeMap<String, f64>,
    #[serde(rename = "gridMeta")]
    pub grid_meta: GridMeta,
}

/// Rayleigh quotient ∫|∇u|² / (∫|u|^{2*})^{2/2*} of a profile.
pub fn sobolev_quotient(u: &RadialFunction) -> Result<f64> {
    let n = u.grid().dim();
    if n < 3 {
        return Err(SolverError::invalid(
            "the Sobolev quotient needs dimension ≥ 3".to_string(),
        ));
    }
    let two_star = 2.0 * n as f64 / (n as f64 - 2.0);
    let denom = u.lp_norm_pow(two_star)?;
    if denom <= 0.0 {
        return Err(SolverError::invalid(
            "the Sobolev quotient of the zero profile is undefined".to_string(),
        ));
    }
    Ok(u.grad_norm_sq() / denom.powf(2.0 / two_star))
}

/// Estimate the best Sobolev constant by minimizing the quotient over the
/// extremal-bubble dilation family on the given grid. The quotient is
/// dilation-invariant in the continuum, so the spread across the family
/// measures discretization error; the report carries the minimizing
/// concentration.
pub fn sobolev_constant(n: u32, grid: &Arc<RadialGrid>) -> Result<InequalityReport> {
    if n < 3 {
        return Err(SolverError::invalid(
            "the Sobolev constant is defined for dimension ≥ 3 here".to_string(),
        ));
    }
    if grid.dim() != n {
        return Err(SolverError::invalid(format!(
            "grid dimension {} does not match requested {n}",
            grid.dim()
        )));
    }
    let quotient_at = |tau: f64| -> Result<f64> {
        let bubble = sobolev_bubble(grid, tau)?;
        sobolev_quotient(&bubble)
    };
    // Log-spaced concentration scan bracketing the balance between
    // truncation (small τ) and near-origin resolution (large τ).
    let lo: f64 = 0.02;
    let hi: f64 = 200.0;
    let n_scan = 41;
    let mut best = (lo, f64::INFINITY);
    let mut values = Vec::with_capacity(n_scan);
    for k in 0..n_scan {
        let tau = lo * (hi / lo).powf(k as f64 / (n_scan - 1) as f64);
        let q = quotient_at(tau)?;
        values.push(q);
        if q < best.1 {
            best = (tau, q);
        }
    }
    // Golden refinement in log τ around the scan minimum.
    let mut a = (best.0 / (hi / lo).powf(1.0 / (n_scan - 1) as f64)).ln();
    let mut b = (best.0 * (hi / lo).powf(1.0 / (n_scan - 1) as f64)).ln();
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = quotient_at(x1.exp())?;
    let mut f2 = quotient_at(x2.exp())?;
    for _ in 0..50 {
        if (b - a) < 1e-6 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = quotient_at(x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = quotient_at(x2.exp())?;
        }
    }
    let (tau_star, value) = if f1 < f2 {
        (x1.exp(), f1)
    } else {
        (x2.exp(), f2)
    };
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut parameters = BTreeMap::new();
    parameters.insert("dimension".to_string(), n as f64);
    parameters.insert("tau_star".to_string(), tau_star);
    parameters.insert("family_spread".to_string(), spread);
    Ok(InequalityReport {
        name: InequalityKind::Sobolev,
        value,
        parameters,
        grid_meta: GridMeta::of(grid),
    })
}

/// |u|_ξ / (|∇u|₂^γ |u|₂^{1-γ}) with γ = N(1/2 - 1/ξ); scale- and
/// dilation-invariant, bounded above by the interpolation constant.
pub fn gn_ratio(u: &RadialFunction, xi: f64) -> Result<f64> {
    let n = u.grid().dim() as f64;
    if !(xi.is_finite() && xi > 2.0) {
        return Err(SolverError::invalid(format!(
            "interpolation exponent must exceed 2, got {xi}"
        )));
    }
    if u.grid().dim() >= 3 {
        let two_star = 2.0 * n / (n - 2.0);
        if xi >= two_star {
            return Err(SolverError::invalid(format!(
                "interpolation exponent must stay below 2* = {two_star}, got {xi}"
            )));
        }
    }
    let mass = u.mass();
    let grad = u.grad_norm_sq();
    if mass <= 0.0 || grad <= 0.0 {
        return Err(SolverError::invalid(
            "interpolation ratio needs a nonzero profile".to_string(),
        ));
    }
    let gamma = n * (0.5 - 1.0 / xi);
    let num = u.lp_norm_pow(xi)?.powf(1.0 / xi);
    Ok(num / (grad.powf(0.5 * gamma) * mass.powf(0.5 * (1.0 - gamma))))
}

/// ∫ (e^{α u²} - 1) dx on a planar grid, with the guarded exponential.
pub fn moser_functional(u: &RadialFunction, alpha: f64) -> Result<f64> {
    if u.grid().dim() != 2 {
        return Err(SolverError::invalid(
            "the exponential functional is defined on planar grids".to_string(),
        ));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(SolverError::invalid(format!(
            "exponent must be positive, got {alpha}"
        )));
    }
    let peak = u.max_abs();
    if alpha * peak * peak > 700.0 {
        return Err(SolverError::range(format!(
            "e^{{αu²}} overflows at amplitude {peak:.3e} for α = {alpha:.3e}"
        )));
    }
    Ok(u.values()
        .iter()
        .zip(u.grid().weights())
        .map(|(&ui, &w)| w * (alpha * ui * ui).exp_m1())
        .sum())
}

/// Report of the t-power exponential integrability probe over a sequence of
/// sphere iterates.
#[derive(Debug, Clone, Serialize)]
pub struct ExpIntegrabilityReport {
    /// sup ‖∇u_n‖² < 1 - a² over the sequence.
    pub hypothesis_holds: bool,
    pub sup_grad_sq: f64,
    pub mass_target: f64,
    pub t: f64,
    /// m = sup ‖u_n‖²_{H¹}; the construction wants t·m < 1.
    pub m: f64,
    pub t_m_below_one: bool,
    pub values: Vec<f64>,
    pub max_value: f64,
}

/// Evaluate ∫ (e^{4π u²} - 1)^t dx across the sequence for t slightly above
/// one, after checking the compactness hypothesis sup ‖∇u_n‖² < 1 - a².
/// A failed hypothesis is reported as data, not an error.
pub fn exp_integrability_probe(
    sequence: &[RadialFunction],
    t: f64,
) -> Result<ExpIntegrabilityReport> {
    if sequence.is_empty() {
        return Err(SolverError::invalid(
            "the integrability probe needs at least one profile".to_string(),
        ));
    }
    if !(t.is_finite() && t > 1.0) {
        return Err(SolverError::invalid(format!(
            "the probe exponent must satisfy t > 1, got {t}"
        )));
    }
    let mass_target = sequence[0].mass();
    let mut sup_grad: f64 = 0.0;
    let mut m_bound: f64 = 0.0;
    let mut values = Vec::with_capacity(sequence.len());
    for u in sequence {
        if u.grid().dim() != 2 {
            return Err(SolverError::invalid(
                "the integrability probe is planar".to_string(),
            ));
        }
        let grad = u.grad_norm_sq();
        sup_grad = sup_grad.max(grad);
        m_bound = m_bound.max(grad + u.mass());
        let peak = u.max_abs();
        if t * ALPHA_0 * peak * peak > 700.0 {
            return Err(SolverError::range(
                "probe exponential overflows; the sequence amplitude is too large".to_string(),
            ));
        }
        let value: f64 = u
            .values()
            .iter()
            .zip(u.grid().weights())
            .map(|(&ui, &w)| w * (ALPHA_0 * ui * ui).exp_m1().powf(t))
            .sum();
        values.push(value);
    }
    let max_value = values.iter().cloned().fold(0.0, f64::max);
    Ok(ExpIntegrabilityReport {
        hypothesis_holds: sup_grad < 1.0 - mass_target,
        sup_grad_sq: sup_grad,
        mass_target,
        t,
        m: m_bound,
        t_m_below_one: t * m_bound < 1.0,
        values,
        max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{moser_profile, random_positive_mixture, rng_from_seed};
    use std::f64::consts::PI;

    fn sobolev_grid(m: usize, radius: f64) -> Arc<RadialGrid> {
        RadialGrid::new(3, radius, m, Grading::Geometric { ratio: 1.0035 }).unwrap()
    }

    #[test]
    fn sobolev_constant_near_closed_form() {
        // S = 3 (π²/4)^{2/3} in dimension three.
        let grid = sobolev_grid(4000, 400.0);
        let report = sobolev_constant(3, &grid).unwrap();
        let exact = 3.0 * (PI * PI / 4.0).powf(2.0 / 3.0);
        assert!(
            ((report.value - exact) / exact).abs() < 5e-3,
            "S = {}, closed form {exact}",
            report.value
        );
        assert!(report.parameters.contains_key("tau_star"));
    }

    #[test]
    fn sobolev_constant_refinement_and_truncation_stability() {
        let base = sobolev_constant(3, &sobolev_grid(3000, 400.0)).unwrap().value;
        let finer = sobolev_constant(3, &sobolev_grid(6000, 400.0)).unwrap().value;
        let wider = sobolev_constant(3, &sobolev_grid(3000, 800.0)).unwrap().value;
        assert!(
            ((base - finer) / base).abs() < 1e-3,
            "refinement drift {}",
            ((base - finer) / base).abs()
        );
        assert!(
            ((base - wider) / base).abs() < 1e-3,
            "truncation drift {}",
            ((base - wider) / base).abs()
        );
    }

    #[test]
    fn sobolev_quotient_dilation_invariance() {
        // The quotient is dilation-invariant in the continuum: across two
        // decades of concentration the discrete values agree within the
        // combined truncation and resolution error.
        let grid = sobolev_grid(4000, 400.0);
        let quotients: Vec<f64> = [0.5, 2.0, 8.0, 32.0]
            .iter()
            .map(|&tau| {
                let u = crate::profiles::sobolev_bubble(&grid, tau).unwrap();
                sobolev_quotient(&u).unwrap()
            })
            .collect();
        let hi = quotients.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = quotients.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            (hi - lo) / lo < 1e-2,
            "dilation spread {:.3e} too large: {quotients:?}",
            (hi - lo) / lo
        );

        // Where resolution (not truncation) limits the sharpest bubble, the
        // deviation from a grid-converged reference shrinks ~4x per node
        // doubling. Hold the total stretch fixed so the mesh family is
        // self-similar under refinement.
        let tau = 32.0;
        let family = |m: usize| -> Arc<RadialGrid> {
            let stretch: f64 = 1100.0;
            let ratio = stretch.powf(1.0 / (m as f64 - 1.0));
            RadialGrid::new(3, 400.0, m, Grading::Geometric { ratio }).unwrap()
        };
        let reference = {
            let g = family(8000);
            sobolev_quotient(&crate::profiles::sobolev_bubble(&g, tau).unwrap()).unwrap()
        };
        let dev = |m: usize| -> f64 {
            let g = family(m);
            (sobolev_quotient(&crate::profiles::sobolev_bubble(&g, tau).unwrap()).unwrap()
                - reference)
                .abs()
        };
        let ratio = dev(1000) / dev(2000);
        assert!(
            (3.0..=5.5).contains(&ratio),
            "resolution refinement ratio {ratio}"
        );
    }

    #[test]
    fn random_profiles_sit_above_the_infimum() {
        let grid = sobolev_grid(3000, 400.0);
        let s = sobolev_constant(3, &grid).unwrap().value;
        let mut rng = rng_from_seed(5);
        for _ in 0..25 {
            let u = random_positive_mixture(&grid, &mut rng, (0.5, 6.0));
            let q = sobolev_quotient(&u).unwrap();
            assert!(q >= s * (1.0 - 1e-3), "quotient {q} fell below S = {s}");
        }
    }

    #[test]
    fn gn_ratio_invariances() {
        let grid = RadialGrid::new(3, 24.0, 2000, Grading::Uniform).unwrap();
        let mut rng = rng_from_seed(17);
        let u = random_positive_mixture(&grid, &mut rng, (0.8, 2.0));
        let xi = 3.2;
        let base = gn_ratio(&u, xi).unwrap();
        let mut scaled = u.clone();
        scaled.scale(4.2);
        let r_scaled = gn_ratio(&scaled, xi).unwrap();
        assert!(((base - r_scaled) / base).abs() < 1e-13);
        let dilated = crate::fiber_map::dilate(&u, 0.8).unwrap().profile;
        let r_dilated = gn_ratio(&dilated, xi).unwrap();
        assert!(
            ((base - r_dilated) / base).abs() < 1e-4,
            "dilation drift {}",
            ((base - r_dilated) / base).abs()
        );
    }

    #[test]
    fn gn_ratio_bounded_over_samples() {
        let grid = RadialGrid::new(2, 30.0, 1500, Grading::Uniform).unwrap();
        let mut rng = rng_from_seed(23);
        let mut max_ratio: f64 = 0.0;
        for _ in 0..200 {
            let u = random_positive_mixture(&grid, &mut rng, (0.5, 3.0));
            max_ratio = max_ratio.max(gn_ratio(&u, 4.0).unwrap());
        }
        // The planar constant for ξ = 4 is (2/π)^{1/4}/?: empirically ≤ 0.8;
        // assert a finite, stable envelope.
        assert!(max_ratio < 1.0, "empirical constant {max_ratio}");
    }

    #[test]
    fn gn_ratio_rejects_bad_exponents() {
        let grid = RadialGrid::new(3, 10.0, 300, Grading::Uniform).unwrap();
        let u = crate::profiles::gaussian(&grid, 1.0).unwrap();
        assert!(gn_ratio(&u, 2.0).is_err());
        assert!(gn_ratio(&u, 6.5).is_err());
        let z = RadialFunction::zero(grid);
        assert!(gn_ratio(&z, 3.0).is_err());
    }

    #[test]
    fn moser_functional_basics() {
        let grid = RadialGrid::new(2, 6.0, 2500, Grading::Uniform).unwrap();
        let z = RadialFunction::zero(Arc::clone(&grid));
        assert_eq!(moser_functional(&z, 2.0).unwrap(), 0.0);
        let u = crate::profiles::gaussian(&grid, 1.0).unwrap();
        // Monotone in α.
        let lo = moser_functional(&u, 1.0).unwrap();
        let hi = moser_functional(&u, 2.0).unwrap();
        assert!(hi > lo && lo > 0.0);
        // Dimension and overflow guards.
        let grid3 = RadialGrid::new(3, 6.0, 300, Grading::Uniform).unwrap();
        let u3 = crate::profiles::gaussian(&grid3, 1.0).unwrap();
        assert!(moser_functional(&u3, 1.0).is_err());
        let mut tall = u.clone();
        tall.scale(40.0);
        assert!(matches!(
            moser_functional(&tall, ALPHA_0),
            Err(SolverError::RangeError(_))
        ));
    }

    #[test]
    fn subcritical_samples_uniformly_bounded() {
        // ‖∇u‖² ≤ 1, ‖u‖₂ ≤ 0.9, α = 0.9·4π: the functional stays bounded.
        let grid = RadialGrid::new(2, 40.0, 3000, Grading::Geometric { ratio: 1.002 }).unwrap();
        let mut rng = rng_from_seed(31);
        let mut max_val: f64 = 0.0;
        for _ in 0..100 {
            let raw = random_positive_mixture(&grid, &mut rng, (0.4, 3.0));
            let grad_scale = (0.995 / raw.grad_norm_sq()).sqrt();
            let mass_scale = (0.81 / raw.mass()).sqrt();
            let mut u = raw;
            u.scale(grad_scale.min(mass_scale));
            let v = moser_functional(&u, 0.9 * ALPHA_0).unwrap();
            max_val = max_val.max(v);
        }
        assert!(max_val.is_finite() && max_val < 50.0, "max {max_val}");
    }

    #[test]
    fn supercritical_concentration_grows() {
        // At α = 1.1·4π the truncated-logarithm family blows up as the
        // concentration sharpens.
        let grid = RadialGrid::new(2, 2.0, 9000, Grading::Geometric { ratio: 1.0012 }).unwrap();
        let mut prev = 0.0;
        for k in [4.0, 8.0, 16.0, 32.0, 64.0] {
            let u = moser_profile(&grid, 1.0, k).unwrap();
            let v = moser_functional(&u, 1.1 * ALPHA_0).unwrap();
            assert!(v > prev, "k = {k}: {v} did not grow past {prev}");
            prev = v;
        }
    }

    #[test]
    fn integrability_probe_reports_hypothesis() {
        let grid = RadialGrid::new(2, 30.0, 1200, Grading::Uniform).unwrap();
        let a = 0.5;
        let mut seq = Vec::new();
        for width in [1.0, 1.3, 1.7] {
            let raw = crate::profiles::gaussian(&grid, width).unwrap();
            seq.push(crate::optimizer::project_sphere(&raw, a).unwrap());
        }
        let report = exp_integrability_probe(&seq, 1.05).unwrap();
        assert!(report.hypothesis_holds, "{report:?}");
        assert!(report.max_value.is_finite());
        assert_eq!(report.values.len(), 3);
        // Zero sequence gives zero values.
        let zeros = vec![RadialFunction::zero(Arc::clone(&grid))];
        let zr = exp_integrability_probe(&zeros, 1.05).unwrap();
        assert_eq!(zr.max_value, 0.0);
    }
}
