//! The constrained energy J(u) = ½∫|∇u|² - ∫F(u), its gradient, the
//! Pohozaev functional Q, the Lagrange multiplier λ, and the augmented
//! energy J̃(u, s) = J(H(u, s)) along the mass-preserving dilation fiber.
//!
//! J̃ and its s-derivatives are evaluated by closed formula from u's own
//! node values (no resampling), so identities between them hold at the
//! level of the discrete quadrature rather than up to interpolation error.

use serde::Serialize;

use crate::error::{Result, SolverError};
use crate::nonlinearity::NonlinearityModel;
use crate::radial_domain::RadialFunction;

/// ∫F(u) dx and ∫f(u)u dx in one pass over the grid nodes.
pub fn nonlinear_integrals(u: &RadialFunction, model: &NonlinearityModel) -> Result<(f64, f64)> {
    model.check_amplitude(u.max_abs())?;
    let mut big_f = 0.0;
    let mut fu_u = 0.0;
    for (&ui, &w) in u.values().iter().zip(u.grid().weights()) {
        if w == 0.0 {
            continue;
        }
        big_f += w * model.big_f_raw(ui);
        fu_u += w * model.f_raw(ui) * ui;
    }
    Ok((big_f, fu_u))
}

/// J(u) = ½∫|∇u|² dx - ∫F(u) dx.
pub fn energy(u: &RadialFunction, model: &NonlinearityModel) -> Result<f64> {
    model.check_amplitude(u.max_abs())?;
    let mut big_f = 0.0;
    for (&ui, &w) in u.values().iter().zip(u.grid().weights()) {
        if w != 0.0 {
            big_f += w * model.big_f_raw(ui);
        }
    }
    Ok(0.5 * u.grad_norm_sq() - big_f)
}

/// The discrete -Δu - f(u): the exact gradient of J in the grid's weighted
/// L² pairing, so that [J(u+εv) - J(u-εv)]/(2ε) = ⟨grad, v⟩ + O(ε²) holds at
/// the discrete level. The zero-measure origin node carries gradient 0.
pub fn energy_gradient(u: &RadialFunction, model: &NonlinearityModel) -> Result<RadialFunction> {
    model.check_amplitude(u.max_abs())?;
    let grid = u.grid();
    let vals = u.values();
    let m = vals.len();
    let h = grid.cell_widths();
    let c = grid.cell_masses();
    let w = grid.weights();
    let mut g = vec![0.0; m];
    for j in 1..m - 1 {
        let mut flux = -c[j] * (vals[j + 1] - vals[j]) / (h[j] * h[j]);
        if j >= 2 {
            flux += c[j - 1] * (vals[j] - vals[j - 1]) / (h[j - 1] * h[j - 1]);
        }
        g[j] = flux / w[j] - model.f_raw(vals[j]);
    }
    RadialFunction::new(std::sync::Arc::clone(grid), g)
}

/// Q(u) = ∫|∇u|² dx + N∫F(u) dx - (N/2)∫f(u)u dx.
///
/// Vanishes at constrained critical points and equals ∂_s J̃(u, s) at s = 0.
pub fn pohozaev(u: &RadialFunction, model: &NonlinearityModel) -> Result<f64> {
    let n = model.dim() as f64;
    let (big_f, fu_u) = nonlinear_integrals(u, model)?;
    Ok(u.grad_norm_sq() + n * big_f - 0.5 * n * fu_u)
}

/// λ = (∫|∇u|² dx - ∫f(u)u dx) / ∫|u|² dx.
pub fn lambda_multiplier(u: &RadialFunction, model: &NonlinearityModel) -> Result<f64> {
    let mass = u.mass();
    if mass <= 0.0 {
        return Err(SolverError::invalid(
            "multiplier needs a profile with positive mass".to_string(),
        ));
    }
    let (_, fu_u) = nonlinear_integrals(u, model)?;
    Ok((u.grad_norm_sq() - fu_u) / mass)
}

/// J̃(u, s) = e^{2s}/2 ∫|∇u|² - e^{-Ns} ∫F(e^{Ns/2} u) dx, evaluated without
/// resampling the profile.
pub fn augmented_energy(u: &RadialFunction, s: f64, model: &NonlinearityModel) -> Result<f64> {
    let n = model.dim() as f64;
    let tau = (0.5 * n * s).exp();
    model.check_amplitude(tau * u.max_abs())?;
    let mut big_f = 0.0;
    for (&ui, &w) in u.values().iter().zip(u.grid().weights()) {
        if w != 0.0 {
            big_f += w * model.big_f_raw(tau * ui);
        }
    }
    Ok(0.5 * (2.0 * s).exp() * u.grad_norm_sq() - (-n * s).exp() * big_f)
}

/// ∂_s J̃(u, s); this is the Pohozaev functional of the dilated profile,
/// expressed through u's own quadrature.
pub fn fiber_slope(u: &RadialFunction, s: f64, model: &NonlinearityModel) -> Result<f64> {
    let n = model.dim() as f64;
    let tau = (0.5 * n * s).exp();
    model.check_amplitude(tau * u.max_abs())?;
    let decay = (-n * s).exp();
    let mut big_f = 0.0;
    let mut fu_u = 0.0;
    for (&ui, &w) in u.values().iter().zip(u.grid().weights()) {
        if w != 0.0 {
            let t = tau * ui;
            big_f += w * model.big_f_raw(t);
            fu_u += w * model.f_raw(t) * t;
        }
    }
    Ok((2.0 * s).exp() * u.grad_norm_sq() + n * decay * big_f - 0.5 * n * decay * fu_u)
}

/// ∂²_s J̃(u, s), used by the safeguarded Newton polish of the fiber maximum.
pub fn fiber_curvature(u: &RadialFunction, s: f64, model: &NonlinearityModel) -> Result<f64> {
    let n = model.dim() as f64;
    let tau = (0.5 * n * s).exp();
    model.check_amplitude(tau * u.max_abs())?;
    let decay = (-n * s).exp();
    let mut big_f = 0.0;
    let mut fu_u = 0.0;
    let mut fp_uu = 0.0;
    for (&ui, &w) in u.values().iter().zip(u.grid().weights()) {
        if w != 0.0 {
            let t = tau * ui;
            big_f += w * model.big_f_raw(t);
            fu_u += w * model.f_raw(t) * t;
            fp_uu += w * model.f_prime_raw(t) * t * t;
        }
    }
    let p = decay * big_f;
    let r = decay * fu_u;
    let q = decay * fp_uu;
    Ok(2.0 * (2.0 * s).exp() * u.grad_norm_sq() - n * n * p + 0.75 * n * n * r - 0.25 * n * n * q)
}

/// Snapshot of all scalar diagnostics at a profile.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "gradSq")]
    pub grad_sq: f64,
    pub mass: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub lambda: f64,
    #[serde(rename = "residualL2")]
    pub residual_l2: f64,
}

impl EnergyReport {
    /// Evaluate J, |∇u|², mass, Q, λ and the strong PDE residual
    /// ‖-Δu - λu - f(u)‖_{L²} at the given profile.
    pub fn evaluate(u: &RadialFunction, model: &NonlinearityModel) -> Result<EnergyReport> {
        let grad_sq = u.grad_norm_sq();
        let mass = u.mass();
        let (big_f, fu_u) = nonlinear_integrals(u, model)?;
        let n = model.dim() as f64;
        let lambda = if mass > 0.0 {
            (grad_sq - fu_u) / mass
        } else {
            0.0
        };
        let residual_l2 = residual_norm(u, lambda, model)?;
        Ok(EnergyReport {
            j: 0.5 * grad_sq - big_f,
            grad_sq,
            mass,
            q: grad_sq + n * big_f - 0.5 * n * fu_u,
            lambda,
            residual_l2,
        })
    }
}

/// ‖-Δu - λu - f(u)‖_{L²} with -Δu - f(u) taken as the variational
/// gradient, i.e. the norm of energy_gradient(u) - λu: the distance to
/// criticality in the discrete energy's own pairing.
pub fn residual_norm(u: &RadialFunction, lambda: f64, model: &NonlinearityModel) -> Result<f64> {
    let g = energy_gradient(u, model)?;
    let mut acc = 0.0;
    for ((&gi, &ui), &w) in g.values().iter().zip(u.values()).zip(u.grid().weights()) {
        if w == 0.0 {
            continue;
        }
        let res = gi - lambda * ui;
        acc += w * res * res;
    }
    Ok(acc.sqrt())
}

/// ‖-Δu - λu - f(u)‖_{L²} with the pointwise Laplacian stencil; a
/// diagnostic cross-check of the variational residual.
pub fn strong_residual_norm(
    u: &RadialFunction,
    lambda: f64,
    model: &NonlinearityModel,
) -> Result<f64> {
    model.check_amplitude(u.max_abs())?;
    let lap = u.laplacian();
    let mut acc = 0.0;
    for ((&ui, &li), &w) in u
        .values()
        .iter()
        .zip(lap.values())
        .zip(u.grid().weights())
    {
        if w == 0.0 {
            continue;
        }
        let res = -li - lambda * ui - model.f_raw(ui);
        acc += w * res * res;
    }
    Ok(acc.sqrt())
}

/// Discrete H¹ norm √(∫|∇u|² + ∫u²), the scale for residual tolerances.
pub fn h1_norm(u: &RadialFunction) -> f64 {
    (u.grad_norm_sq() + u.mass()).sqrt()
}
