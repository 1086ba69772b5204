//! The two concrete nonlinear regimes.
//!
//! For N ≥ 3 the combined power f(t) = μ|t|^{q-2} t + |t|^{2*-2} t with the
//! Sobolev-critical top exponent 2* = 2N/(N-2) and μ > 0, q ∈ (2 + 4/N, 2*).
//! For N = 2 the exponential-critical model f(t) = μ sgn(t) |t|^{p-1} e^{4πt²}
//! with p > 4; its growth threshold is exactly α₀ = 4π.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Exponent α₀ of the planar critical growth.
pub const ALPHA_0: f64 = 4.0 * PI;

/// Largest exponent argument we allow before e^x overflows headroom.
const EXP_ARG_CAP: f64 = 700.0;

/// Tagged parameter set selecting the nonlinearity f, F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NonlinearityModel {
    /// μ|t|^{q-2} t + |t|^{2*-2} t on ℝ^N, N ≥ 3.
    CombinedPower { mu: f64, q: f64, dim: u32 },
    /// μ sgn(t) |t|^{p-1} e^{4π t²} on ℝ², p > 4.
    ExpCritical { mu: f64, p: f64 },
}

impl NonlinearityModel {
    pub fn combined_power(mu: f64, q: f64, dim: u32) -> Result<Self> {
        if dim < 3 {
            return Err(SolverError::invalid(format!(
                "combined-power model needs dimension ≥ 3, got {dim}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(SolverError::invalid(format!("μ must be positive, got {mu}")));
        }
        let two_star = 2.0 * dim as f64 / (dim as f64 - 2.0);
        let q_lo = 2.0 + 4.0 / dim as f64;
        if !(q.is_finite() && q > q_lo && q < two_star) {
            return Err(SolverError::invalid(format!(
                "q must lie in (2 + 4/N, 2*) = ({q_lo}, {two_star}), got {q}"
            )));
        }
        Ok(NonlinearityModel::CombinedPower { mu, q, dim })
    }

    pub fn exp_critical(mu: f64, p: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(SolverError::invalid(format!("μ must be positive, got {mu}")));
        }
        if !(p.is_finite() && p > 4.0) {
            return Err(SolverError::invalid(format!("p must exceed 4, got {p}")));
        }
        Ok(NonlinearityModel::ExpCritical { mu, p })
    }

    pub fn dim(&self) -> u32 {
        match self {
            NonlinearityModel::CombinedPower { dim, .. } => *dim,
            NonlinearityModel::ExpCritical { .. } => 2,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            NonlinearityModel::CombinedPower { mu, .. } => *mu,
            NonlinearityModel::ExpCritical { mu, .. } => *mu,
        }
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        match *self {
            NonlinearityModel::CombinedPower { q, dim, .. } => {
                NonlinearityModel::combined_power(mu, q, dim)
            }
            NonlinearityModel::ExpCritical { p, .. } => NonlinearityModel::exp_critical(mu, p),
        }
    }

    /// Sobolev critical exponent 2N/(N-2) for the combined-power regime.
    pub fn two_star(&self) -> Option<f64> {
        match self {
            NonlinearityModel::CombinedPower { dim, .. } => {
                Some(2.0 * *dim as f64 / (*dim as f64 - 2.0))
            }
            NonlinearityModel::ExpCritical { .. } => None,
        }
    }

    /// Superlinearity constant θ in θF(t) ≤ t f(t): q resp. p.
    pub fn theta(&self) -> f64 {
        match self {
            NonlinearityModel::CombinedPower { q, .. } => *q,
            NonlinearityModel::ExpCritical { p, .. } => *p,
        }
    }

    /// Exponent of the lower power bound sgn(t) f(t) ≥ μ |t|^{e-1}.
    pub fn lower_power(&self) -> f64 {
        match self {
            NonlinearityModel::CombinedPower { q, .. } => *q,
            NonlinearityModel::ExpCritical { p, .. } => *p,
        }
    }

    /// Largest |t| the guarded exponential accepts; amplitudes beyond this
    /// indicate solver divergence rather than physics. Unbounded for the
    /// power model.
    pub fn amplitude_cap(&self) -> f64 {
        match self {
            NonlinearityModel::CombinedPower { .. } => f64::INFINITY,
            NonlinearityModel::ExpCritical { .. } => (EXP_ARG_CAP / ALPHA_0).sqrt(),
        }
    }

    pub(crate) fn check_amplitude(&self, t: f64) -> Result<()> {
        if t.abs() > self.amplitude_cap() {
            return Err(SolverError::range(format!(
                "amplitude {t:.3e} exceeds the exponential evaluation cap {:.3e}",
                self.amplitude_cap()
            )));
        }
        Ok(())
    }

    /// f(t); odd in t.
    pub fn f_eval(&self, t: f64) -> Result<f64> {
        self.check_amplitude(t)?;
        Ok(self.f_raw(t))
    }

    /// F(t) = ∫_0^t f; even, non-negative.
    pub fn big_f(&self, t: f64) -> Result<f64> {
        self.check_amplitude(t)?;
        Ok(self.big_f_raw(t))
    }

    /// f'(t); even. For the power model the origin value is the two-sided
    /// limit 0 (q > 2).
    pub fn f_prime(&self, t: f64) -> Result<f64> {
        self.check_amplitude(t)?;
        Ok(self.f_prime_raw(t))
    }

    pub(crate) fn f_raw(&self, t: f64) -> f64 {
        match *self {
            NonlinearityModel::CombinedPower { mu, q, dim } => {
                let two_star = 2.0 * dim as f64 / (dim as f64 - 2.0);
                let a = t.abs();
                if a == 0.0 {
                    return 0.0;
                }
                (mu * a.powf(q - 2.0) + a.powf(two_star - 2.0)) * t
            }
            NonlinearityModel::ExpCritical { mu, p } => {
                let a = t.abs();
                if a == 0.0 {
                    return 0.0;
                }
                mu * t.signum() * a.powf(p - 1.0) * (ALPHA_0 * t * t).exp()
            }
        }
    }

    pub(crate) fn big_f_raw(&self, t: f64) -> f64 {
        match *self {
            NonlinearityModel::CombinedPower { mu, q, dim } => {
                let two_star = 2.0 * dim as f64 / (dim as f64 - 2.0);
                let a = t.abs();
                if a == 0.0 {
                    return 0.0;
                }
                mu / q * a.powf(q) + a.powf(two_star) / two_star
            }
            NonlinearityModel::ExpCritical { mu, p } => {
                let a = t.abs();
                if a == 0.0 {
                    return 0.0;
                }
                // ∫_0^{|t|} τ^{p-1} e^{ατ²} dτ = |t|^p Σ_k (αt²)^k / (k!(p+2k));
                // all terms positive, so the sum is stable.
                let x = ALPHA_0 * t * t;
                let mut term = 1.0;
                let mut sum = 1.0 / p;
                let mut k = 1.0;
                loop {
                    term *= x / k;
                    let contrib = term / (p + 2.0 * k);
                    sum += contrib;
                    if contrib <= sum * 1e-17 && k > x {
                        break;
                    }
                    k += 1.0;
                    debug_assert!(k < 4000.0);
                }
                mu * a.powf(p) * sum
            }
        }
    }

    pub(crate) fn f_prime_raw(&self, t: f64) -> f64 {
        match *self {
            NonlinearityModel::CombinedPower { mu, q, dim } => {
                let two_star = 2.0 * dim as f64 / (dim as f64 - 2.0);
                let a = t.abs();
                if a == 0.0 {
                    return 0.0;
                }
                mu * (q - 1.0) * a.powf(q - 2.0) + (two_star - 1.0) * a.powf(two_star - 2.0)
            }
            NonlinearityModel::ExpCritical { mu, p } => {
                let a = t.abs();
                if a == 0.0 {
                    return 0.0;
                }
                mu * a.powf(p - 2.0) * (ALPHA_0 * t * t).exp() * (p - 1.0 + 2.0 * ALPHA_0 * t * t)
            }
        }
    }
}

/// Outcome of the growth-condition certification on a sample set.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    /// θ F(t) ≤ t f(t) for all sampled t ≠ 0, θ = q resp. p.
    pub superlinear_pass: bool,
    /// Worst margin min_t (t f(t) - θ F(t)); non-negative on pass.
    pub superlinear_worst_margin: f64,
    pub theta: f64,
    /// sgn(t) f(t) ≥ μ |t|^{e-1} at all sampled t ≠ 0.
    pub lower_bound_pass: bool,
    pub lower_bound_worst_margin: f64,
    pub lower_exponent: f64,
    pub samples_used: usize,
    pub samples_skipped_at_zero: usize,
}

/// Certify the superlinearity and lower power bound on the given samples.
/// Zero samples are excluded: both conditions are hypotheses for t ≠ 0.
pub fn verify_growth(model: &NonlinearityModel, t_samples: &[f64]) -> Result<GrowthReport> {
    let theta = model.theta();
    let e = model.lower_power();
    let mu = model.mu();
    let mut superlinear_worst = f64::INFINITY;
    let mut lower_worst = f64::INFINITY;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for &t in t_samples {
        if t == 0.0 {
            skipped += 1;
            continue;
        }
        let f = model.f_eval(t)?;
        let big_f = model.big_f(t)?;
        superlinear_worst = superlinear_worst.min(t * f - theta * big_f);
        lower_worst = lower_worst.min(t.signum() * f - mu * t.abs().powf(e - 1.0));
        used += 1;
    }
    if used == 0 {
        return Err(SolverError::invalid(
            "growth verification needs at least one nonzero sample".to_string(),
        ));
    }
    Ok(GrowthReport {
        superlinear_pass: superlinear_worst >= 0.0,
        superlinear_worst_margin: superlinear_worst,
        theta,
        lower_bound_pass: lower_worst >= 0.0,
        lower_bound_worst_margin: lower_worst,
        lower_exponent: e,
        samples_used: used,
        samples_skipped_at_zero: skipped,
    })
}
