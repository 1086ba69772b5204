//! Normalized critical points: sphere projection, minimax descent over the
//! dilation fiber, bordered-Newton refinement of the stationarity system,
//! and the mountain-pass geometry probe.
//!
//! The minimax stage minimizes σ(u) = max_s J̃(u, s) over the mass sphere:
//! each outer iterate is dilated to its fiber maximum (so it sits on the
//! Q = 0 set), then takes a preconditioned projected Armijo step down the
//! tangential gradient. Newton then drives the relaxed stationarity system
//! (-Δu - λu - f(u) - σQ'(u), ∫u² - a², Q(u)) = 0 in (u, λ, σ) to solver
//! precision through a tridiagonal-plus-border elimination, so converged
//! reports satisfy the Pohozaev and residual tolerances simultaneously.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use crate::energy::{
    energy_gradient, fiber_curvature, fiber_slope, h1_norm, lambda_multiplier, EnergyReport,
};
use crate::error::{Result, SolverError};
use crate::fiber_map::{dilate_capped, fiber_maximum, FiberMax};
use crate::nonlinearity::NonlinearityModel;
use crate::profiles;
use crate::radial_domain::{RadialFunction, RadialGrid};

/// Seed profile selector. The custom variant is resolved by the caller that
/// owns file I/O; the solver itself only consumes grid functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SeedKind {
    Gaussian { width: f64 },
    Custom { path: PathBuf },
}

impl Default for SeedKind {
    fn default() -> Self {
        SeedKind::Gaussian { width: 1.0 }
    }
}

/// Solver parameters. Tolerances scale with the iterate: the Pohozaev
/// tolerance is `tol_q_rel`·max(1, |∇u|²) and the residual tolerance is
/// `tol_r_rel`·‖u‖_{H¹}.
#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    /// Prescribed L² norm; the mass target is a².
    pub a: f64,
    pub max_outer_iters: usize,
    pub step_init: f64,
    pub tol_q_rel: f64,
    pub tol_r_rel: f64,
    /// Stop the descent when ‖g‖·step falls below this.
    pub tol_step: f64,
    pub s_max: f64,
    pub bracket: (f64, f64),
    pub seed_kind: SeedKind,
    pub newton_max_iters: usize,
    pub armijo_c1: f64,
    pub armijo_backtrack: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            a: 1.0,
            max_outer_iters: 800,
            step_init: 0.4,
            tol_q_rel: 1e-6,
            tol_r_rel: 1e-5,
            tol_step: 1e-13,
            s_max: 4.0,
            bracket: (-3.0, 3.0),
            seed_kind: SeedKind::default(),
            newton_max_iters: 40,
            armijo_c1: 1e-4,
            armijo_backtrack: 0.5,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self, model: &NonlinearityModel) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(SolverError::invalid(format!(
                "mass parameter a must be positive, got {}",
                self.a
            )));
        }
        if model.dim() == 2 && self.a >= 1.0 {
            return Err(SolverError::invalid(format!(
                "the planar exponential model requires a ∈ (0, 1), got a = {}",
                self.a
            )));
        }
        for (name, v) in [
            ("step_init", self.step_init),
            ("tol_q_rel", self.tol_q_rel),
            ("tol_r_rel", self.tol_r_rel),
            ("tol_step", self.tol_step),
            ("s_max", self.s_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolverError::invalid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.bracket.0 < self.bracket.1) {
            return Err(SolverError::invalid("empty fiber bracket".to_string()));
        }
        if !(self.armijo_c1 > 0.0 && self.armijo_c1 < 1.0) {
            return Err(SolverError::invalid(
                "armijo constant must lie in (0, 1)".to_string(),
            ));
        }
        if !(self.armijo_backtrack > 0.0 && self.armijo_backtrack < 1.0) {
            return Err(SolverError::invalid(
                "backtrack ratio must lie in (0, 1)".to_string(),
            ));
        }
        Ok(())
    }

    pub fn tol_q(&self, grad_sq: f64) -> f64 {
        self.tol_q_rel * grad_sq.max(1.0)
    }

    pub fn tol_r(&self, u: &RadialFunction) -> f64 {
        self.tol_r_rel * h1_norm(u)
    }
}

/// One outer-iteration record: energy level, |Q|, stationarity residual and
/// the accepted step length.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "absQ")]
    pub q_abs: f64,
    pub residual: f64,
    pub step: f64,
    #[serde(rename = "gradSq")]
    pub grad_sq: f64,
}

/// Converged (or best-effort) profile with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    #[serde(skip)]
    pub profile: RadialFunction,
    pub lambda: f64,
    #[serde(rename = "energyReport")]
    pub energy_report: EnergyReport,
    /// J at the solution; the mountain-pass level estimate.
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Vec<IterationRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Rescale onto the sphere ∫u² = a².
pub fn project_sphere(u: &RadialFunction, a: f64) -> Result<RadialFunction> {
    if !(a.is_finite() && a > 0.0) {
        return Err(SolverError::invalid(format!(
            "sphere radius must be positive, got {a}"
        )));
    }
    let mass = u.mass();
    if mass <= 0.0 {
        return Err(SolverError::invalid(
            "cannot project the zero profile onto the mass sphere".to_string(),
        ));
    }
    let mut out = u.clone();
    out.scale(a / mass.sqrt());
    Ok(out)
}

/// Tangential gradient g = (-Δu - f(u)) - λu with λ the multiplier; exactly
/// orthogonal to u in the grid pairing.
fn tangential_gradient(
    u: &RadialFunction,
    model: &NonlinearityModel,
) -> Result<(RadialFunction, f64)> {
    let lambda = lambda_multiplier(u, model)?;
    let mut g = energy_gradient(u, model)?;
    g.axpy(-lambda, u);
    Ok((g, lambda))
}

/// First variation of the dilation at s = 0: (N/2)u + r u'. Stepping along
/// it moves on the fiber without resampling, so tiny Pohozaev corrections
/// do not disturb the strong residual.
fn fiber_generator(u: &RadialFunction) -> RadialFunction {
    let grid = u.grid();
    let vals = u.values();
    let h = grid.cell_widths();
    let r = grid.nodes();
    let half_n = grid.dim() as f64 / 2.0;
    let m = vals.len();
    let mut out = vec![0.0; m];
    out[0] = half_n * vals[0];
    for j in 1..m - 1 {
        let hl = h[j - 1];
        let hr = h[j];
        let du = (hl * hl * vals[j + 1] + (hr * hr - hl * hl) * vals[j] - hr * hr * vals[j - 1])
            / (hl * hr * (hl + hr));
        out[j] = half_n * vals[j] + r[j] * du;
    }
    RadialFunction::new(Arc::clone(grid), out).expect("generator values are finite")
}

/// Return the profile to the Q = 0 fiber: large offsets are resampled away,
/// then a Newton iteration along the tangent generator removes the rest
/// without resampling noise.
fn fiber_polish(
    u: &RadialFunction,
    model: &NonlinearityModel,
    cfg: &SolveConfig,
) -> Result<RadialFunction> {
    let mut v = u.clone();
    for _ in 0..6 {
        let fm = fiber_maximum(&v, model, cfg.bracket, cfg.s_max, Some(0.0))?;
        if fm.s_star.abs() <= 5e-3 {
            break;
        }
        v = dilate_capped(&v, fm.s_star, cfg.s_max)?.profile;
    }
    let mut prev_q = f64::INFINITY;
    for _ in 0..16 {
        let q = fiber_slope(&v, 0.0, model)?;
        let scale = v.grad_norm_sq().max(1.0);
        if q.abs() <= 0.02 * cfg.tol_q_rel * scale || q.abs() >= prev_q {
            break;
        }
        prev_q = q.abs();
        let curv = fiber_curvature(&v, 0.0, model)?;
        if !(curv.is_finite() && curv != 0.0) {
            break;
        }
        let ds = (-q / curv).clamp(-5e-3, 5e-3);
        let gen = fiber_generator(&v);
        let mut stepped = v.clone();
        stepped.axpy(ds, &gen);
        if stepped.mass() <= 0.0 {
            break;
        }
        v = project_sphere(&stepped, cfg.a)?;
    }
    Ok(v)
}

/// Solve (α W + K) d = W g on the interior nodes, with K the Dirichlet
/// stiffness of the discrete energy. Descent in this metric removes the
/// grid-scale stiffness of the raw gradient flow.
fn h1_precondition(g: &RadialFunction, alpha: f64) -> Result<RadialFunction> {
    let grid = g.grid();
    let m = grid.len();
    let h = grid.cell_widths();
    let c = grid.cell_masses();
    let w = grid.weights();
    // Interior unknowns j = 1..m-2.
    let n = m - 2;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for (idx, j) in (1..m - 1).enumerate() {
        let mut d = alpha * w[j] + c[j] / (h[j] * h[j]);
        if j >= 2 {
            d += c[j - 1] / (h[j - 1] * h[j - 1]);
            sub[idx] = -c[j - 1] / (h[j - 1] * h[j - 1]);
        }
        if idx + 1 < n {
            sup[idx] = -c[j] / (h[j] * h[j]);
        }
        diag[idx] = d;
        rhs[idx] = w[j] * g.values()[j];
    }
    let mut work = [rhs];
    solve_tridiagonal_multi(&sub, &diag, &sup, &mut work)?;
    let [sol] = work;
    let mut out = vec![0.0; m];
    out[1..m - 1].copy_from_slice(&sol);
    RadialFunction::new(Arc::clone(grid), out)
}

/// Guard for the planar model: the compactness window requires
/// |∇u|² < 1 - a² along the iteration.
fn violates_planar_guard(u: &RadialFunction, model: &NonlinearityModel, a: f64) -> bool {
    model.dim() == 2 && u.grad_norm_sq() >= 1.0 - a * a
}

/// Minimize σ(u) = max_s J̃(u, s) over the mass sphere by dilation-ascent /
/// projected-descent. Geometry errors on the current iterate propagate;
/// non-convergence returns a report with `converged = false` and full
/// diagnostics.
pub fn minimax_solve(
    seed: &RadialFunction,
    model: &NonlinearityModel,
    cfg: &SolveConfig,
) -> Result<SolutionReport> {
    cfg.validate(model)?;
    if seed.grid().dim() != model.dim() {
        return Err(SolverError::invalid(format!(
            "seed lives in dimension {} but the model is {}-dimensional",
            seed.grid().dim(),
            model.dim()
        )));
    }
    let a = cfg.a;
    let mut u = project_sphere(seed, a)?;
    let mut diagnostics = Vec::new();
    let mut message: Option<String> = None;
    let mut s_warm: Option<f64> = None;
    let mut step = cfg.step_init;
    let mut iterations = 0usize;
    let mut guard_strikes = 0usize;
    let mut best_gnorm = f64::INFINITY;
    let mut stagnant = 0usize;

    for _ in 0..cfg.max_outer_iters {
        iterations += 1;
        let fm = fiber_maximum(&u, model, cfg.bracket, cfg.s_max, s_warm)?;
        let v = if fm.s_star == 0.0 {
            u.clone()
        } else {
            dilate_capped(&u, fm.s_star, cfg.s_max)?.profile
        };
        if violates_planar_guard(&v, model, a) {
            message = Some(
                "fiber maximizer crossed the planar compactness threshold |∇u|² ≥ 1 - a²"
                    .to_string(),
            );
            u = v;
            break;
        }
        // Price the dilated iterate through the same evaluation path as the
        // Armijo trials, so resampling bias cannot mask a true descent.
        let sigma_here = fiber_maximum(&v, model, cfg.bracket, cfg.s_max, Some(0.0))?.j_max;
        let (g, lambda_here) = tangential_gradient(&v, model)?;
        let gnorm = g.inner_product(&g)?.sqrt();
        let q_here = fiber_slope(&v, 0.0, model)?;
        diagnostics.push(IterationRecord {
            j: sigma_here,
            q_abs: q_here.abs(),
            residual: gnorm,
            step,
            grad_sq: v.grad_norm_sq(),
        });

        if gnorm <= 0.5 * cfg.tol_r(&v) {
            u = v;
            break;
        }
        // The descent bottoms out at the discretization floor of the
        // constrained landscape; hand over to Newton instead of crawling.
        if gnorm < 0.995 * best_gnorm {
            best_gnorm = gnorm;
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= 40 {
                u = v;
                break;
            }
        }

        // Preconditioned tangential direction; the metric shift tracks the
        // multiplier so wide flat solutions keep an O(1) convergence rate.
        let mut dir = h1_precondition(&g, lambda_here.abs().max(1e-9))?;
        let beta = dir.inner_product(&v)? / v.mass();
        dir.axpy(-beta, &v);
        let slope = g.inner_product(&dir)?;
        if !(slope > 0.0) {
            u = v;
            message = Some("preconditioned direction lost descent; stopping".to_string());
            break;
        }

        // Projected Armijo descent on σ; each trial is priced by its own
        // fiber maximum.
        let mut t = step;
        let mut accepted = false;
        while t > 1e-18 {
            let mut trial = v.clone();
            trial.axpy(-t, &dir);
            if trial.mass() <= 0.0 {
                t *= cfg.armijo_backtrack;
                continue;
            }
            let trial = project_sphere(&trial, a)?;
            if violates_planar_guard(&trial, model, a) {
                guard_strikes += 1;
                if guard_strikes > 80 {
                    message = Some(
                        "persistent step rejection at the planar compactness threshold"
                            .to_string(),
                    );
                    break;
                }
                t *= cfg.armijo_backtrack;
                continue;
            }
            let fm_trial = match fiber_maximum(&trial, model, cfg.bracket, cfg.s_max, Some(0.0)) {
                Ok(fm_t) => fm_t,
                Err(SolverError::GeometryError(_)) => {
                    t *= cfg.armijo_backtrack;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if fm_trial.j_max <= sigma_here - cfg.armijo_c1 * t * slope {
                u = trial;
                s_warm = Some(fm_trial.s_star);
                step = (t / cfg.armijo_backtrack).min(cfg.step_init);
                accepted = true;
                break;
            }
            t *= cfg.armijo_backtrack;
        }

        if !accepted {
            u = v;
            if message.is_none() {
                message = Some("descent stalled: no admissible Armijo step".to_string());
            }
            break;
        }
        if gnorm * t <= cfg.tol_step {
            break;
        }
    }

    let polished = fiber_polish(&u, model, cfg)?;
    let polished = project_sphere(&polished, a)?;
    finish_report(polished, model, cfg, iterations, diagnostics, message)
}

fn finish_report(
    u: RadialFunction,
    model: &NonlinearityModel,
    cfg: &SolveConfig,
    iterations: usize,
    diagnostics: Vec<IterationRecord>,
    message: Option<String>,
) -> Result<SolutionReport> {
    let report = EnergyReport::evaluate(&u, model)?;
    let mass_ok = (report.mass - cfg.a * cfg.a).abs() <= 1e-12 * (cfg.a * cfg.a).max(1.0);
    let converged = mass_ok
        && report.q.abs() <= cfg.tol_q(report.grad_sq)
        && report.residual_l2 <= cfg.tol_r(&u)
        && message.is_none();
    Ok(SolutionReport {
        lambda: report.lambda,
        gamma: report.j,
        iterations,
        converged,
        diagnostics,
        message,
        energy_report: report,
        profile: u,
    })
}

/// Damped Newton on the stationarity system
///
///   -Δu - λu - f(u) - σ·Q'(u) = 0,   ∫u² = a²,   Q(u) = 0,
///
/// in the unknowns (u, λ, σ), with -Δu - f(u) the variational gradient of
/// the discrete energy. The relaxation multiplier σ reconciles the
/// stationarity equation with the discrete Pohozaev constraint; it
/// converges to a discretization-error-sized value, so the reported
/// residual ‖energy_gradient(u) - λu‖ lands at |σ|·‖Q'(u)‖ while Q
/// vanishes to solver precision. The linearization is tridiagonal plus a
/// two-column border, eliminated in O(M). A singular or non-contracting
/// linearization returns the input profile flagged unconverged.
pub fn newton_refine(
    u0: &RadialFunction,
    model: &NonlinearityModel,
    cfg: &SolveConfig,
) -> Result<SolutionReport> {
    cfg.validate(model)?;
    let a2 = cfg.a * cfg.a;
    let mut u = u0.clone();
    let (mut lambda, mut sigma) = initial_multipliers(&u, model)?;
    let mut diagnostics = Vec::new();

    let norm_of = |u: &RadialFunction, lambda: f64, sigma: f64| -> Result<f64> {
        let res = stationarity_residual(u, lambda, sigma, model)?;
        let w = u.grid().weights();
        let mut acc = 0.0;
        for (j, &rj) in res.iter().enumerate() {
            acc += w[j] * rj * rj;
        }
        let mass_defect = u.mass() - a2;
        let q = fiber_slope(u, 0.0, model)?;
        Ok((acc + mass_defect * mass_defect + q * q).sqrt())
    };

    let mut norm = norm_of(&u, lambda, sigma)?;
    // Difference quotients cannot resolve residuals below round-off
    // amplified by 1/h²; stop there rather than grinding on noise.
    let h_min = u
        .grid()
        .cell_widths()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let floor = 32.0 * f64::EPSILON * (1.0 + u.max_abs()) / (h_min * h_min);
    let target = (1e-13 * (1.0 + h1_norm(&u))).max(floor);
    let record = |diag: &mut Vec<IterationRecord>, u: &RadialFunction, norm: f64, step: f64| {
        diag.push(IterationRecord {
            j: f64::NAN,
            q_abs: f64::NAN,
            residual: norm,
            step,
            grad_sq: u.grad_norm_sq(),
        });
    };
    record(&mut diagnostics, &u, norm, 0.0);

    if norm <= 3.0 * target {
        // Already a fixed point of the system: zero steps, unchanged output.
        return finish_report(u, model, cfg, 0, diagnostics, None);
    }

    let mut refinement_failure: Option<String> = None;
    for _ in 0..cfg.newton_max_iters {
        let (du, dl, ds) = match newton_direction(&u, lambda, sigma, model, a2) {
            Ok(d) => d,
            Err(e) => {
                refinement_failure = Some(format!("singular linearization: {e}"));
                break;
            }
        };
        let mut theta = 1.0;
        let mut advanced = false;
        while theta > 1e-7 {
            let mut u_try = u.clone();
            u_try.axpy(theta, &du);
            let l_try = lambda + theta * dl;
            let s_try = sigma + theta * ds;
            match norm_of(&u_try, l_try, s_try) {
                Ok(n_try) if n_try < (1.0 - 1e-4 * theta) * norm => {
                    u = u_try;
                    lambda = l_try;
                    sigma = s_try;
                    norm = n_try;
                    advanced = true;
                    record(&mut diagnostics, &u, norm, theta);
                    break;
                }
                _ => theta *= 0.5,
            }
        }
        if !advanced {
            if norm > 0.1 * cfg.tol_r(&u) {
                refinement_failure =
                    Some("newton step failed to reduce the residual".to_string());
            }
            break;
        }
        if norm <= target {
            break;
        }
    }

    // The energy never sees the zero-measure origin node; pin it by the
    // even-symmetric parabola through its neighbours so the profile column
    // is smooth at the axis.
    repair_origin(&mut u);
    // Restore the constraint to round-off.
    let refined = project_sphere(&u, cfg.a)?;
    let steps = diagnostics.len() - 1;
    let mut report = finish_report(refined, model, cfg, steps, diagnostics, refinement_failure)?;
    if report.message.is_some() {
        // Refinement errors surface the original profile unchanged.
        report.profile = u0.clone();
        report.converged = false;
        report.energy_report = EnergyReport::evaluate(&report.profile, model)?;
        report.lambda = report.energy_report.lambda;
        report.gamma = report.energy_report.j;
    }
    Ok(report)
}

/// Joint least-squares fit of (λ, σ) minimizing ‖g - λu - σQ'‖ in the grid
/// pairing, so a profile already solving the system re-enters at its zero.
fn initial_multipliers(u: &RadialFunction, model: &NonlinearityModel) -> Result<(f64, f64)> {
    let g = energy_gradient(u, model)?;
    let qg = pohozaev_gradient_field(u, model);
    let w = u.grid().weights();
    let (mut uu, mut uq, mut qq, mut gu, mut gq) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in 0..u.values().len() {
        let (wi, ui, qi, gi) = (w[j], u.values()[j], qg[j], g.values()[j]);
        uu += wi * ui * ui;
        uq += wi * ui * qi;
        qq += wi * qi * qi;
        gu += wi * gi * ui;
        gq += wi * gi * qi;
    }
    let det = uu * qq - uq * uq;
    if det.abs() <= 1e-14 * (uu * qq).max(1e-300) {
        return Ok((lambda_multiplier(u, model)?, 0.0));
    }
    let lambda = (gu * qq - gq * uq) / det;
    let sigma = (uu * gq - uq * gu) / det;
    Ok((lambda, sigma))
}

/// Replace the origin value by the even parabola through the next two nodes.
fn repair_origin(u: &mut RadialFunction) {
    let r = u.grid().nodes();
    let (r1, r2) = (r[1], r[2]);
    let (u1, u2) = (u.values()[1], u.values()[2]);
    let u0 = (u1 * r2 * r2 - u2 * r1 * r1) / (r2 * r2 - r1 * r1);
    let mut vals = u.values().to_vec();
    vals[0] = u0;
    *u = RadialFunction::new(Arc::clone(u.grid()), vals).expect("origin repair is finite");
}

/// Nodewise L² representative of Q'(u): -2Δu + Nf(u) - (N/2)(f'(u)u + f(u))
/// in variational form; zero at the measure-free origin node.
fn pohozaev_gradient_field(u: &RadialFunction, model: &NonlinearityModel) -> Vec<f64> {
    let grid = u.grid();
    let vals = u.values();
    let m = vals.len();
    let h = grid.cell_widths();
    let c = grid.cell_masses();
    let w = grid.weights();
    let n = grid.dim() as f64;
    let mut out = vec![0.0; m];
    for j in 1..m - 1 {
        let mut flux = -c[j] * (vals[j + 1] - vals[j]) / (h[j] * h[j]);
        if j >= 2 {
            flux += c[j - 1] * (vals[j] - vals[j - 1]) / (h[j - 1] * h[j - 1]);
        }
        let f = model.f_raw(vals[j]);
        let fp = model.f_prime_raw(vals[j]);
        out[j] = 2.0 * flux / w[j] + n * f - 0.5 * n * (fp * vals[j] + f);
    }
    out
}


/// Pointwise residual of the relaxed stationarity equation
/// energy_gradient(u) - λu - σQ'(u) on all nodes.
fn stationarity_residual(
    u: &RadialFunction,
    lambda: f64,
    sigma: f64,
    model: &NonlinearityModel,
) -> Result<Vec<f64>> {
    let g = energy_gradient(u, model)?;
    let qg = pohozaev_gradient_field(u, model);
    Ok(g.values()
        .iter()
        .zip(u.values())
        .zip(qg)
        .map(|((&gi, &ui), qi)| gi - lambda * ui - sigma * qi)
        .collect())
}

/// One bordered-tridiagonal Newton solve of the relaxed stationarity
/// system: returns (δu, δλ, δσ). The unknown values are the interior nodes
/// j = 1..M-2; the zero-measure origin node carries no equation.
fn newton_direction(
    u: &RadialFunction,
    lambda: f64,
    sigma: f64,
    model: &NonlinearityModel,
    a2: f64,
) -> Result<(RadialFunction, f64, f64)> {
    let grid = u.grid();
    let vals = u.values();
    let m = vals.len();
    let n = m - 2; // interior unknowns u_1..u_{M-2}
    let h = grid.cell_widths();
    let c = grid.cell_masses();
    let w = grid.weights();

    // Tridiagonal rows of A = ∂(energy_gradient(u) - λu)/∂u; the σQ''
    // block is dropped (σ is discretization-error sized, so the
    // quasi-Newton step still contracts).
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for (idx, j) in (1..m - 1).enumerate() {
        let mut d = c[j] / (h[j] * h[j]);
        if j >= 2 {
            d += c[j - 1] / (h[j - 1] * h[j - 1]);
            sub[idx] = -c[j - 1] / (h[j - 1] * h[j - 1] * w[j]);
        }
        if idx + 1 < n {
            sup[idx] = -c[j] / (h[j] * h[j] * w[j]);
        }
        diag[idx] = d / w[j] - model.f_prime_raw(vals[j]) - lambda;
    }

    // Right-hand sides: A y0 = -G_ext, A y1 = u (λ column), A y2 = Q'
    // (σ column).
    let res = stationarity_residual(u, lambda, sigma, model)?;
    let q_field = pohozaev_gradient_field(u, model);
    let rhs0: Vec<f64> = res[1..m - 1].iter().map(|&x| -x).collect();
    let rhs1: Vec<f64> = vals[1..m - 1].to_vec();
    let rhs2: Vec<f64> = q_field[1..m - 1].to_vec();
    let (y0, y1, y2) = solve_tridiagonal_three(&sub, &diag, &sup, &rhs0, &rhs1, &rhs2)?;

    // Border rows: mass (2 Σ w u δu = -(mass - a²)) and the Pohozaev
    // constraint (Σ (∂Q/∂u_j) δu_j = -Q), with ∂Q/∂u_j = w_j Q'_j.
    let f_mass = u.mass() - a2;
    let q_val = fiber_slope(u, 0.0, model)?;
    let mut m_y = [0.0; 3];
    let mut g_y = [0.0; 3];
    for (idx, j) in (1..m - 1).enumerate() {
        let mrow = 2.0 * w[j] * vals[j];
        let grow = w[j] * q_field[j];
        m_y[0] += mrow * y0[idx];
        m_y[1] += mrow * y1[idx];
        m_y[2] += mrow * y2[idx];
        g_y[0] += grow * y0[idx];
        g_y[1] += grow * y1[idx];
        g_y[2] += grow * y2[idx];
    }
    // [mᵀy1 mᵀy2; gᵀy1 gᵀy2] [δλ; δσ] = [-F_m - mᵀy0; -Q - gᵀy0].
    let det = m_y[1] * g_y[2] - m_y[2] * g_y[1];
    if det == 0.0 || !det.is_finite() {
        return Err(SolverError::RefinementError(
            "constraint border is singular".to_string(),
        ));
    }
    let b1 = -f_mass - m_y[0];
    let b2 = -q_val - g_y[0];
    let dl = (b1 * g_y[2] - b2 * m_y[2]) / det;
    let ds = (m_y[1] * b2 - g_y[1] * b1) / det;
    let mut du = vec![0.0; m];
    for (idx, j) in (1..m - 1).enumerate() {
        du[j] = y0[idx] + dl * y1[idx] + ds * y2[idx];
    }
    Ok((RadialFunction::new(Arc::clone(grid), du)?, dl, ds))
}

/// Thomas elimination with a shared matrix and several right-hand sides.
fn solve_tridiagonal_multi(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &mut [Vec<f64>],
) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(SolverError::RefinementError(
            "zero pivot in the tridiagonal elimination".to_string(),
        ));
    }
    c[0] = sup[0] / beta;
    for d in rhs.iter_mut() {
        d[0] /= beta;
    }
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(SolverError::RefinementError(
                "zero pivot in the tridiagonal elimination".to_string(),
            ));
        }
        if i < n - 1 {
            c[i] = sup[i] / beta;
        }
        for d in rhs.iter_mut() {
            d[i] = (d[i] - sub[i] * d[i - 1]) / beta;
        }
    }
    for i in (0..n - 1).rev() {
        for d in rhs.iter_mut() {
            d[i] -= c[i] * d[i + 1];
        }
    }
    Ok(())
}

fn solve_tridiagonal_three(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs0: &[f64],
    rhs1: &[f64],
    rhs2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut work = [rhs0.to_vec(), rhs1.to_vec(), rhs2.to_vec()];
    solve_tridiagonal_multi(sub, diag, sup, &mut work)?;
    let [y0, y1, y2] = work;
    Ok((y0, y1, y2))
}

/// Mountain-pass geometry probe: random sphere samples are dilated to the
/// gradient levels K and 2K; the probe reports sup J over the low set,
/// inf J over the high set, and whether 0 < sup < inf.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryProbeReport {
    pub k: f64,
    pub samples: usize,
    #[serde(rename = "supJLow")]
    pub sup_j_low: f64,
    #[serde(rename = "infJHigh")]
    pub inf_j_high: f64,
    pub separated: bool,
    #[serde(rename = "lowSetPositive")]
    pub low_set_positive: bool,
    #[serde(rename = "maxGradLow")]
    pub max_grad_low: f64,
}

pub fn geometry_probe(
    grid: &Arc<RadialGrid>,
    model: &NonlinearityModel,
    a: f64,
    k: f64,
    samples: usize,
    rng_seed: u64,
) -> Result<GeometryProbeReport> {
    if !(a.is_finite() && a > 0.0) || !(k.is_finite() && k > 0.0) || samples == 0 {
        return Err(SolverError::invalid(
            "geometry probe needs a > 0, K > 0 and at least one sample".to_string(),
        ));
    }
    if grid.dim() != model.dim() {
        return Err(SolverError::invalid(
            "probe grid dimension does not match the model".to_string(),
        ));
    }
    if model.dim() == 2 {
        if a >= 1.0 {
            return Err(SolverError::invalid(format!(
                "the planar exponential model requires a ∈ (0, 1), got a = {a}"
            )));
        }
        if k >= 0.5 * (1.0 - a * a) {
            return Err(SolverError::invalid(format!(
                "the planar probe requires K < (1 - a²)/2 = {}, got K = {k}",
                0.5 * (1.0 - a * a)
            )));
        }
    }
    let mut rng = profiles::rng_from_seed(rng_seed);
    // Widths sized to the grid: resolvable at M ≳ 4000 yet leaving room for
    // the outward dilation that reaches small gradient levels.
    let width_range = (grid.radius() / 200.0, grid.radius() / 100.0);
    let mut sup_low = f64::NEG_INFINITY;
    let mut inf_high = f64::INFINITY;
    let mut low_positive = true;
    let mut max_grad_low: f64 = 0.0;
    for _ in 0..samples {
        let raw = profiles::random_mixture(grid, &mut rng, width_range);
        if raw.mass() <= 0.0 {
            continue;
        }
        let u = project_sphere(&raw, a)?;
        let low = rescale_gradient(&u, 0.97 * k)?;
        let high = rescale_gradient(&u, 2.0 * k)?;
        let j_low = crate::energy::energy(&low, model)?;
        let j_high = crate::energy::energy(&high, model)?;
        sup_low = sup_low.max(j_low);
        inf_high = inf_high.min(j_high);
        low_positive &= j_low > 0.0;
        max_grad_low = max_grad_low.max(low.grad_norm_sq());
    }
    Ok(GeometryProbeReport {
        k,
        samples,
        sup_j_low: sup_low,
        inf_j_high: inf_high,
        separated: 0.0 < sup_low && sup_low < inf_high,
        low_set_positive: low_positive,
        max_grad_low,
    })
}

/// Dilate until |∇u|² hits `target`; mass is untouched by construction.
/// Large rescalings proceed in bounded chunks so no intermediate profile
/// overshoots the truncation radius.
fn rescale_gradient(u: &RadialFunction, target: f64) -> Result<RadialFunction> {
    let mut v = u.clone();
    let mut prev_misfit = f64::INFINITY;
    for _ in 0..24 {
        let g = v.grad_norm_sq();
        if g <= 0.0 {
            return Err(SolverError::invalid(
                "cannot rescale the gradient of a constant profile".to_string(),
            ));
        }
        let misfit = (target / g).ln();
        if misfit.abs() < 1e-6 {
            break;
        }
        if misfit.abs() >= prev_misfit {
            // Truncation floor reached; report what was achieved.
            break;
        }
        prev_misfit = misfit.abs();
        let s = (0.5 * misfit).clamp(-1.0, 1.0);
        v = dilate_capped(&v, s, 12.0)?.profile;
    }
    Ok(v)
}

/// Fiber maximum of a seed, exposed for upper-bound diagnostics.
pub fn seed_fiber_max(
    seed: &RadialFunction,
    model: &NonlinearityModel,
    cfg: &SolveConfig,
) -> Result<FiberMax> {
    let u = project_sphere(seed, cfg.a)?;
    fiber_maximum(&u, model, cfg.bracket, cfg.s_max, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::gaussian;
    use crate::radial_domain::Grading;

    fn grid3(m: usize, radius: f64) -> Arc<RadialGrid> {
        RadialGrid::new(3, radius, m, Grading::Uniform).unwrap()
    }

    fn model3(mu: f64) -> NonlinearityModel {
        NonlinearityModel::combined_power(mu, 4.0, 3).unwrap()
    }

    #[test]
    fn projection_properties() {
        let grid = grid3(600, 15.0);
        let u = gaussian(&grid, 1.0).unwrap();
        let p = project_sphere(&u, 1.0).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-13);
        // Idempotence and scale invariance.
        let pp = project_sphere(&p, 1.0).unwrap();
        for (x, y) in p.values().iter().zip(pp.values()) {
            assert!((x - y).abs() <= 1e-15 * x.abs().max(1e-300));
        }
        let mut scaled = u.clone();
        scaled.scale(3.7);
        let ps = project_sphere(&scaled, 1.0).unwrap();
        for (x, y) in p.values().iter().zip(ps.values()) {
            assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300));
        }
        let z = RadialFunction::zero(grid);
        assert!(project_sphere(&z, 1.0).is_err());
    }

    #[test]
    fn minimax_converges_on_moderate_problem() {
        let grid = grid3(1200, 18.0);
        let model = model3(30.0);
        let cfg = SolveConfig {
            max_outer_iters: 400,
            ..SolveConfig::default()
        };
        let seed = gaussian(&grid, 1.0).unwrap();
        let report = minimax_solve(&seed, &model, &cfg).unwrap();
        assert!(report.lambda < 0.0, "λ = {}", report.lambda);
        assert!(report.gamma > 0.0);
        assert!(
            report.energy_report.q.abs() <= cfg.tol_q(report.energy_report.grad_sq),
            "Q = {:e}",
            report.energy_report.q
        );
        // σ values never increase across accepted steps (up to the
        // re-dilation evaluation jitter).
        for pair in report.diagnostics.windows(2) {
            assert!(
                pair[1].j <= pair[0].j + 1e-9 * (1.0 + pair[0].j.abs()),
                "σ increased: {} -> {}",
                pair[0].j,
                pair[1].j
            );
        }
        // Energy below the single-path upper bound through the seed.
        let ub = seed_fiber_max(&seed, &model, &cfg).unwrap();
        assert!(report.gamma <= ub.j_max + 1e-9);
    }

    #[test]
    fn minimax_alone_converges_at_matched_tolerance() {
        // The descent stage bottoms out at the discretization floor of the
        // constrained landscape; with a tolerance above that floor its own
        // report converges, with the multiplier already negative.
        let grid = grid3(1600, 18.0);
        let model = model3(40.0);
        let cfg = SolveConfig {
            tol_r_rel: 5e-3,
            ..SolveConfig::default()
        };
        let seed = gaussian(&grid, 1.0).unwrap();
        let report = minimax_solve(&seed, &model, &cfg).unwrap();
        assert!(report.converged, "message: {:?}", report.message);
        assert!(report.lambda < 0.0);
    }

    #[test]
    fn iterate_history_stays_exponentially_integrable() {
        // Planar solver trajectories keep |∇u|² < 1 - a², so their t-power
        // exponential functionals stay uniformly bounded.
        let grid = RadialGrid::new(2, 20.0, 1200, Grading::Uniform).unwrap();
        let model = NonlinearityModel::exp_critical(800.0, 6.0).unwrap();
        let a = 0.5;
        let seed = gaussian(&grid, 1.0).unwrap();
        let mut history = vec![project_sphere(&seed, a).unwrap()];
        for iters in [2usize, 6, 20, 200] {
            let cfg = SolveConfig {
                a,
                max_outer_iters: iters,
                ..SolveConfig::default()
            };
            history.push(minimax_solve(&seed, &model, &cfg).unwrap().profile);
        }
        let report = crate::constants::exp_integrability_probe(&history, 1.05).unwrap();
        assert!(report.hypothesis_holds, "{report:?}");
        assert!(report.max_value.is_finite());
    }

    #[test]
    fn newton_refine_reaches_small_residual_and_quadratic_tail() {
        let grid = grid3(2600, 16.0);
        let model = model3(30.0);
        let cfg = SolveConfig::default();
        let seed = gaussian(&grid, 1.0).unwrap();
        let mm = minimax_solve(&seed, &model, &cfg).unwrap();
        let refined = newton_refine(&mm.profile, &model, &cfg).unwrap();
        assert!(refined.converged, "message: {:?}", refined.message);
        let rep = &refined.energy_report;
        assert!(rep.residual_l2 <= cfg.tol_r(&refined.profile));
        assert!(rep.q.abs() <= cfg.tol_q(rep.grad_sq), "Q = {:e}", rep.q);
        assert!((rep.mass - 1.0).abs() < 1e-12);
        assert!(rep.lambda < 0.0);
        // The multiplier matches its integral formula at the output.
        let lam = lambda_multiplier(&refined.profile, &model).unwrap();
        assert!(((refined.lambda - lam) / lam).abs() < 1e-10);
        // Quadratic tail: convergence order estimate from the last damped-free
        // steps exceeds ~1.5.
        let take: Vec<f64> = refined
            .diagnostics
            .iter()
            .map(|d| d.residual)
            .filter(|&r| r > 1e-14 && r < 1.0)
            .collect();
        if take.len() >= 3 {
            let n = take.len();
            let order = (take[n - 1] / take[n - 2]).ln() / (take[n - 2] / take[n - 3]).ln();
            assert!(order > 1.4, "order estimate {order}, history {take:?}");
        }
    }

    #[test]
    fn newton_is_a_fixed_point_at_the_solution() {
        let grid = grid3(1600, 16.0);
        let model = model3(40.0);
        let cfg = SolveConfig::default();
        let seed = gaussian(&grid, 1.0).unwrap();
        let solved = newton_refine(
            &minimax_solve(&seed, &model, &cfg).unwrap().profile,
            &model,
            &cfg,
        )
        .unwrap();
        let again = newton_refine(&solved.profile, &model, &cfg).unwrap();
        assert_eq!(again.iterations, 0, "expected zero Newton steps");
        for (x, y) in solved.profile.values().iter().zip(again.profile.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn solves_are_deterministic() {
        let grid = grid3(700, 16.0);
        let model = model3(25.0);
        let cfg = SolveConfig {
            max_outer_iters: 60,
            ..SolveConfig::default()
        };
        let seed = gaussian(&grid, 1.0).unwrap();
        let r1 = minimax_solve(&seed, &model, &cfg).unwrap();
        let r2 = minimax_solve(&seed, &model, &cfg).unwrap();
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(r1.gamma.to_bits(), r2.gamma.to_bits());
        for (x, y) in r1.profile.values().iter().zip(r2.profile.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn planar_config_rejects_mass_at_least_one() {
        let model = NonlinearityModel::exp_critical(1.0, 6.0).unwrap();
        let cfg = SolveConfig {
            a: 1.0,
            ..SolveConfig::default()
        };
        assert!(cfg.validate(&model).is_err());
    }

    #[test]
    fn geometry_probe_separates_at_small_k() {
        let grid = RadialGrid::new(3, 400.0, 6000, Grading::Uniform).unwrap();
        let model = model3(1.0);
        let report = geometry_probe(&grid, &model, 1.0, 2e-2, 40, 11).unwrap();
        assert!(report.separated, "{report:?}");
        assert!(report.low_set_positive);
        assert!(report.max_grad_low <= 2e-2 * 1.001, "{report:?}");
        // Both statistics shrink as K → 0⁺ with separation intact.
        let shrunk = geometry_probe(&grid, &model, 1.0, 2e-3, 40, 11).unwrap();
        assert!(shrunk.separated, "{shrunk:?}");
        assert!(shrunk.sup_j_low < report.sup_j_low);
        assert!(shrunk.inf_j_high < report.inf_j_high);
    }

    #[test]
    fn planar_probe_enforces_k_window() {
        let grid = RadialGrid::new(2, 250.0, 5000, Grading::Uniform).unwrap();
        let model = NonlinearityModel::exp_critical(1.0, 6.0).unwrap();
        assert!(geometry_probe(&grid, &model, 0.5, 0.4, 8, 1).is_err());
        let ok = geometry_probe(&grid, &model, 0.5, 5e-3, 20, 1).unwrap();
        assert!(ok.separated, "{ok:?}");
    }
}
