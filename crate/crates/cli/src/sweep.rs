//! The `sweep` mode: solves across a μ-range with continuation seeding,
//! decay-law fit of the mountain-pass level, and μ* detection.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use normsol::optimizer::project_sphere;
use normsol::profiles;
use normsol::radial_domain::{RadialFunction, RadialGrid};

use crate::config::RunConfig;
use crate::solve_run::{build_model_at, build_seed, execute_solve};
use crate::{output, CliError};

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub mu: f64,
    pub gamma: f64,
    pub lambda: f64,
    #[serde(rename = "gradSq")]
    pub grad_sq: f64,
    #[serde(rename = "massCheck")]
    pub mass_check: f64,
    pub converged: bool,
    /// |u|_q^q (resp. |u|_p^p) at the solution, for multiplier cross-checks.
    #[serde(rename = "lqNormPow")]
    pub lq_norm_pow: f64,
    /// ∫F(u) dx at the solution.
    #[serde(rename = "bigFIntegral")]
    pub big_f_integral: f64,
    /// Whether the seed was carried over from the previous record.
    #[serde(rename = "continuationSeeded")]
    pub continuation_seeded: bool,
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub version: &'static str,
    pub config: RunConfig,
    pub records: Vec<SweepRecord>,
    #[serde(rename = "fittedSlope", skip_serializing_if = "Option::is_none")]
    pub fitted_slope: Option<f64>,
    #[serde(rename = "theoreticalExponent")]
    pub theoretical_exponent: f64,
    #[serde(rename = "slopeCheckPass", skip_serializing_if = "Option::is_none")]
    pub slope_check_pass: Option<bool>,
    #[serde(rename = "muStar", skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<f64>,
    #[serde(rename = "muStarInterval", skip_serializing_if = "Option::is_none")]
    pub mu_star_interval: Option<(f64, f64)>,
}

/// γ_μ(a) decay exponent: 4/(N(q-2)-4) for N ≥ 3, 2/(p-4) in the plane.
pub fn theoretical_exponent(cfg: &RunConfig) -> f64 {
    if cfg.dimension == 2 {
        2.0 / (cfg.p - 4.0)
    } else {
        let n = cfg.dimension as f64;
        4.0 / (n * (cfg.q - 2.0) - 4.0)
    }
}

/// Exponent of the solution-width growth in μ, used to auto-scale the
/// truncation radius along the sweep.
fn radius_exponent(cfg: &RunConfig) -> f64 {
    if cfg.dimension == 2 {
        1.0 / (cfg.p - 4.0)
    } else {
        let n = cfg.dimension as f64;
        2.0 / (n * (cfg.q - 2.0) - 4.0)
    }
}

fn grid_for_mu(cfg: &RunConfig, mu: f64) -> Result<Arc<RadialGrid>, CliError> {
    let radius = if cfg.auto_scale_grid {
        cfg.radius * (mu / cfg.mu_min).powf(radius_exponent(cfg))
    } else {
        cfg.radius
    };
    Ok(RadialGrid::new(
        cfg.dimension,
        radius,
        cfg.nodes,
        cfg.grading_enum(),
    )?)
}

fn solve_at(
    cfg: &RunConfig,
    mu: f64,
    seed: &RadialFunction,
    continuation_seeded: bool,
) -> Result<(SweepRecord, Option<RadialFunction>), CliError> {
    let model = build_model_at(cfg, mu)?;
    let grid = Arc::clone(seed.grid());
    // A solve that falls out of the mountain-pass regime (or cannot be
    // refined) is one failed record, not the end of the sweep.
    let outcome = match execute_solve(cfg, &grid, &model, seed) {
        Ok(o) => o,
        Err(CliError::Failure(msg)) => {
            eprintln!("sweep μ={mu:.3e}: solver failure: {msg}");
            return Ok((
                SweepRecord {
                    mu,
                    gamma: f64::NAN,
                    lambda: f64::NAN,
                    grad_sq: f64::NAN,
                    mass_check: f64::NAN,
                    converged: false,
                    lq_norm_pow: f64::NAN,
                    big_f_integral: f64::NAN,
                    continuation_seeded,
                },
                None,
            ));
        }
        Err(other) => return Err(other),
    };
    let rep = &outcome.report.energy_report;
    let lq_norm_pow = outcome.report.profile.lp_norm_pow(model.lower_power())?;
    let (big_f_integral, _) =
        normsol::energy::nonlinear_integrals(&outcome.report.profile, &model)?;
    Ok((
        SweepRecord {
            mu,
            gamma: outcome.report.gamma,
            lambda: outcome.report.lambda,
            grad_sq: rep.grad_sq,
            mass_check: (rep.mass - cfg.a * cfg.a).abs(),
            converged: outcome.report.converged,
            lq_norm_pow,
            big_f_integral,
            continuation_seeded,
        },
        Some(outcome.report.profile),
    ))
}

fn seed_for(
    cfg: &RunConfig,
    grid: &Arc<RadialGrid>,
    previous: Option<&RadialFunction>,
    mu: f64,
) -> Result<RadialFunction, CliError> {
    match previous {
        Some(prev) => {
            // Carry the previous branch point to the new grid and restore
            // the mass constraint exactly.
            let moved = profiles::from_samples(grid, prev.grid().nodes(), prev.values())?;
            Ok(project_sphere(&moved, cfg.a)?)
        }
        None if cfg.auto_scale_grid && cfg.seed_kind == "gaussian" => {
            // Cold starts track the theoretical solution width so the seed
            // stays resolved on the scaled grid.
            let width = cfg.seed_width * (mu / cfg.mu_min).powf(radius_exponent(cfg));
            Ok(profiles::gaussian(grid, width)?)
        }
        None => build_seed(cfg, grid),
    }
}

/// Least-squares slope of log γ against log μ over the converged records in
/// the upper half of the μ-range. Unavailable with fewer than 5 converged
/// records or when the range spans less than two decades.
pub fn fit_slope(records: &[SweepRecord], mu_min: f64, mu_max: f64) -> Option<f64> {
    let converged: Vec<&SweepRecord> = records.iter().filter(|r| r.converged).collect();
    if converged.len() < 5 || mu_max / mu_min < 100.0 {
        return None;
    }
    let split = (mu_min * mu_max).sqrt();
    let pts: Vec<(f64, f64)> = converged
        .iter()
        .filter(|r| r.mu >= split && r.gamma > 0.0)
        .map(|r| (r.mu.ln(), r.gamma.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

fn write_sweep_csv(path: &Path, records: &[SweepRecord]) -> Result<(), CliError> {
    let mut text = String::from("mu,gamma,lambda,gradsq,converged\n");
    for r in records {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.mu, r.gamma, r.lambda, r.grad_sq, r.converged
        ));
    }
    output::write_text(path, &text)
}

/// Execute the sweep and return the typed summary without touching disk.
pub fn run_sweep_summary(cfg: &RunConfig) -> Result<SweepSummary, CliError> {
    let mus: Vec<f64> = (0..cfg.mu_points)
        .map(|k| {
            cfg.mu_min
                * (cfg.mu_max / cfg.mu_min).powf(k as f64 / (cfg.mu_points - 1) as f64)
        })
        .collect();

    let mut records: Vec<SweepRecord> = Vec::with_capacity(mus.len());
    if cfg.continuation || cfg.concurrency <= 1 {
        let mut previous: Option<RadialFunction> = None;
        for &mu in &mus {
            let grid = grid_for_mu(cfg, mu)?;
            let carried = if cfg.continuation {
                previous.as_ref()
            } else {
                None
            };
            let continuation_seeded = carried.is_some();
            let seed = seed_for(cfg, &grid, carried, mu)?;
            let (record, profile) = solve_at(cfg, mu, &seed, continuation_seeded)?;
            if record.converged {
                if let Some(p) = profile {
                    previous = Some(p);
                }
            }
            println!(
                "sweep μ={:10.3e}: converged={} γ={:.6e} λ={:+.6e}",
                record.mu, record.converged, record.gamma, record.lambda
            );
            records.push(record);
        }
    } else {
        // Independent solves may run concurrently; records are merged in μ
        // order so the output is identical to a sequential run.
        let results: Vec<Result<(SweepRecord, Option<RadialFunction>), CliError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = mus
                    .iter()
                    .map(|&mu| {
                        scope.spawn(move || {
                            let grid = grid_for_mu(cfg, mu)?;
                            let seed = seed_for(cfg, &grid, None, mu)?;
                            solve_at(cfg, mu, &seed, false)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep worker panicked"))
                    .collect()
            });
        for result in results {
            let (record, _) = result?;
            println!(
                "sweep μ={:10.3e}: converged={} γ={:.6e} λ={:+.6e}",
                record.mu, record.converged, record.gamma, record.lambda
            );
            records.push(record);
        }
        records.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    }

    let fitted_slope = fit_slope(&records, cfg.mu_min, cfg.mu_max);
    let exponent = theoretical_exponent(cfg);
    let slope_check_pass = fitted_slope.map(|s| s <= -exponent + 0.15);
    let mu_star = records
        .iter()
        .find(|r| r.converged && r.lambda < 0.0)
        .map(|r| r.mu);
    let mu_star_interval = if cfg.mu_star_bisect {
        bisect_mu_star(cfg, &records)?
    } else {
        None
    };

    Ok(SweepSummary {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        records,
        fitted_slope,
        theoretical_exponent: exponent,
        slope_check_pass,
        mu_star,
        mu_star_interval,
    })
}

pub fn run_sweep(cfg: &RunConfig) -> Result<i32, CliError> {
    let summary = run_sweep_summary(cfg)?;
    write_sweep_csv(&cfg.out_dir.join("sweep.csv"), &summary.records)?;
    output::write_json(&cfg.out_dir.join("summary.json"), &summary)?;

    match summary.fitted_slope {
        Some(slope) => println!(
            "sweep: fitted slope {slope:.4} (theory -{:.4}), μ* = {:?}",
            summary.theoretical_exponent, summary.mu_star
        ),
        None => println!("sweep: slope unavailable (need ≥ 5 converged records over ≥ 2 decades)"),
    }
    let any_converged = summary.records.iter().any(|r| r.converged);
    Ok(if any_converged && summary.slope_check_pass != Some(false) {
        0
    } else {
        1
    })
}

/// Sharpen μ* to an interval [largest failing μ, smallest succeeding μ] by
/// geometric bisection, expanding the bracket downwards when every sweep
/// point already qualifies.
fn bisect_mu_star(
    cfg: &RunConfig,
    records: &[SweepRecord],
) -> Result<Option<(f64, f64)>, CliError> {
    let qualifies = |r: &SweepRecord| r.converged && r.lambda < 0.0;
    let mut hi = match records.iter().find(|r| qualifies(r)) {
        Some(r) => r.mu,
        None => return Ok(None),
    };
    let mut lo = records
        .iter()
        .filter(|r| !qualifies(r) && r.mu < hi)
        .map(|r| r.mu)
        .fold(f64::NAN, f64::max);
    let probe = |mu: f64| -> Result<bool, CliError> {
        let grid = grid_for_mu(cfg, mu)?;
        let seed = seed_for(cfg, &grid, None, mu)?;
        let (record, _) = solve_at(cfg, mu, &seed, false)?;
        Ok(qualifies(&record))
    };
    if lo.is_nan() {
        // Expand geometrically below the sweep range to find a failure.
        let mut candidate = hi / 4.0;
        let mut expansions = 0;
        loop {
            if probe(candidate)? {
                hi = candidate;
            } else {
                lo = candidate;
                break;
            }
            candidate /= 4.0;
            expansions += 1;
            if expansions > 6 {
                return Ok(Some((0.0, hi)));
            }
        }
    }
    for _ in 0..8 {
        let mid = (lo * hi).sqrt();
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.2 {
            break;
        }
    }
    Ok(Some((lo, hi)))
}
