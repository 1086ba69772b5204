//! The `solve` mode: one minimax + Newton run, profile CSV and JSON report.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use normsol::energy::EnergyReport;
use normsol::nonlinearity::NonlinearityModel;
use normsol::optimizer::{minimax_solve, newton_refine, IterationRecord, SolutionReport};
use normsol::profiles;
use normsol::radial_domain::{RadialFunction, RadialGrid};

use crate::config::RunConfig;
use crate::{output, CliError};

pub fn build_grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>, CliError> {
    Ok(RadialGrid::new(
        cfg.dimension,
        cfg.radius,
        cfg.nodes,
        cfg.grading_enum(),
    )?)
}

pub fn build_model(cfg: &RunConfig) -> Result<NonlinearityModel, CliError> {
    build_model_at(cfg, cfg.mu)
}

pub fn build_model_at(cfg: &RunConfig, mu: f64) -> Result<NonlinearityModel, CliError> {
    Ok(if cfg.dimension == 2 {
        NonlinearityModel::exp_critical(mu, cfg.p)?
    } else {
        NonlinearityModel::combined_power(mu, cfg.q, cfg.dimension)?
    })
}

pub fn build_seed(cfg: &RunConfig, grid: &Arc<RadialGrid>) -> Result<RadialFunction, CliError> {
    if cfg.seed_kind == "custom" {
        let path = cfg
            .seed_profile
            .as_ref()
            .ok_or_else(|| CliError::Config("seed_profile missing".to_string()))?;
        let (rs, us) = output::read_profile_csv(path)?;
        Ok(profiles::from_samples(grid, &rs, &us)?)
    } else {
        Ok(profiles::gaussian(grid, cfg.seed_width)?)
    }
}

/// Everything the solve report carries, with a fixed field set.
#[derive(Debug, Serialize)]
pub struct SolveReportFile<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub converged: bool,
    pub lambda: f64,
    pub gamma: f64,
    pub iterations: usize,
    #[serde(rename = "newtonIterations")]
    pub newton_iterations: usize,
    #[serde(rename = "energyReport")]
    pub energy_report: &'a EnergyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<&'a String>,
    pub diagnostics: &'a [IterationRecord],
    #[serde(rename = "wallTimeSeconds")]
    pub wall_time_seconds: f64,
}

pub struct SolveOutcome {
    pub report: SolutionReport,
    pub minimax_iterations: usize,
    pub newton_iterations: usize,
}

/// Minimax stage followed by Newton refinement; falls back to the minimax
/// report when refinement declines the input.
pub fn execute_solve(
    cfg: &RunConfig,
    grid: &Arc<RadialGrid>,
    model: &NonlinearityModel,
    seed: &RadialFunction,
) -> Result<SolveOutcome, CliError> {
    let _ = grid;
    let solve_cfg = cfg.solve_config();
    let minimax = minimax_solve(seed, model, &solve_cfg)?;
    let minimax_iterations = minimax.iterations;
    let refined = newton_refine(&minimax.profile, model, &solve_cfg)?;
    let newton_iterations = refined.iterations;
    let mut report = if refined.message.is_some() && !refined.converged {
        // Keep the minimax result with the refinement failure noted.
        let mut mm = minimax;
        mm.message = refined.message.clone();
        mm.converged = false;
        mm
    } else {
        let mut merged = refined;
        let mut diag = minimax.diagnostics;
        diag.extend(merged.diagnostics);
        merged.diagnostics = diag;
        if merged.message.is_none() && !merged.converged {
            // Surface a descent-stage stall that refinement could not cure.
            merged.message = minimax.message;
        }
        merged
    };
    report.iterations = minimax_iterations + newton_iterations;
    Ok(SolveOutcome {
        report,
        minimax_iterations,
        newton_iterations,
    })
}

/// Run the solve mode: write `profile.csv` and `report.json`, return the
/// process exit code (0 iff converged).
pub fn run_solve(cfg: &RunConfig) -> Result<i32, CliError> {
    let start = Instant::now();
    let grid = build_grid(cfg)?;
    let model = build_model(cfg)?;
    let seed = build_seed(cfg, &grid)?;
    let outcome = execute_solve(cfg, &grid, &model, &seed)?;
    let report = &outcome.report;

    output::write_profile_csv(&cfg.out_dir.join("profile.csv"), &report.profile)?;
    let file = SolveReportFile {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        converged: report.converged,
        lambda: report.lambda,
        gamma: report.gamma,
        iterations: outcome.minimax_iterations,
        newton_iterations: outcome.newton_iterations,
        energy_report: &report.energy_report,
        message: report.message.as_ref(),
        diagnostics: &report.diagnostics,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_json(&cfg.out_dir.join("report.json"), &file)?;

    println!(
        "solve: converged={} λ={:.6e} γ={:.6e} |Q|={:.3e} residual={:.3e} ({} outer + {} newton iterations)",
        report.converged,
        report.lambda,
        report.gamma,
        report.energy_report.q.abs(),
        report.energy_report.residual_l2,
        outcome.minimax_iterations,
        outcome.newton_iterations,
    );
    Ok(if report.converged { 0 } else { 1 })
}
