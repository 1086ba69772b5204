use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use normsol_cli::config::{Mode, RawConfig};
use normsol_cli::{checks, constants_run, solve_run, sweep, CliError};

/// Normalized standing-wave solver: mass-constrained critical points of
/// -Δu = λu + f(u) on radial grids, with decay-law sweeps and property
/// checks.
#[derive(Parser)]
#[command(name = "normsol", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one normalized problem and write profile.csv + report.json.
    Solve(CommonArgs),
    /// Sweep μ with continuation; writes sweep.csv + summary.json with the
    /// fitted decay slope and the detected μ* threshold.
    Sweep(CommonArgs),
    /// Run the cross-module property suite; exit 0 only if all pass.
    Check(CommonArgs),
    /// Compute inequality-constant reports (Sobolev quotient, interpolation
    /// ratios, planar exponential functional).
    Constants(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key = value configuration file (keys match the long options).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (also via the NORMSOL_OUT_DIR environment variable).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all pseudo-random sampling.
    #[arg(long)]
    seed: Option<u64>,

    /// Ambient dimension N (2 = planar exponential model, ≥ 3 = combined
    /// power model).
    #[arg(long)]
    dimension: Option<u32>,
    /// Nonlinearity coefficient μ.
    #[arg(long)]
    mu: Option<f64>,
    /// Sweep range: smallest μ.
    #[arg(long)]
    mu_min: Option<f64>,
    /// Sweep range: largest μ.
    #[arg(long)]
    mu_max: Option<f64>,
    /// Sweep sample count (≥ 5).
    #[arg(long)]
    mu_points: Option<usize>,
    /// Subcritical exponent q ∈ (2 + 4/N, 2*) of the combined power model.
    #[arg(long)]
    q: Option<f64>,
    /// Lower power p > 4 of the planar exponential model.
    #[arg(long)]
    p: Option<f64>,
    /// Prescribed L² norm (mass target a²); a ∈ (0,1) in the plane.
    #[arg(long)]
    a: Option<f64>,
    /// Truncation radius R.
    #[arg(long)]
    radius: Option<f64>,
    /// Grid node count M.
    #[arg(long)]
    nodes: Option<usize>,
    /// Grid grading: uniform | geometric.
    #[arg(long)]
    grading: Option<String>,
    /// Cell-width ratio of the geometric grading (> 1).
    #[arg(long)]
    grading_ratio: Option<f64>,
    /// Outer iteration cap of the minimax descent.
    #[arg(long)]
    max_outer_iters: Option<usize>,
    /// Initial (and maximal) descent step.
    #[arg(long)]
    step_init: Option<f64>,
    /// Pohozaev tolerance, relative to max(1, |∇u|²).
    #[arg(long)]
    tol_q_rel: Option<f64>,
    /// Residual tolerance, relative to ‖u‖_{H¹}.
    #[arg(long)]
    tol_r_rel: Option<f64>,
    /// Stop when ‖g‖·step falls below this.
    #[arg(long)]
    tol_step: Option<f64>,
    /// Resolvable dilation range |s| ≤ s_max.
    #[arg(long)]
    s_max: Option<f64>,
    /// Fiber search bracket, lower end.
    #[arg(long, allow_negative_numbers = true)]
    bracket_lo: Option<f64>,
    /// Fiber search bracket, upper end.
    #[arg(long, allow_negative_numbers = true)]
    bracket_hi: Option<f64>,
    /// Seed profile: gaussian | custom.
    #[arg(long)]
    seed_kind: Option<String>,
    /// Width of the Gaussian seed.
    #[arg(long)]
    seed_width: Option<f64>,
    /// CSV path (columns r,u) of a custom seed profile.
    #[arg(long)]
    seed_profile: Option<PathBuf>,
    /// Newton iteration cap of the refinement stage.
    #[arg(long)]
    newton_max_iters: Option<usize>,
    /// Armijo sufficient-decrease constant in (0,1).
    #[arg(long)]
    armijo_c1: Option<f64>,
    /// Backtracking ratio in (0,1).
    #[arg(long)]
    armijo_backtrack: Option<f64>,
    /// Seed each sweep solve with the previous solution.
    #[arg(long)]
    continuation: Option<bool>,
    /// Scale the truncation radius with the theoretical solution width
    /// along sweeps.
    #[arg(long)]
    auto_scale_grid: Option<bool>,
    /// Refine μ* to an interval by geometric bisection.
    #[arg(long)]
    mu_star_bisect: Option<bool>,
    /// Worker threads for sweeps without continuation.
    #[arg(long)]
    concurrency: Option<usize>,
    /// Sample count for probes.
    #[arg(long)]
    probe_samples: Option<usize>,
    /// Gradient level K for the geometry probe.
    #[arg(long)]
    probe_k: Option<f64>,
}

impl CommonArgs {
    fn into_raw(self) -> Result<(RawConfig, Option<PathBuf>), CliError> {
        let mut overrides = RawConfig::default();
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { overrides.$field = Some(v); })*
            };
        }
        set!(
            dimension, mu, mu_min, mu_max, mu_points, q, p, a, radius, nodes, grading,
            grading_ratio, max_outer_iters, step_init, tol_q_rel, tol_r_rel, tol_step, s_max,
            bracket_lo, bracket_hi, seed_kind, seed_width, seed_profile, newton_max_iters,
            armijo_c1, armijo_backtrack, continuation, auto_scale_grid, mu_star_bisect,
            concurrency, probe_samples, probe_k
        );
        if let Some(out) = self.out {
            overrides.out_dir = Some(out);
        }
        if let Some(seed) = self.seed {
            overrides.rng_seed = Some(seed);
        }
        Ok((overrides, self.config))
    }
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Solve(args) => (Mode::Solve, args),
        Command::Sweep(args) => (Mode::Sweep, args),
        Command::Check(args) => (Mode::Check, args),
        Command::Constants(args) => (Mode::Constants, args),
    };
    let (overrides, config_path) = args.into_raw()?;
    let mut raw = match config_path {
        Some(path) => RawConfig::from_file(&path)?,
        None => RawConfig::default(),
    };
    raw.overlay(overrides);
    let cfg = raw.resolve(mode)?;
    match mode {
        Mode::Solve => solve_run::run_solve(&cfg),
        Mode::Sweep => sweep::run_sweep(&cfg),
        Mode::Check => checks::run_checks(&cfg),
        Mode::Constants => constants_run::run_constants(&cfg),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
