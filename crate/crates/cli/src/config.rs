//! Run configuration: flat key = value files, command-line overrides, and
//! per-mode defaults.

use std::path::{Path, PathBuf};

use serde::Serialize;

use normsol::optimizer::{SeedKind, SolveConfig};
use normsol::radial_domain::Grading;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Solve,
    Sweep,
    Check,
    Constants,
}

/// Raw option bag: every key optional, resolved against mode defaults.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub dimension: Option<u32>,
    pub mu: Option<f64>,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub mu_points: Option<usize>,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub a: Option<f64>,
    pub radius: Option<f64>,
    pub nodes: Option<usize>,
    pub grading: Option<String>,
    pub grading_ratio: Option<f64>,
    pub max_outer_iters: Option<usize>,
    pub step_init: Option<f64>,
    pub tol_q_rel: Option<f64>,
    pub tol_r_rel: Option<f64>,
    pub tol_step: Option<f64>,
    pub s_max: Option<f64>,
    pub bracket_lo: Option<f64>,
    pub bracket_hi: Option<f64>,
    pub seed_kind: Option<String>,
    pub seed_width: Option<f64>,
    pub seed_profile: Option<PathBuf>,
    pub newton_max_iters: Option<usize>,
    pub armijo_c1: Option<f64>,
    pub armijo_backtrack: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub rng_seed: Option<u64>,
    pub continuation: Option<bool>,
    pub auto_scale_grid: Option<bool>,
    pub mu_star_bisect: Option<bool>,
    pub concurrency: Option<usize>,
    pub probe_samples: Option<usize>,
    pub probe_k: Option<f64>,
}

/// Fully resolved run configuration; echoed verbatim into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub dimension: u32,
    pub mu: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    pub q: f64,
    pub p: f64,
    pub a: f64,
    pub radius: f64,
    pub nodes: usize,
    pub grading: String,
    pub grading_ratio: f64,
    pub max_outer_iters: usize,
    pub step_init: f64,
    pub tol_q_rel: f64,
    pub tol_r_rel: f64,
    pub tol_step: f64,
    pub s_max: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub seed_kind: String,
    pub seed_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_profile: Option<PathBuf>,
    pub newton_max_iters: usize,
    pub armijo_c1: f64,
    pub armijo_backtrack: f64,
    pub out_dir: PathBuf,
    pub rng_seed: u64,
    pub continuation: bool,
    pub auto_scale_grid: bool,
    pub mu_star_bisect: bool,
    pub concurrency: usize,
    pub probe_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_k: Option<f64>,
}

impl RawConfig {
    /// Parse a flat `key = value` file; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<RawConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{}:{}: expected key = value, got '{line}'",
                    path.display(),
                    lineno + 1
                )));
            };
            raw.set(key.trim(), value.trim())?;
        }
        Ok(raw)
    }

    /// Apply one key/value pair (used by file parsing and CLI overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value.parse::<T>().map_err(|_| {
                CliError::Config(format!("key '{key}': cannot parse value '{value}'"))
            })
        }
        fn boolean(key: &str, value: &str) -> Result<bool, CliError> {
            match value {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(CliError::Config(format!(
                    "key '{key}': expected a boolean, got '{value}'"
                ))),
            }
        }
        match key {
            "dimension" => self.dimension = Some(num(key, value)?),
            "mu" => self.mu = Some(num(key, value)?),
            "mu_min" => self.mu_min = Some(num(key, value)?),
            "mu_max" => self.mu_max = Some(num(key, value)?),
            "mu_points" => self.mu_points = Some(num(key, value)?),
            "q" => self.q = Some(num(key, value)?),
            "p" => self.p = Some(num(key, value)?),
            "a" => self.a = Some(num(key, value)?),
            "radius" => self.radius = Some(num(key, value)?),
            "nodes" => self.nodes = Some(num(key, value)?),
            "grading" => self.grading = Some(value.to_string()),
            "grading_ratio" => self.grading_ratio = Some(num(key, value)?),
            "max_outer_iters" => self.max_outer_iters = Some(num(key, value)?),
            "step_init" => self.step_init = Some(num(key, value)?),
            "tol_q_rel" => self.tol_q_rel = Some(num(key, value)?),
            "tol_r_rel" => self.tol_r_rel = Some(num(key, value)?),
            "tol_step" => self.tol_step = Some(num(key, value)?),
            "s_max" => self.s_max = Some(num(key, value)?),
            "bracket_lo" => self.bracket_lo = Some(num(key, value)?),
            "bracket_hi" => self.bracket_hi = Some(num(key, value)?),
            "seed_kind" => self.seed_kind = Some(value.to_string()),
            "seed_width" => self.seed_width = Some(num(key, value)?),
            "seed_profile" => self.seed_profile = Some(PathBuf::from(value)),
            "newton_max_iters" => self.newton_max_iters = Some(num(key, value)?),
            "armijo_c1" => self.armijo_c1 = Some(num(key, value)?),
            "armijo_backtrack" => self.armijo_backtrack = Some(num(key, value)?),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "rng_seed" => self.rng_seed = Some(num(key, value)?),
            "continuation" => self.continuation = Some(boolean(key, value)?),
            "auto_scale_grid" => self.auto_scale_grid = Some(boolean(key, value)?),
            "mu_star_bisect" => self.mu_star_bisect = Some(boolean(key, value)?),
            "concurrency" => self.concurrency = Some(num(key, value)?),
            "probe_samples" => self.probe_samples = Some(num(key, value)?),
            "probe_k" => self.probe_k = Some(num(key, value)?),
            _ => {
                return Err(CliError::Config(format!("unknown configuration key '{key}'")));
            }
        }
        Ok(())
    }

    /// Layer `other` on top of `self` (CLI overrides beat the file).
    pub fn overlay(&mut self, other: RawConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            dimension, mu, mu_min, mu_max, mu_points, q, p, a, radius, nodes, grading,
            grading_ratio, max_outer_iters, step_init, tol_q_rel, tol_r_rel, tol_step, s_max,
            bracket_lo, bracket_hi, seed_kind, seed_width, seed_profile, newton_max_iters,
            armijo_c1, armijo_backtrack, out_dir, rng_seed, continuation, auto_scale_grid,
            mu_star_bisect, concurrency, probe_samples, probe_k
        );
    }

    /// Resolve against per-mode defaults and validate.
    pub fn resolve(self, mode: Mode) -> Result<RunConfig, CliError> {
        let dimension = self.dimension.unwrap_or(3);
        if dimension < 2 {
            return Err(CliError::Config(format!(
                "key 'dimension': must be at least 2, got {dimension}"
            )));
        }
        let planar = dimension == 2;
        let a = self.a.unwrap_or(if planar { 0.5 } else { 1.0 });
        if !(a > 0.0) {
            return Err(CliError::Config(format!("key 'a': must be positive, got {a}")));
        }
        if planar && a >= 1.0 {
            return Err(CliError::Config(format!(
                "key 'a': the planar exponential model needs a ∈ (0, 1), got {a}"
            )));
        }
        // Grid defaults by mode and dimension.
        let (def_radius, def_nodes, def_grading) = match mode {
            Mode::Constants if !planar => (400.0, 4000, "geometric"),
            Mode::Constants => (40.0, 3000, "geometric"),
            Mode::Sweep if planar => (10.0, 6000, "uniform"),
            Mode::Sweep => (40.0, 3000, "uniform"),
            _ if planar => (24.0, 4000, "uniform"),
            _ => (20.0, 4000, "uniform"),
        };
        let grading = self.grading.unwrap_or_else(|| def_grading.to_string());
        match grading.as_str() {
            "uniform" | "geometric" => {}
            other => {
                return Err(CliError::Config(format!(
                    "key 'grading': expected uniform or geometric, got '{other}'"
                )));
            }
        }
        let mu = self.mu.unwrap_or(if planar { 1000.0 } else { 50.0 });
        let mu_min = self.mu_min.unwrap_or(100.0);
        let mu_max = self.mu_max.unwrap_or(10_000.0);
        let mu_points = self.mu_points.unwrap_or(9);
        if mode == Mode::Sweep {
            if !(mu_min > 0.0 && mu_max > mu_min) {
                return Err(CliError::Config(format!(
                    "keys 'mu_min'/'mu_max': need 0 < mu_min < mu_max, got {mu_min}, {mu_max}"
                )));
            }
            if mu_points < 5 {
                return Err(CliError::Config(format!(
                    "key 'mu_points': sweeps need at least 5 sample points, got {mu_points}"
                )));
            }
        }
        if !(mu > 0.0) {
            return Err(CliError::Config(format!("key 'mu': must be positive, got {mu}")));
        }
        let seed_kind = self.seed_kind.unwrap_or_else(|| "gaussian".to_string());
        match seed_kind.as_str() {
            "gaussian" | "custom" => {}
            other => {
                return Err(CliError::Config(format!(
                    "key 'seed_kind': expected gaussian or custom, got '{other}'"
                )));
            }
        }
        if seed_kind == "custom" && self.seed_profile.is_none() {
            return Err(CliError::Config(
                "key 'seed_profile': required when seed_kind = custom".to_string(),
            ));
        }
        let out_dir = self
            .out_dir
            .or_else(|| std::env::var_os("NORMSOL_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));

        let cfg = RunConfig {
            mode,
            dimension,
            mu,
            mu_min,
            mu_max,
            mu_points,
            q: self.q.unwrap_or(4.0),
            p: self.p.unwrap_or(6.0),
            a,
            radius: self.radius.unwrap_or(def_radius),
            nodes: self.nodes.unwrap_or(def_nodes),
            grading,
            grading_ratio: self.grading_ratio.unwrap_or(1.0035),
            max_outer_iters: self.max_outer_iters.unwrap_or(800),
            step_init: self.step_init.unwrap_or(0.4),
            tol_q_rel: self.tol_q_rel.unwrap_or(1e-6),
            tol_r_rel: self.tol_r_rel.unwrap_or(1e-5),
            tol_step: self.tol_step.unwrap_or(1e-13),
            s_max: self.s_max.unwrap_or(4.0),
            bracket_lo: self.bracket_lo.unwrap_or(-3.0),
            bracket_hi: self.bracket_hi.unwrap_or(3.0),
            seed_kind,
            seed_width: self.seed_width.unwrap_or(1.0),
            seed_profile: self.seed_profile,
            newton_max_iters: self.newton_max_iters.unwrap_or(40),
            armijo_c1: self.armijo_c1.unwrap_or(1e-4),
            armijo_backtrack: self.armijo_backtrack.unwrap_or(0.5),
            out_dir,
            rng_seed: self.rng_seed.unwrap_or(7),
            continuation: self.continuation.unwrap_or(true),
            auto_scale_grid: self.auto_scale_grid.unwrap_or(true),
            mu_star_bisect: self.mu_star_bisect.unwrap_or(false),
            concurrency: self.concurrency.unwrap_or(1),
            probe_samples: self.probe_samples.unwrap_or(200),
            probe_k: self.probe_k,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.nodes < 3 {
            return Err(CliError::Config(format!(
                "key 'nodes': need at least 3 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.radius > 0.0) {
            return Err(CliError::Config(format!(
                "key 'radius': must be positive, got {}",
                self.radius
            )));
        }
        if self.grading == "geometric" && !(self.grading_ratio > 1.0) {
            return Err(CliError::Config(format!(
                "key 'grading_ratio': geometric grading needs ratio > 1, got {}",
                self.grading_ratio
            )));
        }
        if self.dimension >= 3 {
            let n = self.dimension as f64;
            let lo = 2.0 + 4.0 / n;
            let hi = 2.0 * n / (n - 2.0);
            if !(self.q > lo && self.q < hi) {
                return Err(CliError::Config(format!(
                    "key 'q': must lie in (2 + 4/N, 2*) = ({lo}, {hi}), got {}",
                    self.q
                )));
            }
        } else if !(self.p > 4.0) {
            return Err(CliError::Config(format!(
                "key 'p': must exceed 4, got {}",
                self.p
            )));
        }
        if !(self.bracket_lo < self.bracket_hi) {
            return Err(CliError::Config(
                "keys 'bracket_lo'/'bracket_hi': empty fiber bracket".to_string(),
            ));
        }
        Ok(())
    }

    pub fn grading_enum(&self) -> Grading {
        if self.grading == "geometric" {
            Grading::Geometric {
                ratio: self.grading_ratio,
            }
        } else {
            Grading::Uniform
        }
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            a: self.a,
            max_outer_iters: self.max_outer_iters,
            step_init: self.step_init,
            tol_q_rel: self.tol_q_rel,
            tol_r_rel: self.tol_r_rel,
            tol_step: self.tol_step,
            s_max: self.s_max,
            bracket: (self.bracket_lo, self.bracket_hi),
            seed_kind: if self.seed_kind == "custom" {
                SeedKind::Custom {
                    path: self.seed_profile.clone().unwrap_or_default(),
                }
            } else {
                SeedKind::Gaussian {
                    width: self.seed_width,
                }
            },
            newton_max_iters: self.newton_max_iters,
            armijo_c1: self.armijo_c1,
            armijo_backtrack: self.armijo_backtrack,
        }
    }

}
