//! The `constants` mode: inequality-constant reports. The Sobolev quotient
//! minimized over the extremal-bubble family (N ≥ 3), interpolation-ratio
//! sampling, and the planar exponential functional with its concentration
//! stress test (N = 2).

use serde::Serialize;

use normsol::constants::{
    gn_ratio, moser_functional, sobolev_constant, GridMeta, InequalityReport,
};
use normsol::nonlinearity::ALPHA_0;
use normsol::profiles;
use normsol::radial_domain::{Grading, RadialGrid};

use crate::config::RunConfig;
use crate::{output, CliError};

#[derive(Debug, Serialize)]
pub struct ConstantsReportFile {
    pub version: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sobolev: Option<InequalityReport>,
    #[serde(rename = "gnRatioMax")]
    pub gn_ratio_max: f64,
    #[serde(rename = "gnExponent")]
    pub gn_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moser: Option<MoserSection>,
    #[serde(rename = "gridMeta")]
    pub grid_meta: GridMeta,
}

#[derive(Debug, Serialize)]
pub struct MoserSection {
    /// Max of ∫(e^{αu²}-1) over bounded samples at α = 0.9·4π.
    #[serde(rename = "subcriticalMax")]
    pub subcritical_max: f64,
    /// Functional values along the sharpening concentration family at
    /// α = 1.1·4π; strictly increasing when the threshold is genuine.
    #[serde(rename = "concentrationValues")]
    pub concentration_values: Vec<f64>,
    #[serde(rename = "concentrationParameters")]
    pub concentration_parameters: Vec<f64>,
    #[serde(rename = "strictlyIncreasing")]
    pub strictly_increasing: bool,
}

pub fn run_constants(cfg: &RunConfig) -> Result<i32, CliError> {
    let grid = RadialGrid::new(cfg.dimension, cfg.radius, cfg.nodes, cfg.grading_enum())?;

    let sobolev = if cfg.dimension >= 3 {
        let report = sobolev_constant(cfg.dimension, &grid)?;
        println!(
            "sobolev constant estimate {:.6} (τ* = {:.4})",
            report.value,
            report.parameters.get("tau_star").copied().unwrap_or(0.0)
        );
        Some(report)
    } else {
        None
    };

    // Interpolation-ratio sampling: the empirical constant over random
    // smooth profiles.
    let xi = if cfg.dimension >= 3 {
        0.5 * (2.0 + 2.0 * cfg.dimension as f64 / (cfg.dimension as f64 - 2.0))
    } else {
        4.0
    };
    let mut rng = profiles::rng_from_seed(cfg.rng_seed);
    let mut gn_max: f64 = 0.0;
    for _ in 0..cfg.probe_samples {
        let u = profiles::random_positive_mixture(&grid, &mut rng, (0.5, 3.0));
        gn_max = gn_max.max(gn_ratio(&u, xi)?);
    }
    println!("interpolation ratio: empirical max {gn_max:.6} at ξ = {xi}");

    let moser = if cfg.dimension == 2 {
        let mut rng = profiles::rng_from_seed(cfg.rng_seed + 1);
        let mut sub_max: f64 = 0.0;
        for _ in 0..cfg.probe_samples.min(100) {
            let raw = profiles::random_positive_mixture(&grid, &mut rng, (0.4, 3.0));
            let grad_scale = (0.995 / raw.grad_norm_sq()).sqrt();
            let mass_scale = (0.81 / raw.mass()).sqrt();
            let mut u = raw;
            u.scale(grad_scale.min(mass_scale));
            sub_max = sub_max.max(moser_functional(&u, 0.9 * ALPHA_0)?);
        }
        let conc_grid = RadialGrid::new(2, 2.0, 9000, Grading::Geometric { ratio: 1.0012 })?;
        let ks = [4.0, 8.0, 16.0, 32.0, 64.0];
        let mut values = Vec::new();
        for &k in &ks {
            let u = profiles::moser_profile(&conc_grid, 1.0, k)?;
            values.push(moser_functional(&u, 1.1 * ALPHA_0)?);
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        println!(
            "exponential functional: subcritical max {sub_max:.4}, concentration trend {}",
            if increasing { "increasing" } else { "flat" }
        );
        Some(MoserSection {
            subcritical_max: sub_max,
            concentration_values: values,
            concentration_parameters: ks.to_vec(),
            strictly_increasing: increasing,
        })
    } else {
        None
    };

    let file = ConstantsReportFile {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        sobolev,
        gn_ratio_max: gn_max,
        gn_exponent: xi,
        moser,
        grid_meta: GridMeta::of(&grid),
    };
    output::write_json(&cfg.out_dir.join("constants.json"), &file)?;
    Ok(0)
}
