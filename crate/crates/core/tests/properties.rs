//! Property tests of the structural invariants: constraint preservation,
//! scaling homogeneity, oddness of the nonlinearities, and the fiber-slope
//! identity at randomized inputs.

use std::sync::Arc;

use proptest::prelude::*;

use normsol::energy::{augmented_energy, fiber_slope};
use normsol::fiber_map::dilate;
use normsol::nonlinearity::NonlinearityModel;
use normsol::optimizer::project_sphere;
use normsol::profiles::gaussian;
use normsol::radial_domain::{Grading, RadialFunction, RadialGrid};

fn small_grid(n: u32) -> Arc<RadialGrid> {
    RadialGrid::new(n, 14.0, 700, Grading::Uniform).unwrap()
}

fn narrow_profile(n: u32) -> RadialFunction {
    let grid = small_grid(n);
    let raw = gaussian(&grid, 0.7).unwrap();
    project_sphere(&raw, if n == 2 { 0.5 } else { 1.0 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dilation_preserves_mass_exactly(s in -1.6f64..1.6, n in 2u32..4) {
        let u = narrow_profile(n);
        let d = dilate(&u, s).unwrap();
        let rel = (d.profile.mass() - u.mass()).abs() / u.mass();
        prop_assert!(rel < 1e-13, "mass drift {rel} at s = {s}");
    }

    #[test]
    fn projection_is_idempotent_and_scale_invariant(
        c in 0.05f64..20.0,
        a in 0.1f64..1.5,
        n in 2u32..4,
    ) {
        let grid = small_grid(n);
        let u = gaussian(&grid, 1.0).unwrap();
        let p = project_sphere(&u, a).unwrap();
        prop_assert!((p.mass() - a * a).abs() <= 1e-13 * a * a);
        let mut scaled = u.clone();
        scaled.scale(c);
        let ps = project_sphere(&scaled, a).unwrap();
        for (x, y) in p.values().iter().zip(ps.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }
        let pp = project_sphere(&p, a).unwrap();
        for (x, y) in p.values().iter().zip(pp.values()) {
            prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn nonlinearity_symmetries(t in -3.0f64..3.0, mu in 0.5f64..20.0) {
        prop_assume!(t != 0.0);
        for model in [
            NonlinearityModel::combined_power(mu, 3.6, 3).unwrap(),
            NonlinearityModel::exp_critical(mu, 5.0).unwrap(),
        ] {
            let f_plus = model.f_eval(t).unwrap();
            let f_minus = model.f_eval(-t).unwrap();
            prop_assert_eq!(f_plus.to_bits(), (-f_minus).to_bits(), "f must be odd");
            let big = model.big_f(t).unwrap();
            prop_assert!(big >= 0.0);
            prop_assert_eq!(big.to_bits(), model.big_f(-t).unwrap().to_bits());
            // Superlinearity θF(t) ≤ t f(t) away from the origin.
            prop_assert!(model.theta() * big <= t * f_plus + 1e-12 * (t * f_plus).abs());
        }
    }

    #[test]
    fn fiber_slope_matches_augmented_energy_derivative(s in -1.8f64..1.8, n in 2u32..4) {
        let u = narrow_profile(n);
        let model = if n == 2 {
            NonlinearityModel::exp_critical(3.0, 6.0).unwrap()
        } else {
            NonlinearityModel::combined_power(3.0, 4.0, 3).unwrap()
        };
        let eps = 1e-5;
        let fd = (augmented_energy(&u, s + eps, &model).unwrap()
            - augmented_energy(&u, s - eps, &model).unwrap())
            / (2.0 * eps);
        let slope = fiber_slope(&u, s, &model).unwrap();
        let rel = ((fd - slope) / slope.abs().max(1e-9)).abs();
        prop_assert!(rel < 1e-6, "slope mismatch {rel} at s = {s}");
    }
}
