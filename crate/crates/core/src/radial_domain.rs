//! Radial functions on a truncated domain.
//!
//! Profiles u(r) live on a mesh 0 = r_0 < … < r_{M-1} = R with a Dirichlet
//! value u(R) = 0, and integrals over ℝ^N reduce to weighted sums
//! Σ w_i g(r_i) ≈ ω_{N-1} ∫_0^R g(r) r^{N-1} dr via the composite trapezoid
//! rule on the measure r^{N-1} dr. Everything downstream (energies, the
//! Pohozaev functional, multipliers) is built from these sums, so the grid
//! carries both node weights and the cell data used by difference quotients.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};

/// Node placement rule for [`RadialGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    /// Equally spaced nodes.
    Uniform,
    /// Cell widths grow geometrically away from the origin by `ratio` > 1,
    /// concentrating nodes where critical-exponent bubbles concentrate.
    Geometric { ratio: f64 },
}

/// Truncated radial mesh with quadrature weights for ℝ^N integrals.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: u32,
    radius: f64,
    nodes: Vec<f64>,
    /// Node quadrature weights; w_0 = 0 because the r^{N-1} density vanishes
    /// at the origin under the trapezoid rule.
    weights: Vec<f64>,
    /// Cell widths h_i = r_{i+1} - r_i.
    cell_widths: Vec<f64>,
    /// Exact cell masses ω_{N-1} ∫_{r_i}^{r_{i+1}} r^{N-1} dr, used by the
    /// difference form of the Dirichlet energy.
    cell_masses: Vec<f64>,
    grading: Grading,
    surface_area: f64,
}

/// Surface area of the unit sphere in ℝ^N, ω_{N-1} = 2 π^{N/2} / Γ(N/2).
pub fn unit_sphere_area(dim: u32) -> f64 {
    // Γ(N/2) for integer N: (N/2-1)! when N even, (2k)!√π/(4^k k!) at N = 2k+1.
    let gamma_half = |n: u32| -> f64 {
        if n % 2 == 0 {
            let mut g = 1.0;
            for k in 2..(n / 2) {
                g *= k as f64;
            }
            if n / 2 >= 2 {
                g
            } else {
                1.0
            }
        } else {
            let k = (n - 1) / 2;
            let mut g = PI.sqrt();
            for j in 0..k {
                g *= j as f64 + 0.5;
            }
            g
        }
    };
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

impl RadialGrid {
    /// Build a grid on [0, R] with `m` nodes and the given grading.
    pub fn new(dim: u32, radius: f64, m: usize, grading: Grading) -> Result<Arc<Self>> {
        if dim < 2 {
            return Err(SolverError::invalid(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(SolverError::invalid(format!(
                "truncation radius must be positive and finite, got {radius}"
            )));
        }
        if m < 3 {
            return Err(SolverError::invalid(format!(
                "node count must be at least 3, got {m}"
            )));
        }
        let nodes = match grading {
            Grading::Uniform => {
                let h = radius / (m - 1) as f64;
                let mut r: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
                r[m - 1] = radius;
                r
            }
            Grading::Geometric { ratio } => {
                if !ratio.is_finite() || ratio <= 1.0 {
                    return Err(SolverError::invalid(format!(
                        "geometric grading ratio must exceed 1, got {ratio}"
                    )));
                }
                // h_i = h_0 ratio^i with Σ h_i = R.
                let n_cells = (m - 1) as f64;
                let h0 = radius * (ratio - 1.0) / (ratio.powf(n_cells) - 1.0);
                let mut r = Vec::with_capacity(m);
                r.push(0.0);
                let mut h = h0;
                for _ in 0..m - 1 {
                    r.push(r.last().unwrap() + h);
                    h *= ratio;
                }
                r[m - 1] = radius;
                r
            }
        };

        let omega = unit_sphere_area(dim);
        let mut cell_widths = Vec::with_capacity(m - 1);
        let mut cell_masses = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let h = nodes[i + 1] - nodes[i];
            debug_assert!(h > 0.0);
            cell_widths.push(h);
            cell_masses.push(
                omega * (nodes[i + 1].powi(dim as i32) - nodes[i].powi(dim as i32)) / dim as f64,
            );
        }

        // Trapezoid node weights against r^{N-1} dr.
        let mut weights = vec![0.0; m];
        for i in 0..m {
            let spread = if i == 0 {
                cell_widths[0] / 2.0
            } else if i == m - 1 {
                cell_widths[m - 2] / 2.0
            } else {
                (cell_widths[i - 1] + cell_widths[i]) / 2.0
            };
            weights[i] = omega * spread * nodes[i].powi(dim as i32 - 1);
        }

        Ok(Arc::new(RadialGrid {
            dim,
            radius,
            nodes,
            weights,
            cell_widths,
            cell_masses,
            grading,
            surface_area: omega,
        }))
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_widths(&self) -> &[f64] {
        &self.cell_widths
    }

    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_masses
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn surface_area(&self) -> f64 {
        self.surface_area
    }

    /// Σ w_i g(r_i), the discrete ∫_{ℝ^N} g(|x|) dx.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&r, &w)| w * g(r))
            .sum()
    }

    /// Volume of the ball of radius R in closed form, ω_{N-1} R^N / N.
    pub fn ball_volume(&self) -> f64 {
        self.surface_area * self.radius.powi(self.dim as i32) / self.dim as f64
    }

    pub fn same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> bool {
        Arc::ptr_eq(a, b)
            || (a.dim == b.dim
                && a.radius == b.radius
                && a.grading == b.grading
                && a.nodes.len() == b.nodes.len())
    }
}

/// Convenience wrapper matching the construction interface used by the CLI.
pub fn make_grid(dim: u32, radius: f64, m: usize, grading: Grading) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(dim, radius, m, grading)
}

/// Values of a radial profile on a grid; the discrete representative of a
/// function in H¹_rad(ℝ^N) truncated to the ball of radius R.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    /// Wrap raw node values. The Dirichlet value at r = R is enforced by
    /// forcing the last entry to zero.
    pub fn new(grid: Arc<RadialGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SolverError::invalid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::invalid(
                "profile values must be finite".to_string(),
            ));
        }
        *values.last_mut().unwrap() = 0.0;
        Ok(RadialFunction { grid, values })
    }

    /// Sample a function of r on the grid nodes (last node forced to zero).
    pub fn from_fn(grid: Arc<RadialGrid>, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialFunction {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// ∫ |u|² dx. This is the squared L² norm, i.e. the constraint reads
    /// mass(u) = a².
    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(&u, &w)| w * u * u)
            .sum()
    }

    /// ∫ |u|^ξ dx for ξ ≥ 1 (the ξ-th power of the L^ξ norm).
    pub fn lp_norm_pow(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() || xi < 1.0 {
            return Err(SolverError::invalid(format!(
                "Lebesgue exponent must satisfy ξ ≥ 1, got {xi}"
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(self.grid.weights())
            .map(|(&u, &w)| w * u.abs().powf(xi))
            .sum())
    }

    /// ∫ |∇u|² dx through difference quotients centered on cell midpoints,
    /// integrated against the exact cell masses of r^{N-1} dr. The first cell
    /// is skipped: by even symmetry u'(0) = 0, so its contribution is
    /// O(h^{N+2}) and dropping it keeps the energy independent of the
    /// zero-weight origin node.
    pub fn grad_norm_sq(&self) -> f64 {
        self.dirichlet_form(self)
    }

    /// The bilinear form Σ c_i (Δu/h)_i (Δv/h)_i behind [`grad_norm_sq`].
    ///
    /// [`grad_norm_sq`]: RadialFunction::grad_norm_sq
    pub fn dirichlet_form(&self, other: &RadialFunction) -> f64 {
        let u = &self.values;
        let v = &other.values;
        let h = self.grid.cell_widths();
        let c = self.grid.cell_masses();
        let mut acc = 0.0;
        for i in 1..u.len() - 1 {
            let du = (u[i + 1] - u[i]) / h[i];
            let dv = (v[i + 1] - v[i]) / h[i];
            acc += c[i] * du * dv;
        }
        acc
    }

    /// ∫ u v dx by grid quadrature.
    pub fn inner_product(&self, other: &RadialFunction) -> Result<f64> {
        if !RadialGrid::same_grid(&self.grid, &other.grid) {
            return Err(SolverError::GridMismatch(
                "inner product requires both functions on one grid".to_string(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((&u, &v), &w)| w * u * v)
            .sum())
    }

    /// Weighted L² norm √(∫ u² dx); same as √mass but named for residuals.
    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Discrete radial Laplacian u'' + (N-1)/r · u'.
    ///
    /// The origin node uses the symmetric limit N·u''(0) through an even
    /// ghost reflection; the Dirichlet node at R is reported as zero since
    /// the equation is never collocated there.
    pub fn laplacian(&self) -> RadialFunction {
        let u = &self.values;
        let r = self.grid.nodes();
        let h = self.grid.cell_widths();
        let n = self.grid.dim() as f64;
        let m = u.len();
        let mut out = vec![0.0; m];

        // Even extension at the origin: u(r) ≈ u(0) + u''(0) r²/2.
        out[0] = 2.0 * n * (u[1] - u[0]) / (h[0] * h[0]);

        for j in 1..m - 1 {
            let hl = h[j - 1];
            let hr = h[j];
            let denom = hl * hr * (hl + hr);
            let d2 = 2.0 * (hl * u[j + 1] - (hl + hr) * u[j] + hr * u[j - 1]) / denom;
            let d1 = (hl * hl * u[j + 1] + (hr * hr - hl * hl) * u[j] - hr * hr * u[j - 1]) / denom;
            out[j] = d2 + (n - 1.0) / r[j] * d1;
        }

        RadialFunction {
            grid: Arc::clone(&self.grid),
            values: out,
        }
    }

    /// In-place axpy: self += alpha * other. Panics on grid mismatch in
    /// debug builds; callers pair functions from one grid.
    pub fn axpy(&mut self, alpha: f64, other: &RadialFunction) {
        debug_assert!(RadialGrid::same_grid(&self.grid, &other.grid));
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += alpha * o;
        }
        *self.values.last_mut().unwrap() = 0.0;
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(Arc::clone(grid), |r| (-r * r / 2.0).exp()).unwrap()
    }

    #[test]
    fn ball_volume_n3() {
        // ∫ 1 over the unit ball in ℝ³ = 4π/3; fine uniform grid.
        let grid = RadialGrid::new(3, 1.0, 8001, Grading::Uniform).unwrap();
        let vol: f64 = grid.weights().iter().sum();
        let exact = 4.0 * PI / 3.0;
        assert!(
            ((vol - exact) / exact).abs() < 1e-8,
            "ball volume rel err {}",
            ((vol - exact) / exact).abs()
        );
    }

    #[test]
    fn disk_area_n2() {
        // Trapezoid on r dr is exact for the constant integrand.
        let grid = RadialGrid::new(2, 1.0, 1001, Grading::Uniform).unwrap();
        let vol: f64 = grid.weights().iter().sum();
        assert!(((vol - PI) / PI).abs() < 1e-13);
    }

    #[test]
    fn ball_volume_tolerance_on_smooth_grids() {
        // Exact-to-tolerance quadrature of g ≡ 1 at high resolution, both
        // gradings and both dimensions.
        for dim in [2u32, 3] {
            for grading in [Grading::Uniform, Grading::Geometric { ratio: 1.00001 }] {
                let grid = RadialGrid::new(dim, 1.0, 100_001, grading).unwrap();
                let vol: f64 = grid.weights().iter().sum();
                let exact = grid.ball_volume();
                assert!(
                    ((vol - exact) / exact).abs() < 1e-10,
                    "dim {dim} grading {grading:?}: rel err {}",
                    ((vol - exact) / exact).abs()
                );
            }
        }
    }

    #[test]
    fn gaussian_mass_matches_closed_form() {
        // ∫ e^{-r²} dx over ℝ³ = π^{3/2}; R = 20, M = 4000 per the contract.
        let grid = RadialGrid::new(3, 20.0, 4000, Grading::Uniform).unwrap();
        let u = gaussian(&grid);
        let exact = PI.powf(1.5);
        assert!(((u.mass() - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn gaussian_lp_norm_matches_closed_form() {
        // ∫ e^{-2r²} dx over ℝ³ = (π/2)^{3/2}.
        let grid = RadialGrid::new(3, 20.0, 6000, Grading::Uniform).unwrap();
        let u = gaussian(&grid);
        let exact = (PI / 2.0).powf(1.5);
        let got = u.lp_norm_pow(4.0).unwrap();
        assert!(((got - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn gaussian_grad_norm_matches_closed_form() {
        // ∫ |∇e^{-r²/2}|² dx = (3/2) π^{3/2} in ℝ³.
        let grid = RadialGrid::new(3, 20.0, 4000, Grading::Uniform).unwrap();
        let u = gaussian(&grid);
        let exact = 1.5 * PI.powf(1.5);
        assert!(
            ((u.grad_norm_sq() - exact) / exact).abs() < 1e-5,
            "rel err {}",
            ((u.grad_norm_sq() - exact) / exact).abs()
        );
    }

    #[test]
    fn zero_function_norms_vanish() {
        let grid = RadialGrid::new(3, 10.0, 200, Grading::Uniform).unwrap();
        let z = RadialFunction::zero(grid);
        assert_eq!(z.mass(), 0.0);
        assert_eq!(z.grad_norm_sq(), 0.0);
        assert_eq!(z.lp_norm_pow(3.5).unwrap(), 0.0);
    }

    #[test]
    fn constant_profile_grad_is_boundary_layer_only() {
        let grid = RadialGrid::new(3, 10.0, 101, Grading::Uniform).unwrap();
        let u = RadialFunction::from_fn(Arc::clone(&grid), |_| 2.0).unwrap();
        // Only the last cell sees the forced Dirichlet drop.
        let h = grid.cell_widths()[99];
        let c = grid.cell_masses()[99];
        let expected = c * (2.0 / h) * (2.0 / h);
        assert!((u.grad_norm_sq() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn laplacian_of_constant_vanishes_in_interior() {
        let grid = RadialGrid::new(3, 5.0, 101, Grading::Uniform).unwrap();
        let u = RadialFunction::from_fn(Arc::clone(&grid), |_| 3.0).unwrap();
        let lap = u.laplacian();
        // Interior away from the Dirichlet drop at R.
        for j in 0..95 {
            assert!(
                lap.values()[j].abs() < 1e-12,
                "node {j}: {}",
                lap.values()[j]
            );
        }
    }

    #[test]
    fn laplacian_gaussian_pointwise_second_order() {
        // Δ e^{-r²/2} = (r² - 3) e^{-r²/2} in ℝ³; max interior error O(h²).
        let err_at = |m: usize| -> f64 {
            let grid = RadialGrid::new(3, 12.0, m, Grading::Uniform).unwrap();
            let u = gaussian(&grid);
            let lap = u.laplacian();
            let mut worst: f64 = 0.0;
            for (j, &r) in grid.nodes().iter().enumerate().take(m - 1) {
                let exact = (r * r - 3.0) * (-r * r / 2.0).exp();
                worst = worst.max((lap.values()[j] - exact).abs());
            }
            worst
        };
        let e1 = err_at(1000);
        let e2 = err_at(2000);
        let ratio = e1 / e2;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "laplacian refinement ratio {ratio}"
        );
    }

    #[test]
    fn integration_by_parts_to_tolerance() {
        // ⟨Δu, v⟩ vs -⟨∇u, ∇v⟩ by direct summation; both vanish at R.
        let grid = RadialGrid::new(3, 12.0, 120_000, Grading::Uniform).unwrap();
        let u = gaussian(&grid);
        let v = RadialFunction::from_fn(Arc::clone(&grid), |r| (-r * r).exp()).unwrap();
        let lhs = u.laplacian().inner_product(&v).unwrap();
        let rhs = -u.dirichlet_form(&v);
        assert!(
            ((lhs - rhs) / rhs.abs()).abs() < 1e-6,
            "ibp rel err {}",
            ((lhs - rhs) / rhs.abs()).abs()
        );
    }

    #[test]
    fn inner_product_definition_and_bilinearity() {
        let grid = RadialGrid::new(2, 8.0, 500, Grading::Uniform).unwrap();
        let u = gaussian(&grid);
        let v = RadialFunction::from_fn(Arc::clone(&grid), |r| r * (-r).exp()).unwrap();
        let w = RadialFunction::from_fn(Arc::clone(&grid), |r| (1.0 + r).recip()).unwrap();
        let z = RadialFunction::zero(Arc::clone(&grid));

        assert_eq!(u.inner_product(&z).unwrap(), 0.0);
        let self_ip = u.inner_product(&u).unwrap();
        assert!((self_ip - u.mass()).abs() <= 1e-15 * u.mass());

        let mut combo = u.clone();
        combo.scale(0.7);
        combo.axpy(-1.3, &w);
        let lhs = combo.inner_product(&v).unwrap();
        let rhs = 0.7 * u.inner_product(&v).unwrap() - 1.3 * w.inner_product(&v).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g1 = RadialGrid::new(3, 10.0, 100, Grading::Uniform).unwrap();
        let g2 = RadialGrid::new(3, 10.0, 101, Grading::Uniform).unwrap();
        let u = RadialFunction::zero(g1);
        let v = RadialFunction::zero(g2);
        assert!(matches!(
            u.inner_product(&v),
            Err(SolverError::GridMismatch(_))
        ));
    }

    #[test]
    fn invalid_grid_parameters_rejected() {
        assert!(RadialGrid::new(1, 10.0, 100, Grading::Uniform).is_err());
        assert!(RadialGrid::new(3, -1.0, 100, Grading::Uniform).is_err());
        assert!(RadialGrid::new(3, f64::NAN, 100, Grading::Uniform).is_err());
        assert!(RadialGrid::new(3, 10.0, 2, Grading::Uniform).is_err());
        assert!(RadialGrid::new(3, 10.0, 100, Grading::Geometric { ratio: 0.9 }).is_err());
    }

    #[test]
    fn lp_norm_exponent_below_one_rejected() {
        let grid = RadialGrid::new(3, 10.0, 100, Grading::Uniform).unwrap();
        let u = RadialFunction::zero(grid);
        assert!(u.lp_norm_pow(0.5).is_err());
    }

    #[test]
    fn quadrature_is_second_order_on_graded_grids() {
        // Geometric grading breaks the trapezoid telescoping, exposing the
        // genuine O(h²) error; the error must shrink ~4x per doubling.
        let err_at = |m: usize| -> f64 {
            // Keep the total stretch fixed while refining.
            let stretch: f64 = 30.0;
            let ratio = stretch.powf(1.0 / (m as f64 - 2.0));
            let grid = RadialGrid::new(3, 20.0, m, Grading::Geometric { ratio }).unwrap();
            let u = gaussian(&grid);
            let exact = PI.powf(1.5);
            (u.mass() - exact).abs() / exact
        };
        let ratio = err_at(1000) / err_at(2000);
        assert!(
            (3.4..=4.6).contains(&ratio),
            "graded quadrature refinement ratio {ratio}"
        );
    }

    #[test]
    fn weights_nonnegative_and_origin_weight_zero() {
        for grading in [Grading::Uniform, Grading::Geometric { ratio: 1.01 }] {
            let grid = RadialGrid::new(3, 10.0, 400, grading).unwrap();
            assert_eq!(grid.weights()[0], 0.0);
            assert!(grid.weights().iter().all(|&w| w >= 0.0));
            let mut prev = -1.0;
            for &r in grid.nodes() {
                assert!(r > prev);
                prev = r;
            }
        }
    }

    #[test]
    fn operations_are_deterministic() {
        let grid = RadialGrid::new(3, 15.0, 777, Grading::Geometric { ratio: 1.003 }).unwrap();
        let u = gaussian(&grid);
        assert_eq!(u.mass().to_bits(), u.mass().to_bits());
        assert_eq!(u.grad_norm_sq().to_bits(), u.grad_norm_sq().to_bits());
        let a = u.laplacian();
        let b = u.laplacian();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
