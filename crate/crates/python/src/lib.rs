//! Python bindings: grids, profiles, nonlinearity models, the energy and
//! Pohozaev functionals, the dilation fiber, and the two solver stages.

use std::sync::Arc;

use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use normsol::constants as constants_mod;
use normsol::energy as energy_mod;
use normsol::fiber_map;
use normsol::nonlinearity::NonlinearityModel;
use normsol::optimizer::{self, SolveConfig};
use normsol::profiles;
use normsol::radial_domain::{Grading, RadialFunction, RadialGrid as CoreGrid};
use normsol::SolverError;

fn err(e: SolverError) -> PyErr {
    match e {
        SolverError::RangeError(m) => PyOverflowError::new_err(m),
        SolverError::InvalidArgument(m) | SolverError::GridMismatch(m) => {
            PyValueError::new_err(m)
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Truncated radial mesh with quadrature weights for ℝ^N integrals.
#[pyclass(name = "RadialGrid", frozen)]
struct PyGrid {
    inner: Arc<CoreGrid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (dimension, radius, nodes, grading="uniform", grading_ratio=1.0035))]
    fn new(
        dimension: u32,
        radius: f64,
        nodes: usize,
        grading: &str,
        grading_ratio: f64,
    ) -> PyResult<Self> {
        let grading = match grading {
            "uniform" => Grading::Uniform,
            "geometric" => Grading::Geometric {
                ratio: grading_ratio,
            },
            other => {
                return Err(PyValueError::new_err(format!(
                    "grading must be uniform or geometric, got '{other}'"
                )))
            }
        };
        Ok(PyGrid {
            inner: CoreGrid::new(dimension, radius, nodes, grading).map_err(err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> u32 {
        self.inner.dim()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RadialGrid(dimension={}, radius={}, nodes={})",
            self.inner.dim(),
            self.inner.radius(),
            self.inner.len()
        )
    }
}

/// Radial profile on a grid; the last node is pinned to zero.
#[pyclass(name = "RadialFunction", skip_from_py_object)]
#[derive(Clone)]
struct PyProfile {
    inner: RadialFunction,
}

#[pymethods]
impl PyProfile {
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyProfile {
            inner: RadialFunction::new(Arc::clone(&grid.inner), values).map_err(err)?,
        })
    }

    #[staticmethod]
    fn gaussian(grid: &PyGrid, width: f64) -> PyResult<Self> {
        Ok(PyProfile {
            inner: profiles::gaussian(&grid.inner, width).map_err(err)?,
        })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn radii(&self) -> Vec<f64> {
        self.inner.grid().nodes().to_vec()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn grad_norm_sq(&self) -> f64 {
        self.inner.grad_norm_sq()
    }

    fn lp_norm_pow(&self, xi: f64) -> PyResult<f64> {
        self.inner.lp_norm_pow(xi).map_err(err)
    }

    fn laplacian(&self) -> PyProfile {
        PyProfile {
            inner: self.inner.laplacian(),
        }
    }

    fn inner_product(&self, other: &PyProfile) -> PyResult<f64> {
        self.inner.inner_product(&other.inner).map_err(err)
    }

    fn project_sphere(&self, a: f64) -> PyResult<PyProfile> {
        Ok(PyProfile {
            inner: optimizer::project_sphere(&self.inner, a).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }
}

/// Combined-power (N ≥ 3) or exponential-critical (N = 2) nonlinearity.
#[pyclass(name = "NonlinearityModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: NonlinearityModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn combined_power(mu: f64, q: f64, dimension: u32) -> PyResult<Self> {
        Ok(PyModel {
            inner: NonlinearityModel::combined_power(mu, q, dimension).map_err(err)?,
        })
    }

    #[staticmethod]
    fn exp_critical(mu: f64, p: f64) -> PyResult<Self> {
        Ok(PyModel {
            inner: NonlinearityModel::exp_critical(mu, p).map_err(err)?,
        })
    }

    fn f(&self, t: f64) -> PyResult<f64> {
        self.inner.f_eval(t).map_err(err)
    }

    fn big_f(&self, t: f64) -> PyResult<f64> {
        self.inner.big_f(t).map_err(err)
    }

    fn f_prime(&self, t: f64) -> PyResult<f64> {
        self.inner.f_prime(t).map_err(err)
    }

    #[getter]
    fn dimension(&self) -> u32 {
        self.inner.dim()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }
}

/// Converged (or best-effort) solve result.
#[pyclass(name = "SolutionReport", frozen)]
struct PySolution {
    #[pyo3(get)]
    converged: bool,
    /// Lagrange multiplier λ.
    #[pyo3(get)]
    lam: f64,
    /// Energy level J(u); the mountain-pass estimate.
    #[pyo3(get)]
    gamma: f64,
    #[pyo3(get)]
    pohozaev: f64,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    mass: f64,
    #[pyo3(get)]
    grad_sq: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    message: Option<String>,
    profile: RadialFunction,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn profile(&self) -> PyProfile {
        PyProfile {
            inner: self.profile.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SolutionReport(converged={}, lam={:.6e}, gamma={:.6e}, residual={:.3e})",
            self.converged, self.lam, self.gamma, self.residual
        )
    }
}

fn wrap_solution(report: optimizer::SolutionReport) -> PySolution {
    PySolution {
        converged: report.converged,
        lam: report.lambda,
        gamma: report.gamma,
        pohozaev: report.energy_report.q,
        residual: report.energy_report.residual_l2,
        mass: report.energy_report.mass,
        grad_sq: report.energy_report.grad_sq,
        iterations: report.iterations,
        message: report.message,
        profile: report.profile,
    }
}

fn config_from_kwargs(
    a: f64,
    max_outer_iters: Option<usize>,
    tol_q_rel: Option<f64>,
    tol_r_rel: Option<f64>,
) -> SolveConfig {
    let mut cfg = SolveConfig {
        a,
        ..SolveConfig::default()
    };
    if let Some(v) = max_outer_iters {
        cfg.max_outer_iters = v;
    }
    if let Some(v) = tol_q_rel {
        cfg.tol_q_rel = v;
    }
    if let Some(v) = tol_r_rel {
        cfg.tol_r_rel = v;
    }
    cfg
}

#[pyfunction]
fn energy(u: &PyProfile, model: &PyModel) -> PyResult<f64> {
    energy_mod::energy(&u.inner, &model.inner).map_err(err)
}

#[pyfunction]
fn pohozaev(u: &PyProfile, model: &PyModel) -> PyResult<f64> {
    energy_mod::pohozaev(&u.inner, &model.inner).map_err(err)
}

#[pyfunction]
fn lambda_multiplier(u: &PyProfile, model: &PyModel) -> PyResult<f64> {
    energy_mod::lambda_multiplier(&u.inner, &model.inner).map_err(err)
}

#[pyfunction]
fn augmented_energy(u: &PyProfile, s: f64, model: &PyModel) -> PyResult<f64> {
    energy_mod::augmented_energy(&u.inner, s, &model.inner).map_err(err)
}

#[pyfunction]
fn dilate(u: &PyProfile, s: f64) -> PyResult<PyProfile> {
    Ok(PyProfile {
        inner: fiber_map::dilate(&u.inner, s).map_err(err)?.profile,
    })
}

#[pyfunction]
#[pyo3(signature = (u, model, bracket=(-3.0, 3.0)))]
fn max_over_dilations(u: &PyProfile, model: &PyModel, bracket: (f64, f64)) -> PyResult<(f64, f64)> {
    let fm = fiber_map::max_over_dilations(&u.inner, &model.inner, bracket).map_err(err)?;
    Ok((fm.s_star, fm.j_max))
}

#[pyfunction]
#[pyo3(signature = (seed, model, a, max_outer_iters=None, tol_q_rel=None, tol_r_rel=None))]
fn minimax_solve(
    seed: &PyProfile,
    model: &PyModel,
    a: f64,
    max_outer_iters: Option<usize>,
    tol_q_rel: Option<f64>,
    tol_r_rel: Option<f64>,
) -> PyResult<PySolution> {
    let cfg = config_from_kwargs(a, max_outer_iters, tol_q_rel, tol_r_rel);
    optimizer::minimax_solve(&seed.inner, &model.inner, &cfg)
        .map(wrap_solution)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (u, model, a, tol_q_rel=None, tol_r_rel=None))]
fn newton_refine(
    u: &PyProfile,
    model: &PyModel,
    a: f64,
    tol_q_rel: Option<f64>,
    tol_r_rel: Option<f64>,
) -> PyResult<PySolution> {
    let cfg = config_from_kwargs(a, None, tol_q_rel, tol_r_rel);
    optimizer::newton_refine(&u.inner, &model.inner, &cfg)
        .map(wrap_solution)
        .map_err(err)
}

/// Minimax descent followed by Newton refinement.
#[pyfunction]
#[pyo3(signature = (seed, model, a, max_outer_iters=None, tol_q_rel=None, tol_r_rel=None))]
fn solve(
    seed: &PyProfile,
    model: &PyModel,
    a: f64,
    max_outer_iters: Option<usize>,
    tol_q_rel: Option<f64>,
    tol_r_rel: Option<f64>,
) -> PyResult<PySolution> {
    let cfg = config_from_kwargs(a, max_outer_iters, tol_q_rel, tol_r_rel);
    let mm = optimizer::minimax_solve(&seed.inner, &model.inner, &cfg).map_err(err)?;
    optimizer::newton_refine(&mm.profile, &model.inner, &cfg)
        .map(wrap_solution)
        .map_err(err)
}

#[pyfunction]
fn sobolev_constant(dimension: u32, grid: &PyGrid) -> PyResult<(f64, f64)> {
    let report = constants_mod::sobolev_constant(dimension, &grid.inner).map_err(err)?;
    let tau = report
        .parameters
        .get("tau_star")
        .copied()
        .unwrap_or(f64::NAN);
    Ok((report.value, tau))
}

#[pyfunction]
fn moser_functional(u: &PyProfile, alpha: f64) -> PyResult<f64> {
    constants_mod::moser_functional(&u.inner, alpha).map_err(err)
}

#[pyfunction]
fn gn_ratio(u: &PyProfile, xi: f64) -> PyResult<f64> {
    constants_mod::gn_ratio(&u.inner, xi).map_err(err)
}

#[pymodule]
fn normsol_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(pohozaev, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(augmented_energy, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(max_over_dilations, m)?)?;
    m.add_function(wrap_pyfunction!(minimax_solve, m)?)?;
    m.add_function(wrap_pyfunction!(newton_refine, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_constant, m)?)?;
    m.add_function(wrap_pyfunction!(moser_functional, m)?)?;
    m.add_function(wrap_pyfunction!(gn_ratio, m)?)?;
    m.add("ALPHA_0", normsol::nonlinearity::ALPHA_0)?;
    Ok(())
}
