//! Python bindings. Structured results cross the boundary as plain dicts and
//! lists, built from the same JSON the command-line tool writes.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use roysim_core::abm::{run_to_convergence, sample_population, DEFAULT_MAX_ROUNDS};
use roysim_core::dynamics::{self, IntegrateOptions, ENUM_GRID, ENUM_TOL};
use roysim_core::equilibrium::{self as eq, EquilibriumPoint};
use roysim_core::identification::{self as id, CandidateParams, GridSpec, NoiseSpec, ObservedData};
use roysim_core::model::{self, AdvantageSpec, ModelParamsJson};
use roysim_core::policy::{self, Policy};
use roysim_core::{Composition, Error, ModelParams};
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Convergence { .. } | Error::Integration { .. } | Error::Inconsistent(_) | Error::InconsistentCorner(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn comp(r_w: f64, r_m: f64) -> PyResult<Composition> {
    Composition::new(r_w, r_m).map_err(err)
}

/// Serializes through Python's `json` so results arrive as dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = PyModule::import(py, "json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Structural parameters of the two-type model.
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams(ModelParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (*, c_w, c_m, beta, re_w, re_m, mu_w = 1.0, mu_m = 1.0, C_w = 1.0, C_m = 1.0, sigma = 1.0))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn new(c_w: f64, c_m: f64, beta: f64, re_w: f64, re_m: f64, mu_w: f64, mu_m: f64, C_w: f64, C_m: f64, sigma: f64) -> PyResult<Self> {
        let j = ModelParamsJson { mu_w, mu_m, c_w, c_m, big_c_w: C_w, big_c_m: C_m, beta, re_w, re_m, sigma };
        ModelParams::try_from(j).map(Self).map_err(err)
    }

    /// Unit masses and scales with the given preference ratios.
    #[staticmethod]
    fn from_gammas(gamma_w: f64, gamma_m: f64, re_w: f64, re_m: f64, beta: f64) -> PyResult<Self> {
        ModelParams::from_gammas(gamma_w, gamma_m, re_w, re_m, beta).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_dict(py: Python<'_>, d: &Bound<'_, PyAny>) -> PyResult<Self> {
        from_py::<ModelParams>(py, d).map(Self)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ModelParamsJson::from(self.0))
    }

    fn with_sigma(&self, sigma: f64) -> PyResult<Self> {
        self.0.with_sigma(sigma).map(Self).map_err(err)
    }

    #[getter]
    fn gammas(&self) -> (f64, f64) {
        let g = model::gammas(&self.0);
        (g.w, g.m)
    }

    #[getter]
    fn efficient(&self) -> (f64, f64) {
        let e = self.0.efficient();
        (e.w, e.m)
    }

    fn __repr__(&self) -> String {
        let j = ModelParamsJson::from(self.0);
        format!(
            "Params(mu_w={}, mu_m={}, c_w={}, c_m={}, C_w={}, C_m={}, beta={}, re_w={}, re_m={}, sigma={})",
            j.mu_w, j.mu_m, j.c_w, j.c_m, j.big_c_w, j.big_c_m, j.beta, j.re_w, j.re_m, j.sigma
        )
    }
}

/// One equilibrium with its classification.
#[pyclass(name = "Equilibrium", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEquilibrium {
    r_w: f64,
    r_m: f64,
    kind: String,
    stability: String,
    /// `(re, im)` pairs.
    eigenvalues: Vec<(f64, f64)>,
    residual_norm: f64,
}

#[pymethods]
impl PyEquilibrium {
    #[getter]
    fn is_stable(&self) -> bool {
        matches!(self.stability.as_str(), "stable" | "boundary-stable")
    }

    fn __repr__(&self) -> String {
        format!("Equilibrium(r_w={}, r_m={}, kind='{}', stability='{}')", self.r_w, self.r_m, self.kind, self.stability)
    }
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

impl From<&EquilibriumPoint> for PyEquilibrium {
    fn from(e: &EquilibriumPoint) -> Self {
        Self {
            r_w: e.comp.r_w,
            r_m: e.comp.r_m,
            kind: label(&e.kind),
            stability: label(&e.stability),
            eigenvalues: e.eigenvalues.iter().map(|z| (z.re, z.im)).collect(),
            residual_norm: e.residual_norm,
        }
    }
}

/// Observed incomes and sectors with the observed composition.
#[pyclass(name = "ObservedData", frozen, skip_from_py_object)]
struct PyData(ObservedData, NoiseSpec);

#[pymethods]
impl PyData {
    /// Reads `type,sector,income` rows and the JSON sidecar.
    #[staticmethod]
    fn read(csv_path: PathBuf, sidecar_path: PathBuf) -> PyResult<Self> {
        let (d, n) = id::read_observed(&csv_path, &sidecar_path).map_err(err)?;
        Ok(Self(d, n))
    }

    fn write(&self, csv_path: PathBuf, sidecar_path: PathBuf) -> PyResult<()> {
        id::write_observed(&self.0, &self.1, &csv_path, &sidecar_path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn observed_composition(&self) -> (f64, f64) {
        let c = self.0.observed_comp();
        (c.r_w, c.r_m)
    }

    fn samples<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.samples())
    }
}

#[pyfunction]
#[pyo3(signature = (params, grid_n = 64, tol = 1e-10))]
fn enumerate_equilibria(params: &PyParams, grid_n: usize, tol: f64) -> PyResult<Vec<PyEquilibrium>> {
    Ok(eq::enumerate_equilibria(&params.0, grid_n, tol).map_err(err)?.iter().map(PyEquilibrium::from).collect())
}

/// The unique `beta = 1` equilibrium from the closed form.
#[pyfunction]
fn solve_closed_form(params: &PyParams) -> PyResult<PyEquilibrium> {
    Ok((&eq::solve_closed_form_beta1(&params.0).map_err(err)?).into())
}

#[pyfunction]
#[pyo3(signature = (params, tol = 1e-12))]
fn solve_monotone(params: &PyParams, tol: f64) -> PyResult<PyEquilibrium> {
    Ok((&eq::solve_monotone_iteration(&params.0, tol).map_err(err)?).into())
}

#[pyfunction]
#[pyo3(signature = (params, r_w, r_m, tol = 1e-10))]
fn solve_from_seed(params: &PyParams, r_w: f64, r_m: f64, tol: f64) -> PyResult<Option<PyEquilibrium>> {
    Ok(eq::solve_from_seed(&params.0, &comp(r_w, r_m)?, tol).as_ref().map(PyEquilibrium::from))
}

#[pyfunction]
fn residual(params: &PyParams, r_w: f64, r_m: f64) -> PyResult<(f64, f64)> {
    let r = eq::residual(&params.0, &comp(r_w, r_m)?).map_err(err)?;
    Ok((r.e_w, r.e_m))
}

#[pyfunction]
fn flow(params: &PyParams, r_w: f64, r_m: f64) -> PyResult<(f64, f64)> {
    let v = dynamics::flow(&params.0, &comp(r_w, r_m)?);
    Ok((v.v_w, v.v_m))
}

#[pyfunction]
fn verify_corner(params: &PyParams, r_w: f64, r_m: f64) -> PyResult<bool> {
    eq::verify_corner(&params.0, &comp(r_w, r_m)?).map_err(err)
}

#[pyfunction]
fn advantage_quantile(scale: f64, efficient: f64, beta: f64, p: f64) -> PyResult<f64> {
    AdvantageSpec::new(scale, efficient, beta).and_then(|a| a.quantile(p)).map_err(err)
}

#[pyfunction]
fn advantage_cdf(scale: f64, efficient: f64, beta: f64, d: f64) -> PyResult<f64> {
    AdvantageSpec::new(scale, efficient, beta).map(|a| a.cdf(d)).map_err(err)
}

/// Trajectory dict with `times`, `states` (list of `{r_w, r_m}`), `terminal`
/// and `converged_to` (an equilibrium or None).
#[pyfunction]
#[pyo3(signature = (params, r_w, r_m, t_end = 500.0, dt = 0.01))]
fn integrate<'py>(py: Python<'py>, params: &PyParams, r_w: f64, r_m: f64, t_end: f64, dt: f64) -> PyResult<Bound<'py, PyAny>> {
    let eqs = eq::enumerate_equilibria(&params.0, ENUM_GRID, ENUM_TOL).map_err(err)?;
    let opts = IntegrateOptions { t_end, dt, ..Default::default() };
    let tr = dynamics::integrate_with(&params.0, &comp(r_w, r_m)?, &opts, &eqs).map_err(err)?;
    to_py(py, &tr)
}

/// Policy report for a policy dict such as `{"kind": "flat_tax", "tau": 0.2}`.
#[pyfunction]
fn compare_policy<'py>(py: Python<'py>, params: &PyParams, policy: &Bound<'py, PyAny>, r_w: f64, r_m: f64) -> PyResult<Bound<'py, PyAny>> {
    let policy: Policy = from_py(py, policy)?;
    let report = policy::compare(&params.0, &policy, &comp(r_w, r_m)?).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn tax_equilibrium(params: &PyParams, tau: f64) -> PyResult<(f64, f64)> {
    let c = policy::tax_equilibrium(&params.0, tau).map_err(err)?;
    Ok((c.r_w, c.r_m))
}

#[pyfunction]
fn contrarian_threshold<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &policy::contrarian_threshold(&params.0).map_err(err)?)
}

/// Best-response run summary (`rounds`, `converged`, final `r_w`, `r_m`).
#[pyfunction]
#[pyo3(signature = (params, n_w, n_m, seed = 0, max_rounds = DEFAULT_MAX_ROUNDS))]
fn run_oracle<'py>(py: Python<'py>, params: &PyParams, n_w: usize, n_m: usize, seed: u64, max_rounds: usize) -> PyResult<Bound<'py, PyAny>> {
    let mut pop = sample_population(&params.0, n_w, n_m, seed).map_err(err)?;
    to_py(py, &run_to_convergence(&mut pop, &params.0, max_rounds, seed))
}

/// Synthetic data from a candidate dict (`re_w, re_m, c_w, c_m, C_w, C_m, beta`)
/// at the observed composition `(r_w, r_m)`.
#[pyfunction]
#[pyo3(signature = (truth, r_w, r_m, n, seed = 0, pop_ratio = 1.0, min_wage = 0.5, noise = None))]
#[allow(clippy::too_many_arguments)]
fn simulate_data<'py>(
    py: Python<'py>,
    truth: &Bound<'py, PyAny>,
    r_w: f64,
    r_m: f64,
    n: usize,
    seed: u64,
    pop_ratio: f64,
    min_wage: f64,
    noise: Option<&Bound<'py, PyAny>>,
) -> PyResult<PyData> {
    let truth: CandidateParams = from_py(py, truth)?;
    let noise = noise.map(|n| from_py::<NoiseSpec>(py, n)).transpose()?.unwrap_or(NoiseSpec::DEGENERATE);
    let d = id::simulate_data(&truth, comp(r_w, r_m)?, pop_ratio, min_wage, &noise, n, seed).map_err(err)?;
    Ok(PyData(d, noise))
}

/// Identified set over a grid dict; returns `accepted` and per-candidate
/// `diagnostics`.
#[pyfunction]
#[pyo3(signature = (grid, data, y_points = id::DEFAULT_Y_POINTS))]
fn identified_set<'py>(py: Python<'py>, grid: &Bound<'py, PyAny>, data: &PyData, y_points: usize) -> PyResult<Bound<'py, PyAny>> {
    let grid: GridSpec = from_py(py, grid)?;
    let y = id::default_y_grid(&data.0, y_points).map_err(err)?;
    to_py(py, &id::identified_set(&grid, &data.0, &data.1, &y).map_err(err)?)
}

#[pymodule]
fn roysim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_class::<PyData>()?;
    m.add_function(wrap_pyfunction!(enumerate_equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(solve_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(solve_monotone, m)?)?;
    m.add_function(wrap_pyfunction!(solve_from_seed, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(flow, m)?)?;
    m.add_function(wrap_pyfunction!(verify_corner, m)?)?;
    m.add_function(wrap_pyfunction!(advantage_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(advantage_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(compare_policy, m)?)?;
    m.add_function(wrap_pyfunction!(tax_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(contrarian_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(run_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_data, m)?)?;
    m.add_function(wrap_pyfunction!(identified_set, m)?)?;
    Ok(())
}
