//! Python bindings: the `diagwalk` extension module.
//!
//! Points are passed as sequences of integers and come back as tuples.
//! Malformed requests raise `ValueError`; computations that cannot be done
//! (a recurrent lattice, too many states) raise `RuntimeError`.

use diagwalk_core as core;
use diagwalk_core::{DomainSpec, LatticePoint, PointClass, ReturnStyle};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    if e.is_usage() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn point(coords: Vec<i64>) -> LatticePoint {
    LatticePoint::new(coords)
}

fn quad_spec(tol: Option<f64>, dim: usize) -> PyResult<core::QuadratureSpec> {
    match tol {
        Some(t) => core::QuadratureSpec::with_tol(t).map_err(to_py),
        None => Ok(core::QuadratureSpec::default_for_dim(dim)),
    }
}

/// An absorbing domain on the diagonal lattice.
#[pyclass(module = "diagwalk", name = "Domain", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyDomain {
    inner: DomainSpec,
}

#[pymethods]
impl PyDomain {
    /// Rectangle with interior 1 <= p <= m, 1 <= q <= n.
    #[staticmethod]
    fn rect(m: usize, n: usize) -> PyResult<Self> {
        Self::wrap(DomainSpec::rectangle(m, n))
    }

    #[staticmethod]
    fn semistrip(m: usize) -> PyResult<Self> {
        Self::wrap(DomainSpec::semi_strip(m))
    }

    #[staticmethod]
    fn strip(m: usize) -> PyResult<Self> {
        Self::wrap(DomainSpec::infinite_strip(m))
    }

    #[staticmethod]
    fn halfplane() -> Self {
        PyDomain {
            inner: DomainSpec::HalfPlane2D,
        }
    }

    #[staticmethod]
    fn block(l: usize, m: usize, n: usize) -> PyResult<Self> {
        Self::wrap(DomainSpec::block(l, m, n))
    }

    #[staticmethod]
    fn lattice(d: usize) -> PyResult<Self> {
        Self::wrap(DomainSpec::full_lattice(d))
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    /// "interior", "boundary" or "exterior".
    fn classify(&self, x: Vec<i64>) -> PyResult<&'static str> {
        Ok(match core::classify_point(&self.inner, &point(x)).map_err(to_py)? {
            PointClass::Interior => "interior",
            PointClass::Boundary => "boundary",
            PointClass::Exterior => "exterior",
        })
    }

    fn interior_points(&self) -> PyResult<Vec<Vec<i64>>> {
        let pts = self.inner.interior_points().map_err(to_py)?;
        Ok(pts.into_iter().map(LatticePoint::into_coords).collect())
    }

    fn boundary_set(&self) -> PyResult<Vec<Vec<i64>>> {
        let pts = core::boundary_set(&self.inner).map_err(to_py)?;
        Ok(pts.into_iter().map(LatticePoint::into_coords).collect())
    }

    fn __repr__(&self) -> String {
        format!("Domain.{}", self.inner)
    }
}

impl PyDomain {
    fn wrap(d: core::Result<DomainSpec>) -> PyResult<Self> {
        d.map(|inner| PyDomain { inner }).map_err(to_py)
    }
}

#[pyclass(module = "diagwalk", name = "QuadratureResult", frozen)]
struct PyQuadratureResult {
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    error_estimate: f64,
    #[pyo3(get)]
    evaluations: u64,
    #[pyo3(get)]
    converged: bool,
}

impl From<core::QuadratureResult> for PyQuadratureResult {
    fn from(r: core::QuadratureResult) -> Self {
        PyQuadratureResult {
            value: r.value,
            error_estimate: r.error_estimate,
            evaluations: r.evaluations,
            converged: r.converged,
        }
    }
}

#[pymethods]
impl PyQuadratureResult {
    fn __repr__(&self) -> String {
        format!(
            "QuadratureResult(value={:?}, error_estimate={:?}, evaluations={}, converged={})",
            self.value,
            self.error_estimate,
            self.evaluations,
            if self.converged { "True" } else { "False" }
        )
    }

    fn __float__(&self) -> f64 {
        self.value
    }
}

#[pyclass(module = "diagwalk", name = "McEstimate", frozen)]
struct PyMcEstimate {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    trials: u64,
    #[pyo3(get)]
    truncated_trials: u64,
}

impl From<core::McEstimate> for PyMcEstimate {
    fn from(e: core::McEstimate) -> Self {
        PyMcEstimate {
            mean: e.mean,
            std_error: e.std_error,
            trials: e.trials,
            truncated_trials: e.truncated_trials,
        }
    }
}

#[pymethods]
impl PyMcEstimate {
    fn __repr__(&self) -> String {
        format!(
            "McEstimate(mean={:?}, std_error={:?}, trials={}, truncated_trials={})",
            self.mean, self.std_error, self.trials, self.truncated_trials
        )
    }
}

/// Expected departures from `target` for a walk started at `source`.
#[pyfunction]
fn green(domain: &PyDomain, source: Vec<i64>, target: Vec<i64>) -> PyResult<f64> {
    core::green(&domain.inner, &point(source), &point(target)).map_err(to_py)
}

#[pyfunction]
fn rect_green(m: usize, n: usize, source: Vec<i64>, target: Vec<i64>) -> PyResult<f64> {
    core::rect_green(m, n, &point(source), &point(target)).map_err(to_py)
}

#[pyfunction]
fn semistrip_green(m: usize, source: Vec<i64>, target: Vec<i64>) -> PyResult<f64> {
    core::semistrip_green(m, &point(source), &point(target)).map_err(to_py)
}

#[pyfunction]
fn strip_green(m: usize, a: i64, p: i64, s: i64) -> PyResult<f64> {
    core::strip_green(m, a, p, s).map_err(to_py)
}

#[pyfunction]
fn block_green(l: usize, m: usize, n: usize, source: Vec<i64>, target: Vec<i64>) -> PyResult<f64> {
    core::block_green(l, m, n, &point(source), &point(target)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (a, p, s, tol=None))]
fn halfplane_green(py: Python<'_>, a: i64, p: i64, s: i64, tol: Option<f64>) -> PyResult<PyQuadratureResult> {
    let spec = quad_spec(tol, 2)?;
    py.detach(|| core::halfplane_green(a, p, s, &spec))
        .map(Into::into)
        .map_err(to_py)
}

/// Full-lattice Green's function at displacement `u` (dimension >= 3).
#[pyfunction]
#[pyo3(signature = (u, tol=None))]
fn lattice_green(py: Python<'_>, u: Vec<i64>, tol: Option<f64>) -> PyResult<PyQuadratureResult> {
    let spec = quad_spec(tol, u.len())?;
    let u = point(u);
    py.detach(|| core::lattice_green_nd(&u, &spec))
        .map(Into::into)
        .map_err(to_py)
}

/// Returns `(constant, p_return, p_error_estimate)` for `style` "diagonal"
/// (any `dim >= 3`) or "regular" (the simple cubic lattice).
#[pyfunction]
#[pyo3(signature = (style="diagonal", dim=3, tol=None))]
fn return_constant(
    py: Python<'_>,
    style: &str,
    dim: usize,
    tol: Option<f64>,
) -> PyResult<(PyQuadratureResult, f64, f64)> {
    let style = match style {
        "diagonal" => ReturnStyle::Diagonal(dim),
        "regular" if dim == 3 => ReturnStyle::Regular3D,
        "regular" => return Err(PyValueError::new_err("the regular style is three-dimensional")),
        other => return Err(PyValueError::new_err(format!("unknown style {other:?}"))),
    };
    let spec = quad_spec(tol, dim)?;
    let rc = py.detach(|| core::return_constant(style, &spec)).map_err(to_py)?;
    Ok((rc.constant.into(), rc.p_return, rc.p_error_estimate))
}

/// List of `(boundary point, probability)` pairs in boundary-set order.
#[pyfunction]
fn absorption_probs(domain: &PyDomain, source: Vec<i64>) -> PyResult<Vec<(Vec<i64>, f64)>> {
    let map = core::absorption_probs(&domain.inner, &point(source)).map_err(to_py)?;
    Ok(map
        .entries()
        .iter()
        .map(|(x, v)| (x.coords().to_vec(), *v))
        .collect())
}

#[pyfunction]
fn return_prob_finite(domain: &PyDomain, source: Vec<i64>) -> PyResult<f64> {
    core::return_prob_finite(&domain.inner, &point(source)).map_err(to_py)
}

/// Direct solve of the absorbing chain: `(point, F)` for every interior point.
#[pyfunction]
fn fundamental_matrix_green(
    py: Python<'_>,
    domain: &PyDomain,
    source: Vec<i64>,
) -> PyResult<Vec<(Vec<i64>, f64)>> {
    let dom = domain.inner;
    let src = point(source);
    let row = py.detach(|| core::fundamental_matrix_green(&dom, &src)).map_err(to_py)?;
    Ok(row.into_iter().map(|(x, v)| (x.into_coords(), v)).collect())
}

fn mc_config(trials: u64, seed: u64, max_steps: u64) -> PyResult<core::McConfig> {
    core::McConfig::new(trials, seed, max_steps).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (domain, source, target, trials=100_000, seed=0, max_steps=1_000_000))]
fn mc_expected_departures(
    py: Python<'_>,
    domain: &PyDomain,
    source: Vec<i64>,
    target: Vec<i64>,
    trials: u64,
    seed: u64,
    max_steps: u64,
) -> PyResult<PyMcEstimate> {
    let cfg = mc_config(trials, seed, max_steps)?;
    let (dom, src, tgt) = (domain.inner, point(source), point(target));
    py.detach(|| core::mc_expected_departures(&dom, &src, &tgt, &cfg))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (domain, source, trials=100_000, seed=0, max_steps=1_000_000))]
fn mc_absorption_time(
    py: Python<'_>,
    domain: &PyDomain,
    source: Vec<i64>,
    trials: u64,
    seed: u64,
    max_steps: u64,
) -> PyResult<PyMcEstimate> {
    let cfg = mc_config(trials, seed, max_steps)?;
    let (dom, src) = (domain.inner, point(source));
    py.detach(|| core::mc_absorption_time(&dom, &src, &cfg))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (d, trials=100_000, seed=0, max_steps=1_000_000))]
fn mc_return_prob(py: Python<'_>, d: usize, trials: u64, seed: u64, max_steps: u64) -> PyResult<PyMcEstimate> {
    let cfg = mc_config(trials, seed, max_steps)?;
    py.detach(|| core::mc_return_prob(d, &cfg))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn diagonal_neighbors(x: Vec<i64>) -> Vec<Vec<i64>> {
    core::diagonal_neighbors(&point(x))
        .into_iter()
        .map(LatticePoint::into_coords)
        .collect()
}

#[pyfunction]
fn parity_compatible(x: Vec<i64>, source: Vec<i64>) -> bool {
    core::parity_compatible(&point(x), &point(source))
}

/// `(kind, beta_prime)` for `c * cosh(beta) = 1`; `beta_prime` is None on the
/// infinite branch.
#[pyfunction]
fn solve_branch(c: f64) -> PyResult<(&'static str, Option<f64>)> {
    let br = core::solve_branch(c).map_err(to_py)?;
    let kind = match br.kind() {
        core::BranchKind::Real => "real",
        core::BranchKind::Shifted => "shifted",
        core::BranchKind::Infinite => "infinite",
    };
    Ok((kind, br.beta_prime()))
}

/// Runs the invariant suite; returns `(subject, check, passed, max_deviation)`
/// rows. Without a domain the built-in sample is used.
#[pyfunction]
#[pyo3(signature = (domain=None))]
fn check(py: Python<'_>, domain: Option<&PyDomain>) -> PyResult<Vec<(String, String, bool, f64)>> {
    let dom = domain.map(|d| d.inner);
    let reports = py
        .detach(|| match dom {
            Some(d) => core::check::run_checks(&d).map(|r| vec![r]),
            None => core::check::run_builtin(),
        })
        .map_err(to_py)?;
    Ok(reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .map(|c| (r.subject.clone(), c.name.clone(), c.passed, c.max_deviation))
        })
        .collect())
}

#[pymodule]
fn diagwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<PyQuadratureResult>()?;
    m.add_class::<PyMcEstimate>()?;
    m.add_function(wrap_pyfunction!(green, m)?)?;
    m.add_function(wrap_pyfunction!(rect_green, m)?)?;
    m.add_function(wrap_pyfunction!(semistrip_green, m)?)?;
    m.add_function(wrap_pyfunction!(strip_green, m)?)?;
    m.add_function(wrap_pyfunction!(block_green, m)?)?;
    m.add_function(wrap_pyfunction!(halfplane_green, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_green, m)?)?;
    m.add_function(wrap_pyfunction!(return_constant, m)?)?;
    m.add_function(wrap_pyfunction!(absorption_probs, m)?)?;
    m.add_function(wrap_pyfunction!(return_prob_finite, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_matrix_green, m)?)?;
    m.add_function(wrap_pyfunction!(mc_expected_departures, m)?)?;
    m.add_function(wrap_pyfunction!(mc_absorption_time, m)?)?;
    m.add_function(wrap_pyfunction!(mc_return_prob, m)?)?;
    m.add_function(wrap_pyfunction!(diagonal_neighbors, m)?)?;
    m.add_function(wrap_pyfunction!(parity_compatible, m)?)?;
    m.add_function(wrap_pyfunction!(solve_branch, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
