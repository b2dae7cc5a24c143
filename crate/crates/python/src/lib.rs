//! Python bindings for `groth-core`.

use std::cell::RefCell;

use groth_core::matrix::{self, MatrixFormat, DEFAULT_PSD_TOL};
use groth_core::special::DEFAULT_INNER_ORDER;
use groth_core::{
    en_analysis, oracle, rounding, sdp_solver, special, Assignment, GrothError, PsdMatrix, VectorSet, WeightedGraph,
};
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: GrothError) -> PyErr {
    match e {
        GrothError::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        GrothError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vectors(rows: Vec<Vec<f64>>) -> PyResult<VectorSet> {
    VectorSet::from_rows(&rows).map_err(to_py)
}

fn format(name: Option<&str>) -> PyResult<Option<MatrixFormat>> {
    name.map(str::parse).transpose().map_err(to_py)
}

/// Adapts a Python callable to `f64 -> f64`. The first exception raised is
/// kept and the call returns NaN from then on.
struct Kernel<'py> {
    f: Bound<'py, PyAny>,
    err: RefCell<Option<PyErr>>,
}

impl<'py> Kernel<'py> {
    fn new(f: Bound<'py, PyAny>) -> Self {
        Self { f, err: RefCell::new(None) }
    }

    fn eval(&self, t: f64) -> f64 {
        if self.err.borrow().is_some() {
            return f64::NAN;
        }
        match self.f.call1((t,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                *self.err.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    }

    fn finish<T>(self, r: Result<T, GrothError>) -> PyResult<T> {
        if let Some(e) = self.err.into_inner() {
            return Err(e);
        }
        r.map_err(to_py)
    }
}

#[pyclass(name = "PsdMatrix", module = "groth", frozen)]
struct PyPsdMatrix {
    inner: PsdMatrix,
}

#[pymethods]
impl PyPsdMatrix {
    /// Symmetric matrix from a list of rows; it is symmetrized, not certified.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: PsdMatrix::from_rows(&rows).map_err(to_py)? })
    }

    #[staticmethod]
    fn ones(m: usize) -> PyResult<Self> {
        Ok(Self { inner: PsdMatrix::ones(m).map_err(to_py)? })
    }

    #[staticmethod]
    fn identity(m: usize) -> PyResult<Self> {
        Ok(Self { inner: PsdMatrix::identity(m).map_err(to_py)? })
    }

    /// Laplacian of the graph on `m` vertices with edges `(i, j, w)`.
    #[staticmethod]
    fn laplacian(m: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let g = WeightedGraph::new(m, edges).map_err(to_py)?;
        Ok(Self { inner: matrix::laplacian(&g) })
    }

    #[staticmethod]
    fn random_gram(m: usize, r: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: matrix::random_gram(m, r, seed).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn load(path: &str, format: Option<&str>) -> PyResult<Self> {
        Ok(Self { inner: matrix::load_matrix(path, self::format(format)?).map_err(to_py)? })
    }

    #[pyo3(signature = (path, format=None))]
    fn save(&self, path: &str, format: Option<&str>) -> PyResult<()> {
        matrix::save_matrix(&self.inner, path, self::format(format)?).map_err(to_py)
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    /// `(min_eigenvalue, passed)` of the PSD certificate.
    #[pyo3(signature = (tol=DEFAULT_PSD_TOL))]
    fn validate_psd(&self, tol: f64) -> PyResult<(f64, bool)> {
        let r = matrix::validate_psd(&self.inner, tol).map_err(to_py)?;
        Ok((r.min_eigenvalue, r.pass))
    }

    fn __repr__(&self) -> String {
        format!("PsdMatrix(m={}, scale={:e})", self.inner.order(), self.inner.scale())
    }
}

#[pyclass(name = "GramSolution", module = "groth", frozen)]
struct PyGramSolution {
    inner: sdp_solver::GramSolution,
}

#[pymethods]
impl PyGramSolution {
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn restart(&self) -> usize {
        self.inner.restart
    }

    #[getter]
    fn vectors(&self) -> Vec<Vec<f64>> {
        self.inner.vectors.to_rows()
    }

    /// Wraps externally computed unit vectors; they are normalized.
    #[staticmethod]
    fn from_vectors(a: &PyPsdMatrix, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = sdp_solver::GramSolution::from_vectors(&a.inner, vectors(rows)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "GramSolution(objective={}, k={}, iterations={}, converged={})",
            self.inner.objective, self.inner.k, self.inner.iterations, self.inner.converged
        )
    }
}

#[pyclass(name = "RoundedSolution", module = "groth", frozen)]
struct PyRoundedSolution {
    inner: rounding::RoundedSolution,
}

#[pymethods]
impl PyRoundedSolution {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn seed_used(&self) -> u64 {
        self.inner.seed_used
    }

    #[getter]
    fn vectors(&self) -> Vec<Vec<f64>> {
        self.inner.vectors.to_rows()
    }

    #[staticmethod]
    #[pyo3(signature = (a, rows, seed=0))]
    fn from_vectors(a: &PyPsdMatrix, rows: Vec<Vec<f64>>, seed: u64) -> PyResult<Self> {
        let inner = rounding::RoundedSolution::from_vectors(&a.inner, vectors(rows)?, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!("RoundedSolution(n={}, objective={})", self.inner.n, self.inner.objective)
    }
}

#[pyfunction]
#[pyo3(signature = (a, k=None, tol=1e-10, max_sweeps=10_000, restarts=5, seed=0, check_psd=true))]
#[allow(clippy::too_many_arguments)]
fn solve_sdp_relaxation(
    py: Python<'_>,
    a: &PyPsdMatrix,
    k: Option<usize>,
    tol: f64,
    max_sweeps: usize,
    restarts: usize,
    seed: u64,
    check_psd: bool,
) -> PyResult<PyGramSolution> {
    let cfg = sdp_solver::SolverConfig { k, tol, max_sweeps, restarts, seed, check_psd, ..Default::default() };
    let inner = py.detach(|| sdp_solver::solve_sdp_relaxation(&a.inner, &cfg)).map_err(to_py)?;
    Ok(PyGramSolution { inner })
}

#[pyfunction]
fn objective_value(a: &PyPsdMatrix, rows: Vec<Vec<f64>>) -> PyResult<f64> {
    sdp_solver::objective_value(&a.inner, &vectors(rows)?).map_err(to_py)
}

#[pyfunction]
fn round_rank_n(a: &PyPsdMatrix, g: &PyGramSolution, n: usize, seed: u64) -> PyResult<PyRoundedSolution> {
    let inner = rounding::round_rank_n(&a.inner, &g.inner, n, seed).map_err(to_py)?;
    Ok(PyRoundedSolution { inner })
}

#[pyfunction]
fn best_of_rounds(
    py: Python<'_>,
    a: &PyPsdMatrix,
    g: &PyGramSolution,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<PyRoundedSolution> {
    let inner = py.detach(|| rounding::best_of_rounds(&a.inner, &g.inner, n, trials, seed)).map_err(to_py)?;
    Ok(PyRoundedSolution { inner })
}

/// `(mean, stderr)` of the rounded-to-relaxation objective ratio.
#[pyfunction]
fn expected_ratio_estimate(
    py: Python<'_>,
    a: &PyPsdMatrix,
    g: &PyGramSolution,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let e = py
        .detach(|| rounding::expected_ratio_estimate(&a.inner, &g.inner, n, trials, seed))
        .map_err(to_py)?;
    Ok((e.mean, e.stderr))
}

#[pyfunction]
fn hardness_reduction_check<'py>(
    py: Python<'py>,
    a: &PyPsdMatrix,
    s: &PyRoundedSolution,
) -> PyResult<Bound<'py, PyDict>> {
    let r = rounding::hardness_reduction_check(&a.inner, &s.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lhs", r.lhs)?;
    d.set_item("rhs", r.rhs)?;
    d.set_item("margin", r.margin)?;
    d.set_item("min_eig", r.min_eig)?;
    d.set_item("passed", r.passed())?;
    Ok(d)
}

#[pyfunction]
fn gamma_n(n: usize) -> PyResult<f64> {
    special::gamma_n(n).map_err(to_py)
}

#[pyfunction]
fn c_m(m: usize) -> PyResult<f64> {
    special::c_m(m).map_err(to_py)
}

#[pyfunction]
fn jacobi_poly(i: usize, alpha: f64, t: f64) -> f64 {
    special::jacobi_poly(i, alpha, t)
}

#[pyfunction]
#[pyo3(signature = (f, g, alpha, order=DEFAULT_INNER_ORDER))]
fn inner_product_alpha(f: Bound<'_, PyAny>, g: Bound<'_, PyAny>, alpha: f64, order: usize) -> PyResult<f64> {
    let (kf, kg) = (Kernel::new(f), Kernel::new(g));
    let r = special::inner_product_alpha(|t| kf.eval(t), |t| kg.eval(t), alpha, order);
    kg.finish(Ok(()))?;
    kf.finish(r)
}

#[pyfunction]
fn en_integral(n: usize, t: f64) -> PyResult<f64> {
    en_analysis::en_integral(n, t).map_err(to_py)
}

/// `(mean, stderr)` of the Monte Carlo estimate of `E_n(t)`.
#[pyfunction]
fn en_monte_carlo(py: Python<'_>, n: usize, t: f64, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = py.detach(|| en_analysis::en_monte_carlo(n, t, samples, seed)).map_err(to_py)?;
    Ok((e.mean, e.stderr))
}

#[pyfunction]
fn f1_extract(n: usize) -> PyResult<f64> {
    en_analysis::f1_extract(n).map_err(to_py)
}

/// `(value, minimizer)` of `v(n)`.
#[pyfunction]
fn v_n(py: Python<'_>, n: usize) -> PyResult<(f64, f64)> {
    let r = py.detach(|| en_analysis::v_n(n)).map_err(to_py)?;
    Ok((r.value, r.minimizer))
}

/// `(coefficients, residual)` of a kernel in the Jacobi basis of `S^{m−1}`.
#[pyfunction]
fn positive_type_expand(f: Bound<'_, PyAny>, m: usize, max_degree: usize) -> PyResult<(Vec<f64>, f64)> {
    let k = Kernel::new(f);
    let r = en_analysis::positive_type_expand(|t| k.eval(t), m, max_degree);
    let e = k.finish(r)?;
    Ok((e.coefficients, e.residual))
}

/// Smallest eigenvalue of `(f(v_i·v_j))`.
#[pyfunction]
fn check_positive_type_matrix(f: Bound<'_, PyAny>, rows: Vec<Vec<f64>>) -> PyResult<f64> {
    let vs = vectors(rows)?;
    let k = Kernel::new(f);
    let lam = en_analysis::check_positive_type_matrix(|t| k.eval(t), &vs);
    k.finish(Ok(lam))
}

/// `(value, signs)` of the exact sign optimum.
#[pyfunction]
fn brute_force_sdp1(py: Python<'_>, a: &PyPsdMatrix) -> PyResult<(f64, Vec<i8>)> {
    let r = py.detach(|| oracle::brute_force_sdp1(&a.inner)).map_err(to_py)?;
    match r.argmax {
        Assignment::Signs(s) => Ok((r.value, s)),
        Assignment::Angles(_) => unreachable!("exhaustive search returns signs"),
    }
}

/// `(value, angles)` of the best planar grid configuration.
#[pyfunction]
fn grid_search_rank2(py: Python<'_>, a: &PyPsdMatrix, resolution: usize) -> PyResult<(f64, Vec<f64>)> {
    let r = py.detach(|| oracle::grid_search_rank2(&a.inner, resolution)).map_err(to_py)?;
    match r.argmax {
        Assignment::Angles(th) => Ok((r.value, th)),
        Assignment::Signs(_) => unreachable!("grid search returns angles"),
    }
}

#[pymodule]
fn groth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPsdMatrix>()?;
    m.add_class::<PyGramSolution>()?;
    m.add_class::<PyRoundedSolution>()?;
    m.add_function(wrap_pyfunction!(solve_sdp_relaxation, m)?)?;
    m.add_function(wrap_pyfunction!(objective_value, m)?)?;
    m.add_function(wrap_pyfunction!(round_rank_n, m)?)?;
    m.add_function(wrap_pyfunction!(best_of_rounds, m)?)?;
    m.add_function(wrap_pyfunction!(expected_ratio_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(hardness_reduction_check, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_n, m)?)?;
    m.add_function(wrap_pyfunction!(c_m, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_poly, m)?)?;
    m.add_function(wrap_pyfunction!(inner_product_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(en_integral, m)?)?;
    m.add_function(wrap_pyfunction!(en_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(f1_extract, m)?)?;
    m.add_function(wrap_pyfunction!(v_n, m)?)?;
    m.add_function(wrap_pyfunction!(positive_type_expand, m)?)?;
    m.add_function(wrap_pyfunction!(check_positive_type_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_sdp1, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search_rank2, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
