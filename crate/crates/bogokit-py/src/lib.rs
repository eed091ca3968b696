//! Python bindings for bogokit.
//!
//! Matrices cross the boundary as nested lists of Python `complex` numbers
//! (row-major). Structured results are returned as plain dictionaries with
//! the same layout as the command-line tool's JSON output.

use bogokit::algebra::{self, Statistics};
use bogokit::diagonalize::{self, heisenberg_identity_check, normal_ordering_constant_finite};
use bogokit::error::Error;
use bogokit::fock::{self, ModeTarget};
use bogokit::implementability::{classify_implementability, ModeFamily};
use bogokit::io::{
    parse_json, to_json, DiagonalizationJson, MapJson, ModeDecompositionJson, SequenceSpec,
    ValidationJson,
};
use bogokit::linalg::CMatrix;
use bogokit::mode_decomp::{decompose, FermionicParams};
use bogokit::models::{self, WickModelParams};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(bogokit, BogokitError, PyValueError, "Domain error raised by bogokit.");

fn to_py_err(err: Error) -> PyErr {
    BogokitError::new_err((err.reason().to_string(), err.to_string()))
}

fn statistics(name: &str) -> PyResult<Statistics> {
    bogokit::cli::parse_statistics(name).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn nested(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Serializes a value and hands it to Python's `json.loads`.
fn to_python<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (to_json(value),))?.unbind())
}

/// Converts a Python object to JSON text with `json.dumps`.
fn from_python(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    let json = obj.py().import("json")?;
    json.call_method1("dumps", (obj,))?.extract()
}

/// A Bogoliubov transformation `V = [[u, v], [v̄, ū]]`.
#[pyclass(name = "BogoliubovMap", module = "bogokit", skip_from_py_object)]
#[derive(Clone)]
struct PyMap {
    inner: algebra::BogoliubovMap,
}

#[pymethods]
impl PyMap {
    #[new]
    #[pyo3(signature = (u, v, statistics = "bosonic"))]
    fn new(u: Vec<Vec<Complex64>>, v: Vec<Vec<Complex64>>, statistics: &str) -> PyResult<Self> {
        let inner = algebra::BogoliubovMap::new(matrix(u)?, matrix(v)?, self::statistics(statistics)?)
            .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, statistics = "bosonic"))]
    fn identity(n: usize, statistics: &str) -> PyResult<Self> {
        Ok(Self { inner: algebra::BogoliubovMap::identity(n, self::statistics(statistics)?) })
    }

    /// Diagonal bosonic squeeze with parameters `xi`.
    #[staticmethod]
    fn squeeze(xi: Vec<f64>) -> Self {
        Self { inner: algebra::BogoliubovMap::squeeze(&xi) }
    }

    /// Bosonic two-mode squeeze of modes `i` and `j`.
    #[staticmethod]
    fn pair_squeeze(n: usize, i: usize, j: usize, xi: f64) -> Self {
        Self { inner: algebra::BogoliubovMap::pair_squeeze(n, i, j, xi) }
    }

    /// Fermionic pairing rotation of modes `i` and `j`.
    #[staticmethod]
    fn pairing_rotation(n: usize, i: usize, j: usize, xi: f64) -> Self {
        Self { inner: algebra::BogoliubovMap::pairing_rotation(n, i, j, xi) }
    }

    /// Passive rotation of modes `i` and `j`.
    #[staticmethod]
    #[pyo3(signature = (n, i, j, theta, phi, statistics = "bosonic"))]
    fn givens(n: usize, i: usize, j: usize, theta: f64, phi: f64, statistics: &str) -> PyResult<Self> {
        let stats = self::statistics(statistics)?;
        Ok(Self { inner: algebra::BogoliubovMap::givens(n, i, j, theta, phi, stats) })
    }

    /// Passive phase on mode `i`.
    #[staticmethod]
    #[pyo3(signature = (n, i, phi, statistics = "bosonic"))]
    fn phase(n: usize, i: usize, phi: f64, statistics: &str) -> PyResult<Self> {
        let stats = self::statistics(statistics)?;
        Ok(Self { inner: algebra::BogoliubovMap::phase(n, i, phi, stats) })
    }

    /// Parses the JSON map format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let map = parse_json::<MapJson>(text).and_then(|m| m.to_map()).map_err(to_py_err)?;
        Ok(Self { inner: map })
    }

    fn to_json(&self) -> String {
        to_json(&MapJson::from_map(&self.inner))
    }

    #[getter]
    fn u(&self) -> Vec<Vec<Complex64>> {
        nested(&self.inner.u)
    }

    #[getter]
    fn v(&self) -> Vec<Vec<Complex64>> {
        nested(&self.inner.v)
    }

    #[getter]
    fn statistics(&self) -> &'static str {
        self.inner.statistics.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// The full `2n × 2n` block matrix.
    fn block_matrix(&self) -> Vec<Vec<Complex64>> {
        nested(&self.inner.block_matrix())
    }

    /// Residuals of the Bogoliubov relations.
    #[pyo3(signature = (tol = 1e-10))]
    fn validate(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        let report = algebra::validate_bogoliubov(&self.inner, tol).map_err(to_py_err)?;
        let out = ValidationJson {
            statistics: self.inner.statistics,
            dimension: self.inner.dim(),
            report,
        };
        to_python(py, &out)
    }

    /// `self ∘ other`.
    fn compose(&self, other: &PyMap) -> PyResult<Self> {
        let inner = algebra::compose(&self.inner, &other.inner).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn adjoint(&self) -> PyResult<Self> {
        Ok(Self { inner: algebra::adjoint(&self.inner).map_err(to_py_err)? })
    }

    /// Normal-mode decomposition.
    #[pyo3(signature = (tol = 1e-10))]
    fn decompose(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        let dec = decompose(&self.inner, tol).map_err(to_py_err)?;
        to_python(py, &ModeDecompositionJson::from_decomposition(&dec))
    }

    /// Implementability verdict of the decomposed map.
    #[pyo3(signature = (tol = 1e-10))]
    fn classify(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        let dec = decompose(&self.inner, tol).map_err(to_py_err)?;
        to_python(py, &classify_implementability(&ModeFamily::from_decomposition(&dec)))
    }

    fn __matmul__(&self, other: &PyMap) -> PyResult<Self> {
        self.compose(other)
    }

    fn __repr__(&self) -> String {
        format!("BogoliubovMap(dim={}, statistics='{}')", self.inner.dim(), self.inner.statistics.name())
    }
}

/// A quadratic Hamiltonian `H = ½ Σ (2 h_jl a†_j a_l ± k_jl a†_j a†_l + k̄_jl a_j a_l)`
/// (upper sign bosonic, lower sign fermionic).
#[pyclass(name = "QuadraticHamiltonian", module = "bogokit", skip_from_py_object)]
#[derive(Clone)]
struct PyHamiltonian {
    inner: diagonalize::QuadraticHamiltonian,
}

#[pymethods]
impl PyHamiltonian {
    #[new]
    #[pyo3(signature = (h, k, statistics = "bosonic", tol = 1e-12))]
    fn new(h: Vec<Vec<Complex64>>, k: Vec<Vec<Complex64>>, statistics: &str, tol: f64) -> PyResult<Self> {
        let inner = diagonalize::QuadraticHamiltonian::new(matrix(h)?, matrix(k)?, self::statistics(statistics)?, tol)
            .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn h(&self) -> Vec<Vec<Complex64>> {
        nested(&self.inner.h)
    }

    #[getter]
    fn k(&self) -> Vec<Vec<Complex64>> {
        nested(&self.inner.k)
    }

    #[getter]
    fn statistics(&self) -> &'static str {
        self.inner.statistics.name()
    }

    /// Energies, diagonalizing map and normal-ordering constant.
    #[pyo3(signature = (tol = 1e-10))]
    fn diagonalize(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        let res = diagonalize::diagonalize(&self.inner, tol).map_err(to_py_err)?;
        let noc = normal_ordering_constant_finite(&self.inner.h, &res.energies).map_err(to_py_err)?;
        let constant = noc.classification.value().map_or(f64::NAN, |v| v.re);
        to_python(py, &DiagonalizationJson::new(&res, constant))
    }

    /// Diagonalizing map alone.
    #[pyo3(signature = (tol = 1e-10))]
    fn diagonalizing_map(&self, tol: f64) -> PyResult<PyMap> {
        let res = diagonalize::diagonalize(&self.inner, tol).map_err(to_py_err)?;
        Ok(PyMap { inner: res.map })
    }

    /// Max residual of the Heisenberg identity on truncated Fock space.
    #[pyo3(signature = (basis_index, cutoff = 20, sector_bound = 8))]
    fn heisenberg_check(&self, basis_index: usize, cutoff: usize, sector_bound: usize) -> PyResult<f64> {
        heisenberg_identity_check(&self.inner, basis_index, cutoff, sector_bound).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("QuadraticHamiltonian(dim={}, statistics='{}')", self.inner.dim(), self.inner.statistics.name())
    }
}

fn mode_target(xi: Option<f64>, alpha: Option<f64>, beta: Option<f64>) -> PyResult<ModeTarget> {
    match (xi, alpha, beta) {
        (Some(xi), None, None) => Ok(ModeTarget::Bosonic { xi }),
        (None, Some(alpha), Some(beta)) => {
            Ok(ModeTarget::Fermionic(FermionicParams::CooperPair { alpha, beta }))
        }
        _ => Err(PyValueError::new_err("give either xi (bosonic) or alpha and beta (Cooper pair)")),
    }
}

/// Checks `U a U* = V(a)` for a single-mode implementer in truncated Fock space.
#[pyfunction]
#[pyo3(signature = (*, xi = None, alpha = None, beta = None, cutoff = 60, sectors = 10, tol = 1e-10))]
fn verify_conjugation(
    py: Python<'_>,
    xi: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    cutoff: usize,
    sectors: usize,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let target = mode_target(xi, alpha, beta)?;
    let report = fock::verify_conjugation(target, cutoff, sectors, tol).map_err(to_py_err)?;
    to_python(py, &report)
}

/// Truncated implementer of a single-mode squeeze.
#[pyfunction]
#[pyo3(signature = (xi, cutoff = 60))]
fn bosonic_implementer(xi: f64, cutoff: usize) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(nested(&fock::build_implementer_bosonic(xi, cutoff).map_err(to_py_err)?))
}

/// Implementer of a Cooper-pair transformation on the 4-dimensional Fock space.
#[pyfunction]
fn cooper_implementer(alpha: f64, beta: f64) -> PyResult<Vec<Vec<Complex64>>> {
    let u = fock::build_implementer_fermionic(FermionicParams::CooperPair { alpha, beta })
        .map_err(to_py_err)?;
    Ok(nested(&u))
}

/// Weighted norm `Σ (1 + 2m)^n |c_m|²` of the squeezed vacuum with parameter `t`.
#[pyfunction]
#[pyo3(signature = (t, n = 0, max_terms = 100_000))]
fn rapid_decay_norm(py: Python<'_>, t: f64, n: u32, max_terms: usize) -> PyResult<Py<PyAny>> {
    to_python(py, &fock::rapid_decay_norm(t, n, max_terms).map_err(to_py_err)?)
}

/// Moment `⟨N^power⟩` of the squeezed vacuum with parameter `t`.
#[pyfunction]
#[pyo3(signature = (t, power = 1, max_terms = 100_000))]
fn particle_number_moment(py: Python<'_>, t: f64, power: u32, max_terms: usize) -> PyResult<Py<PyAny>> {
    to_python(py, &fock::particle_number_moment(t, power, max_terms).map_err(to_py_err)?)
}

/// Classifies a formal sum given in the JSON sequence format.
#[pyfunction]
fn classify_sequence(py: Python<'_>, spec: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let spec: SequenceSpec = parse_json(&from_python(spec)?).map_err(to_py_err)?;
    let seq = spec.build().map_err(to_py_err)?;
    to_python(py, &seq.classify())
}

/// Quasiparticle data of one BCS momentum pair.
#[pyfunction]
fn bcs_pair(py: Python<'_>, eps: f64, delta: Complex64) -> PyResult<Py<PyAny>> {
    let mode = models::bcs_pair(eps, delta).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("eps", mode.eps)?;
    out.set_item("delta", mode.delta)?;
    out.set_item("E", mode.e)?;
    out.set_item("u", mode.u)?;
    out.set_item("v", mode.v)?;
    out.set_item("V", nested(&mode.v_block))?;
    Ok(out.into_any().unbind())
}

/// Diagonalization data of one Wick-model momentum.
#[pyfunction]
fn wick_mode(py: Python<'_>, m: f64, kappa: f64, p: [i64; 3]) -> PyResult<Py<PyAny>> {
    let params = WickModelParams::new(m, kappa).map_err(to_py_err)?;
    to_python(py, &models::wick_mode(&params, &p).map_err(to_py_err)?)
}

/// Pair-creation sums `Σ_{|p| ≤ R} v_p²` for each radius.
#[pyfunction]
fn wick_divergence_probe(m: f64, kappa: f64, radii: Vec<u32>) -> PyResult<Vec<(u32, f64)>> {
    let params = WickModelParams::new(m, kappa).map_err(to_py_err)?;
    models::wick_divergence_probe(&params, &radii).map_err(to_py_err)
}

/// Propagator blocks of the external-field model with constant coefficients.
#[pyfunction]
fn qed_constant_blocks(py: Python<'_>, eps_plus: f64, eps_minus: f64, f: f64, tau: f64) -> PyResult<Py<PyAny>> {
    to_python(py, &models::qed_constant_blocks(eps_plus, eps_minus, f, tau))
}

#[pymodule]
#[pyo3(name = "bogokit")]
fn bogokit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BogokitError", m.py().get_type::<BogokitError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_function(wrap_pyfunction!(verify_conjugation, m)?)?;
    m.add_function(wrap_pyfunction!(bosonic_implementer, m)?)?;
    m.add_function(wrap_pyfunction!(cooper_implementer, m)?)?;
    m.add_function(wrap_pyfunction!(rapid_decay_norm, m)?)?;
    m.add_function(wrap_pyfunction!(particle_number_moment, m)?)?;
    m.add_function(wrap_pyfunction!(classify_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(bcs_pair, m)?)?;
    m.add_function(wrap_pyfunction!(wick_mode, m)?)?;
    m.add_function(wrap_pyfunction!(wick_divergence_probe, m)?)?;
    m.add_function(wrap_pyfunction!(qed_constant_blocks, m)?)?;
    Ok(())
}
