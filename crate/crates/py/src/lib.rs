//! Python module `gkp_magic`.

use gkp::gaussian::{GaussianState, LatticeKind};
use gkp::gkp::{BlochEngine, Outcome};
use gkp::magic::{self, FidelityEvaluator, MagicFamily, SuccessOptions};
use gkp::oracle::{Oracle, OracleConfig};
use gkp::verify;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(gkp_magic, GkpError, PyRuntimeError, "Numerical failure inside gkp_magic.");

fn to_py(e: gkp::Error) -> PyErr {
    match e {
        gkp::Error::OutOfRange { .. }
        | gkp::Error::State(_)
        | gkp::Error::InvalidPauli(_)
        | gkp::Error::InvalidTolerance(_)
        | gkp::Error::NotABlochVector(_) => PyValueError::new_err(e.to_string()),
        other => GkpError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// Single-mode Gaussian state: mean `(q, p)` and covariance in units where vacuum is `I/2`.
#[pyclass(name = "GaussianState", module = "gkp_magic", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyGaussianState(GaussianState);

#[pymethods]
impl PyGaussianState {
    #[new]
    #[pyo3(signature = (mean, cov))]
    fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> PyResult<Self> {
        GaussianState::new(mean, cov)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn vacuum() -> Self {
        Self(GaussianState::vacuum())
    }

    #[staticmethod]
    fn thermal(nbar: f64) -> PyResult<Self> {
        GaussianState::thermal(nbar)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn mean(&self) -> [f64; 2] {
        let m = self.0.mean();
        [m[0], m[1]]
    }

    #[getter]
    fn cov(&self) -> [[f64; 2]; 2] {
        let c = self.0.cov();
        [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]]
    }

    fn det(&self) -> f64 {
        self.0.det()
    }

    fn with_mean(&self, mean: [f64; 2]) -> PyResult<Self> {
        self.0
            .with_mean(mean)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        let (m, c) = (self.mean(), self.cov());
        format!("GaussianState(mean={m:?}, cov={c:?})")
    }
}

/// Logical Bloch components `(r0, rx, ry, rz)`.
#[pyclass(name = "Bloch4", module = "gkp_magic", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyBloch4(gkp::Bloch4);

#[pymethods]
impl PyBloch4 {
    #[getter]
    fn r0(&self) -> f64 {
        self.0.r0
    }

    #[getter]
    fn r(&self) -> [f64; 3] {
        self.0.r
    }

    fn components(&self) -> [f64; 4] {
        self.0.components()
    }

    fn norm(&self) -> f64 {
        self.0.norm3()
    }

    fn __repr__(&self) -> String {
        let c = self.0.components();
        format!("Bloch4(r0={}, r=[{}, {}, {}])", c[0], c[1], c[2], c[3])
    }
}

fn engine(state: &PyGaussianState, lattice: &str) -> PyResult<BlochEngine> {
    let lattice: LatticeKind = parse(lattice)?;
    let input = lattice
        .to_square_input(&state.0)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    BlochEngine::new(&input).map_err(to_py)
}

/// Normalised logical Bloch vector after correcting outcome `(tq, tp)`.
#[pyfunction]
#[pyo3(signature = (state, tq, tp, lattice = "square"))]
fn bloch_normalized(state: &PyGaussianState, tq: f64, tp: f64, lattice: &str) -> PyResult<PyBloch4> {
    engine(state, lattice)?
        .normalized(Outcome::new(tq, tp))
        .map(PyBloch4)
        .map_err(to_py)
}

/// Probability density of outcome `(tq, tp)` on the unit cell.
#[pyfunction]
#[pyo3(signature = (state, tq, tp, lattice = "square"))]
fn pdf(state: &PyGaussianState, tq: f64, tp: f64, lattice: &str) -> PyResult<f64> {
    engine(state, lattice)?.pdf(Outcome::new(tq, tp)).map_err(to_py)
}

/// Unnormalised component `mu` by the theta-function route.
#[pyfunction]
#[pyo3(signature = (state, tq, tp, mu, tol = 1e-12))]
fn bloch_theta(state: &PyGaussianState, tq: f64, tp: f64, mu: usize, tol: f64) -> PyResult<f64> {
    gkp::bloch_theta(&state.0, Outcome::new(tq, tp), mu, tol).map_err(to_py)
}

/// Unnormalised component `mu` by the direct lattice sum.
#[pyfunction]
#[pyo3(signature = (state, tq, tp, mu, tol = 1e-12))]
fn bloch_lattice_sum(state: &PyGaussianState, tq: f64, tp: f64, mu: usize, tol: f64) -> PyResult<f64> {
    gkp::bloch_lattice_sum(&state.0, Outcome::new(tq, tp), mu, tol).map_err(to_py)
}

/// Outcome `(tq, tp)` equivalent to a heterodyne result `alpha`.
#[pyfunction]
fn heterodyne_to_outcome(alpha: Complex64) -> (f64, f64) {
    let t = gkp::heterodyne_to_outcome(alpha);
    (t.tq, t.tp)
}

/// `(fidelity, index)` of the closest state in the `"H"` or `"T"` family.
#[pyfunction]
fn fidelity_to_nearest(r: [f64; 3], family: &str) -> PyResult<(f64, usize)> {
    let n = magic::fidelity_to_nearest(r, parse(family)?).map_err(to_py)?;
    Ok((n.fidelity, n.index))
}

/// Fidelity map over a `resolution x resolution` cell-centred grid.
#[pyclass(name = "FidelityMap", module = "gkp_magic", frozen)]
struct PyFidelityMap(magic::FidelityMap);

#[pymethods]
impl PyFidelityMap {
    #[getter]
    fn resolution(&self) -> usize {
        self.0.resolution
    }

    /// Outcomes, `t_q` index outermost.
    #[getter]
    fn outcomes(&self) -> Vec<(f64, f64)> {
        self.0.points.iter().map(|p| (p.t.tq, p.t.tp)).collect()
    }

    /// Fidelities, `nan` where the outcome density vanishes.
    #[getter]
    fn fidelity(&self) -> Vec<f64> {
        self.0.points.iter().map(|p| p.fidelity.unwrap_or(f64::NAN)).collect()
    }

    #[getter]
    fn pdf(&self) -> Vec<f64> {
        self.0.points.iter().map(|p| p.pdf).collect()
    }

    #[getter]
    fn nearest_index(&self) -> Vec<i64> {
        self.0.points.iter().map(|p| p.nearest.map_or(-1, |i| i as i64)).collect()
    }

    /// `(min_f, max_f, fraction_above)` against `threshold` (default: the family's).
    #[pyo3(signature = (threshold = None))]
    fn summary(&self, threshold: Option<f64>) -> (f64, f64, f64) {
        let s = threshold.map_or_else(|| self.0.summary(), |t| self.0.summary_at(t));
        (s.min_f, s.max_f, s.fraction_above)
    }
}

#[pyfunction]
#[pyo3(signature = (state, family = "H", lattice = "square", resolution = 64))]
fn fidelity_map(py: Python<'_>, state: &PyGaussianState, family: &str, lattice: &str, resolution: usize) -> PyResult<PyFidelityMap> {
    let evaluator = FidelityEvaluator::new(&state.0, parse(family)?, parse(lattice)?).map_err(to_py)?;
    py.detach(|| evaluator.map(resolution)).map(PyFidelityMap).map_err(to_py)
}

/// `P(F >= f)` for a thermal input, one value per entry of `f_grid`.
#[pyfunction]
#[pyo3(signature = (nbar, f_grid, family = "H", lattice = "square", quadrature_tol = 1e-4))]
fn success_curve(py: Python<'_>, nbar: f64, f_grid: Vec<f64>, family: &str, lattice: &str, quadrature_tol: f64) -> PyResult<Vec<f64>> {
    let (family, lattice): (MagicFamily, LatticeKind) = (parse(family)?, parse(lattice)?);
    let opts = SuccessOptions {
        boundary_tol: quadrature_tol,
        ..SuccessOptions::default()
    };
    py.detach(|| magic::success_curve(nbar, family, lattice, &f_grid, opts))
        .map(|c| c.probability)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (nbar, f, family = "H", lattice = "square"))]
fn success_probability(py: Python<'_>, nbar: f64, f: f64, family: &str, lattice: &str) -> PyResult<f64> {
    let (family, lattice): (MagicFamily, LatticeKind) = (parse(family)?, parse(lattice)?);
    py.detach(|| magic::success_probability(nbar, family, lattice, f)).map_err(to_py)
}

/// `(nbar_star, (lo, hi))`: thermal occupation where the best fidelity falls to `f`.
#[pyfunction]
#[pyo3(signature = (family = "H", lattice = "square", f = None))]
fn threshold_nbar(py: Python<'_>, family: &str, lattice: &str, f: Option<f64>) -> PyResult<(f64, (f64, f64))> {
    let (family, lattice): (MagicFamily, LatticeKind) = (parse(family)?, parse(lattice)?);
    let f = f.unwrap_or(family.distill_threshold());
    let th = py.detach(|| magic::threshold_nbar(family, lattice, f)).map_err(to_py)?;
    Ok((th.nbar_star, (th.bracket[0], th.bracket[1])))
}

/// Unnormalised Bloch components from the truncated number-basis oracle.
#[pyfunction]
#[pyo3(signature = (state, tq, tp, beta = 0.02, cutoff = 300, comb_halfwidth = 8))]
fn oracle_bloch(
    py: Python<'_>,
    state: &PyGaussianState,
    tq: f64,
    tp: f64,
    beta: f64,
    cutoff: usize,
    comb_halfwidth: usize,
) -> PyResult<PyBloch4> {
    let config = OracleConfig::new(beta, cutoff, comb_halfwidth).map_err(to_py)?;
    let s = state.0;
    py.detach(|| Oracle::new(&config)?.bloch(&s, Outcome::new(tq, tp)))
        .map(PyBloch4)
        .map_err(to_py)
}

/// `(max_abs_err, n_cases)` of the seeded theta-versus-lattice comparison.
#[pyfunction]
#[pyo3(signature = (seed = 0, n_pairs = 25))]
fn verify_dual_route(py: Python<'_>, seed: u64, n_pairs: usize) -> PyResult<(f64, usize)> {
    let r = py
        .detach(|| verify::dual_route_report(seed, n_pairs, verify::DUAL_ROUTE_TOL))
        .map_err(to_py)?;
    Ok((r.max_abs_err, r.n_cases))
}

#[pymodule]
fn gkp_magic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GkpError", m.py().get_type::<GkpError>())?;
    m.add("SQRT_PI", gkp::gkp::SQRT_PI)?;
    m.add("H_DISTILL_THRESHOLD", magic::H_DISTILL_THRESHOLD)?;
    m.add("T_TIGHT_THRESHOLD", magic::T_TIGHT_THRESHOLD)?;
    m.add("T_OCTAHEDRON_BOUND", magic::T_OCTAHEDRON_BOUND)?;
    m.add_class::<PyGaussianState>()?;
    m.add_class::<PyBloch4>()?;
    m.add_class::<PyFidelityMap>()?;
    m.add_function(wrap_pyfunction!(bloch_normalized, m)?)?;
    m.add_function(wrap_pyfunction!(pdf, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_theta, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_lattice_sum, m)?)?;
    m.add_function(wrap_pyfunction!(heterodyne_to_outcome, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_to_nearest, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_map, m)?)?;
    m.add_function(wrap_pyfunction!(success_curve, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_nbar, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_bloch, m)?)?;
    m.add_function(wrap_pyfunction!(verify_dual_route, m)?)?;
    Ok(())
}
