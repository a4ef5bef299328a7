use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use robinflow_core::disc::{self, ModeProblem, SpectrumWindow};
use robinflow_core::flowengine::{self, CMatrix};
use robinflow_core::kernel::{self, KernelParams};
use robinflow_core::robinflow::{self as rf, FlowQuery, RobinPath};
use robinflow_core::{acceptance, boundary, Error};

create_exception!(robinflow, RobinflowError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Validation(_) => PyValueError::new_err(e.to_string()),
        _ => RobinflowError::new_err(e.to_string()),
    }
}

/// Robin data `n -> tau_n` on the boundary circle.
#[pyclass(name = "RobinSymbol", module = "robinflow", skip_from_py_object)]
#[derive(Clone)]
struct RobinSymbol(robinflow_core::RobinSymbol);

#[pymethods]
impl RobinSymbol {
    #[staticmethod]
    fn zero() -> Self {
        RobinSymbol(robinflow_core::RobinSymbol::Zero)
    }

    #[staticmethod]
    fn constant(c: f64) -> Self {
        RobinSymbol(robinflow_core::RobinSymbol::constant(c))
    }

    /// `a|n| + c`
    #[staticmethod]
    fn affine(a: f64, c: f64) -> Self {
        RobinSymbol(robinflow_core::RobinSymbol::Affine { a, c })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        robinflow_core::RobinSymbol::from_json(s).map(RobinSymbol).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn value(&self, n: i64) -> f64 {
        self.0.value(n)
    }

    fn order(&self) -> f64 {
        self.0.order()
    }

    fn __repr__(&self) -> String {
        format!("RobinSymbol({})", self.0.to_json())
    }
}

#[pyclass(name = "CrossingEvent", module = "robinflow", get_all, skip_from_py_object)]
#[derive(Clone)]
struct CrossingEvent {
    n: i64,
    t_star: f64,
    sign: i32,
    branch: usize,
}

#[pymethods]
impl CrossingEvent {
    fn __repr__(&self) -> String {
        format!("CrossingEvent(n={}, t_star={}, sign={})", self.n, self.t_star, self.sign)
    }
}

#[pyclass(name = "RobinFlow", module = "robinflow", get_all)]
struct RobinFlow {
    sf: i64,
    crossings: Vec<CrossingEvent>,
    n_max: u64,
}

#[pymethods]
impl RobinFlow {
    fn __repr__(&self) -> String {
        format!("RobinFlow(sf={}, crossings={}, n_max={})", self.sf, self.crossings.len(), self.n_max)
    }
}

impl From<rf::RobinFlow> for RobinFlow {
    fn from(f: rf::RobinFlow) -> Self {
        let crossings = f
            .crossings
            .into_iter()
            .map(|c| CrossingEvent { n: c.n, t_star: c.t_star, sign: c.sign, branch: c.branch })
            .collect();
        RobinFlow { sf: f.sf, crossings, n_max: f.n_max }
    }
}

#[pyfunction]
fn landau_level(b: f64, q: usize) -> f64 {
    disc::landau_level(b, q)
}

/// Eigenvalues of the angular mode `n` with Robin constant `tau` in `[lo, hi]`.
#[pyfunction]
fn mode_eigenvalues(n: i64, b: f64, tau: f64, lo: f64, hi: f64) -> PyResult<Vec<f64>> {
    let run = || disc::mode_eigenvalues(&ModeProblem::new(n, b, tau)?, &SpectrumWindow::new(lo, hi)?);
    run().map_err(to_py)
}

#[pyfunction]
fn feynman_hellmann(n: i64, b: f64, tau: f64, lam: f64) -> PyResult<f64> {
    ModeProblem::new(n, b, tau).and_then(|mp| disc::feynman_hellmann(&mp, lam)).map_err(to_py)
}

#[pyfunction]
fn landau_multiplicity(q: usize, b: f64, tau: PyRef<'_, RobinSymbol>, nmin: i64, nmax: i64) -> PyResult<Vec<i64>> {
    disc::landau_multiplicity(q, b, &tau.0, nmin, nmax).map(|m| m.modes).map_err(to_py)
}

/// Spectral flow through `mu` along `tau + speed * t`, `t` in `[t_start, t_start + gamma]`.
#[pyfunction]
#[pyo3(signature = (b, tau, mu, gamma, t_start = 0.0, speed = 1.0, n_max = None))]
fn flow_shift(b: f64, tau: PyRef<'_, RobinSymbol>, mu: f64, gamma: f64, t_start: f64, speed: f64, n_max: Option<u64>) -> PyResult<RobinFlow> {
    let path = if speed == 1.0 { RobinPath::Shift } else { RobinPath::Scaled { speed: robinflow_core::RobinSymbol::constant(speed) } };
    let q = FlowQuery { b, tau: tau.0.clone(), mu, path, t_start, gamma, n_max };
    rf::flow_shift(&q).map(RobinFlow::from).map_err(to_py)
}

/// `(slope, intercept, flows)` of the linear fit of flow against path length.
#[pyfunction]
#[pyo3(signature = (b, tau, mu, gammas, speed = 1.0))]
fn weyl_fit(b: f64, tau: PyRef<'_, RobinSymbol>, mu: f64, gammas: Vec<f64>, speed: f64) -> PyResult<(f64, f64, Vec<i64>)> {
    let fit = rf::weyl_fit(b, &tau.0, mu, speed, &gammas).map_err(to_py)?;
    Ok((fit.slope, fit.intercept, fit.flows))
}

#[pyfunction]
#[pyo3(signature = (b, mu, x, y, d = 1))]
fn fundamental_solution(b: f64, mu: Complex64, x: Vec<f64>, y: Vec<f64>, d: usize) -> PyResult<Complex64> {
    KernelParams::new(b, d, mu).and_then(|p| kernel::eval_e(&p, &x, &y)).map_err(to_py)
}

/// `[(n, a_n, b_n)]` for the single and double layer operators at `mu`.
#[pyfunction]
fn boundary_modes(mu: f64, b: f64, nmin: i64, nmax: i64) -> PyResult<Vec<(i64, Complex64, Complex64)>> {
    let m = boundary::boundary_modes_kernel(mu, b, nmin, nmax).map_err(to_py)?;
    Ok((nmin..=nmax).map(|n| (n, m.a_n[&n], m.b_n[&n])).collect())
}

#[pyfunction]
fn det_reg(p: usize, rows: Vec<Vec<Complex64>>) -> PyResult<Complex64> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let a = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    flowengine::det_reg(p, &a).map_err(to_py)
}

/// Runs the acceptance checks; returns `(id, name, passed, measured)` rows.
#[pyfunction]
fn selftest(py: Python<'_>) -> Vec<(u8, String, bool, String)> {
    py.detach(acceptance::run_all).into_iter().map(|r| (r.id, r.name.to_string(), r.passed, r.measured)).collect()
}

#[pymodule]
pub fn robinflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RobinflowError", m.py().get_type::<RobinflowError>())?;
    m.add_class::<RobinSymbol>()?;
    m.add_class::<CrossingEvent>()?;
    m.add_class::<RobinFlow>()?;
    m.add_function(wrap_pyfunction!(landau_level, m)?)?;
    m.add_function(wrap_pyfunction!(mode_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(feynman_hellmann, m)?)?;
    m.add_function(wrap_pyfunction!(landau_multiplicity, m)?)?;
    m.add_function(wrap_pyfunction!(flow_shift, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_fit, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_solution, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_modes, m)?)?;
    m.add_function(wrap_pyfunction!(det_reg, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
