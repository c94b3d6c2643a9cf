use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use infoqm_core::analysis::{self, AnalysisError, BasisSet, ProjectionTarget};
use infoqm_core::maxent::{self, ExpFamilyDensity1D, MaxEntError, MomentSpec1D};
use infoqm_core::nls::{self, FlowConfig, GridProblem, NlsError, ProbeMode};
use infoqm_core::numerics::Grid1D;
use infoqm_core::oscillator::{self, OscillatorError};
use infoqm_core::series::{self, SeriesError, TwoVarKind};

create_exception!(infoqm, ConvergenceError, PyRuntimeError);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn maxent_err(e: MaxEntError) -> PyErr {
    match e {
        MaxEntError::Convergence { .. } | MaxEntError::TailMass(_) => ConvergenceError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

fn oscillator_err(e: OscillatorError) -> PyErr {
    match e {
        OscillatorError::QuantumNumber(_) | OscillatorError::Beta(_) => value_err(e),
        _ => ConvergenceError::new_err(e.to_string()),
    }
}

fn nls_err(e: NlsError) -> PyErr {
    if e.is_convergence() {
        ConvergenceError::new_err(e.to_string())
    } else {
        value_err(e)
    }
}

fn analysis_err(e: AnalysisError) -> PyErr {
    match e {
        AnalysisError::IllConditioned { .. } => ConvergenceError::new_err(e.to_string()),
        AnalysisError::Oscillator(e) => oscillator_err(e),
        _ => value_err(e),
    }
}

fn series_err(e: SeriesError) -> PyErr {
    value_err(e)
}

/// Closed-form Hermite–Gaussian state of the `x²/2` problem.
#[pyclass(name = "OscillatorState", frozen)]
struct PyOscillatorState {
    inner: oscillator::OscillatorState,
}

#[pymethods]
impl PyOscillatorState {
    #[new]
    fn new(n: u32) -> PyResult<Self> {
        Ok(Self { inner: oscillator::solve_state(n).map_err(oscillator_err)? })
    }

    /// Linear (β = ½) eigenstate.
    #[staticmethod]
    fn linear(n: u32) -> PyResult<Self> {
        Ok(Self { inner: oscillator::OscillatorState::linear(n).map_err(oscillator_err)? })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }
    #[getter]
    fn k(&self) -> u32 {
        self.inner.k
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }
    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    fn psi(&self, x: f64) -> f64 {
        self.inner.psi(x)
    }

    fn eigen_residual(&self, x: f64) -> f64 {
        self.inner.eigen_residual(x)
    }

    /// Closed-form `⟨ln ρ⟩` of `|ψ|²`.
    fn information(&self) -> f64 {
        oscillator::state_information(&self.inner)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "OscillatorState(n={}, alpha={:.6}, beta={:.6}, lambda={:.6}, energy={:.6})",
            s.n, s.alpha, s.beta, s.lambda, s.energy
        )
    }
}

/// Rows `n, k, alpha, beta, lambda, energy` as dicts.
#[pyfunction]
fn table<'py>(py: Python<'py>, n_max: u32) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = py.detach(|| oscillator::table(n_max)).map_err(oscillator_err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("k", r.k)?;
            d.set_item("alpha", r.alpha)?;
            d.set_item("beta", r.beta)?;
            d.set_item("lambda", r.lambda)?;
            d.set_item("energy", r.energy)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn lambda_from_beta(beta: f64) -> f64 {
    oscillator::lambda_from_beta(beta)
}

/// Maximum-entropy density on an interval.
#[pyclass(name = "Density1D", frozen)]
struct PyDensity1D {
    inner: ExpFamilyDensity1D,
}

#[pymethods]
impl PyDensity1D {
    /// `[(order, a)]` including `a₀`.
    #[getter]
    fn multipliers(&self) -> Vec<(u32, f64)> {
        std::iter::once((0, self.inner.a0()))
            .chain(self.inner.multipliers().iter().map(|m| (m.order, m.value)))
            .collect()
    }

    fn multiplier(&self, order: u32) -> f64 {
        self.inner.multiplier(order)
    }

    fn eval(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(maxent_err)
    }

    fn moment(&self, order: u32) -> f64 {
        self.inner.moment(order)
    }

    fn information(&self) -> PyResult<f64> {
        self.inner.information().map_err(maxent_err)
    }

    fn modified_information(&self) -> PyResult<f64> {
        self.inner.modified_information().map_err(maxent_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(value_err)? })
    }
}

/// Fits a density to a JSON moment spec.
#[pyfunction]
#[pyo3(signature = (spec_json, tol = 1e-10, init = None))]
fn fit_maxent(py: Python<'_>, spec_json: &str, tol: f64, init: Option<&PyDensity1D>) -> PyResult<PyDensity1D> {
    let spec = MomentSpec1D::from_json(spec_json).map_err(maxent_err)?;
    let start = init.map(|d| d.inner.multipliers().to_vec());
    let inner = py
        .detach(|| maxent::fit_multipliers_1d(&spec, start.as_deref(), tol))
        .map_err(maxent_err)?;
    Ok(PyDensity1D { inner })
}

fn harmonic_problem(domain: (f64, f64), grid: usize, b: f64, eps_log: f64) -> PyResult<GridProblem> {
    let g = Grid1D::new(domain.0, domain.1, grid).map_err(value_err)?;
    GridProblem::harmonic(g, b).and_then(|p| p.with_eps_log(eps_log)).map_err(nls_err)
}

/// Ground state of the `x²/2` problem, at fixed `b` or with `lambda_solve`.
#[pyfunction]
#[pyo3(signature = (
    domain = (-12.0, 12.0), grid = 2048, b = 0.0, lambda_solve = false, bracket = (-3.0, -0.5),
    tau = 0.01, tol = 1e-10, max_iters = 200_000, eps_log = 1e-100, init = None,
))]
#[allow(clippy::too_many_arguments)]
fn ground_state<'py>(
    py: Python<'py>,
    domain: (f64, f64),
    grid: usize,
    b: f64,
    lambda_solve: bool,
    bracket: (f64, f64),
    tau: f64,
    tol: f64,
    max_iters: usize,
    eps_log: f64,
    init: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = harmonic_problem(domain, grid, b, eps_log)?;
    let cfg = FlowConfig { tau, tol_flow: tol, max_iters, seed: 0 };
    let (lambda, sol) = py
        .detach(|| {
            if lambda_solve {
                nls::self_consistent_lambda(&problem, &cfg, bracket, init.as_deref())
                    .map(|s| (Some(s.lambda), s.solution))
            } else {
                nls::gradient_flow_ground_state(&problem, &cfg, init.as_deref()).map(|s| (None, s))
            }
        })
        .map_err(nls_err)?;
    let d = PyDict::new(py);
    d.set_item("lambda", lambda)?;
    d.set_item("mu", sol.mu)?;
    d.set_item("b", sol.b)?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("flow_norm", sol.flow_norm)?;
    d.set_item("x", problem.grid().points())?;
    d.set_item("psi", sol.psi)?;
    Ok(d)
}

/// Self-consistent solves from `n_inits` seeded random starts.
#[pyfunction]
#[pyo3(signature = (n_inits = 5, seed = 0, domain = (-12.0, 12.0), grid = 2048, bracket = Some((-3.0, -0.5)), b = 0.0))]
fn uniqueness_probe<'py>(
    py: Python<'py>,
    n_inits: usize,
    seed: u64,
    domain: (f64, f64),
    grid: usize,
    bracket: Option<(f64, f64)>,
    b: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = harmonic_problem(domain, grid, b, nls::DEFAULT_EPS_LOG)?;
    let cfg = FlowConfig { seed, ..FlowConfig::default() };
    let mode = match bracket {
        Some((lo, hi)) => ProbeMode::SelfConsistent { lo, hi },
        None => ProbeMode::FixedCoefficient,
    };
    let rep = py.detach(|| nls::uniqueness_probe(&problem, &cfg, mode, n_inits)).map_err(nls_err)?;
    let d = PyDict::new(py);
    d.set_item("values", rep.runs.iter().map(|r| r.value).collect::<Vec<_>>())?;
    d.set_item("errors", rep.runs.iter().map(|r| r.error.clone()).collect::<Vec<_>>())?;
    d.set_item("max_value_spread", rep.max_value_spread)?;
    d.set_item("max_state_distance", rep.max_state_distance)?;
    Ok(d)
}

/// Gram matrix of the logarithmic (`family="log"`) or linear family.
#[pyfunction]
#[pyo3(signature = (n_max, family = "log"))]
fn gram_matrix(py: Python<'_>, n_max: u32, family: &str) -> PyResult<Vec<Vec<f64>>> {
    let grid = analysis::default_grid();
    let basis = match family {
        "log" => BasisSet::oscillator_family(grid, n_max),
        "linear" => BasisSet::linear_family(grid, n_max),
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    }
    .map_err(analysis_err)?;
    Ok(py.detach(|| analysis::gram_matrix(&basis)).map_err(analysis_err)?.matrix)
}

/// `⟨ψ_lower, R ψ_upper⟩` for the logarithmic family.
#[pyfunction]
fn mu0_estimate(lower: u32, upper: u32) -> PyResult<f64> {
    let a = oscillator::solve_state(lower).map_err(oscillator_err)?;
    let b = oscillator::solve_state(upper).map_err(oscillator_err)?;
    analysis::mu0_estimate(&analysis::default_grid(), &a, &b).map_err(analysis_err)
}

/// Projection report for a JSON target description.
#[pyfunction]
fn project<'py>(py: Python<'py>, target_json: &str, orders: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
    let target = ProjectionTarget::from_json(target_json).map_err(analysis_err)?;
    let rep = py.detach(|| target.project(&orders)).map_err(analysis_err)?;
    let d = PyDict::new(py);
    d.set_item("label", rep.label)?;
    d.set_item("orders", rep.orders)?;
    d.set_item("coefficients", rep.coefficients)?;
    d.set_item("residuals", rep.residuals)?;
    d.set_item("condition_numbers", rep.condition_numbers)?;
    Ok(d)
}

/// `(partial_sum, convergent)` for `(1 + a x)^k` truncated at `n`.
#[pyfunction]
fn binomial_series(a: f64, k: f64, x: f64, n: usize) -> PyResult<(f64, bool)> {
    let v = series::binomial_series_eval(a, k, x, n).map_err(series_err)?;
    Ok((v.partial_sum, v.convergent))
}

/// `(partial_sum, convergent)` for `exp(xy)` or, with `k`, `(1 + xy)^k`.
#[pyfunction]
#[pyo3(signature = (x, y, n, k = None))]
fn two_var_series(x: f64, y: f64, n: usize, k: Option<f64>) -> PyResult<(f64, bool)> {
    let kind = match k {
        Some(k) => TwoVarKind::BinomialXy { k },
        None => TwoVarKind::ExpXy,
    };
    let v = series::two_var_series_eval(kind, x, y, n).map_err(series_err)?;
    Ok((v.partial_sum, v.convergent))
}

/// Taylor coefficients `{(i, j): a_ij}` of a Python callable `f(x, y)`.
#[pyfunction]
#[pyo3(signature = (f, order, h = 0.05))]
fn taylor2_coeffs(f: &Bound<'_, PyAny>, order: usize, h: f64) -> PyResult<Vec<((usize, usize), f64)>> {
    // keep the first Python error and report it ahead of any numerical failure
    let failure: std::cell::RefCell<Option<PyErr>> = std::cell::RefCell::new(None);
    let eval = |x: f64, y: f64| -> f64 {
        match f.call1((x, y)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let series = series::taylor2_coeffs(eval, order, h).map_err(series_err);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let series = series?;
    let mut out = Vec::new();
    for i in 0..=order {
        for j in 0..=(order - i) {
            out.push(((i, j), series.coefficient(i, j)));
        }
    }
    Ok(out)
}

#[pymodule]
fn infoqm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_class::<PyOscillatorState>()?;
    m.add_class::<PyDensity1D>()?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_from_beta, m)?)?;
    m.add_function(wrap_pyfunction!(fit_maxent, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(uniqueness_probe, m)?)?;
    m.add_function(wrap_pyfunction!(gram_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(mu0_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_series, m)?)?;
    m.add_function(wrap_pyfunction!(two_var_series, m)?)?;
    m.add_function(wrap_pyfunction!(taylor2_coeffs, m)?)?;
    Ok(())
}
