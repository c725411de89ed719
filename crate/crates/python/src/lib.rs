use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mcore::chain::StartSpec;
use mcore::clt;
use mcore::linear::{self, CoefficientSequence, Condition9Thresholds};
use mcore::martingale;
use mcore::poisson::{self, PoissonApproximant};
use mcore::rng::RootSeed;
use mcore::{model_file, presets, variance};

create_exception!(martapprox, MartapproxError, PyValueError);

fn err(e: mcore::Error) -> PyErr {
    MartapproxError::new_err(e.to_string())
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for mcore::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Finite ergodic Markov chain with a centered observable `g`.
#[pyclass(name = "MarkovModel", module = "martapprox", frozen)]
struct PyModel {
    inner: mcore::MarkovModel,
}

fn approximant(m: &mcore::MarkovModel, n: usize, method: &str) -> PyResult<PoissonApproximant> {
    match method {
        "averaged" => poisson::h_n_averaged(m, n).py(),
        "partial" => poisson::h_n_partial(m, n).py(),
        "resolvent" => poisson::resolvent_for_horizon(m, n).py(),
        other => Err(PyValueError::new_err(format!(
            "unknown method {other:?}; expected 'averaged', 'partial' or 'resolvent'"
        ))),
    }
}

#[pymethods]
impl PyModel {
    /// If `center` is true, `g` is centered under the stationary law first.
    #[new]
    #[pyo3(signature = (kernel, g, states=None, pi=None, center=false))]
    fn new(
        kernel: Vec<Vec<f64>>,
        g: Vec<f64>,
        states: Option<Vec<String>>,
        pi: Option<Vec<f64>>,
        center: bool,
    ) -> PyResult<Self> {
        let states = states.unwrap_or_else(|| (0..kernel.len()).map(|i| i.to_string()).collect());
        let inner = if center {
            mcore::MarkovModel::with_raw_observable(states, &kernel, pi, g).py()?.0
        } else {
            mcore::MarkovModel::new(states, &kernel, pi, g).py()?
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        presets::by_name(name).map(|inner| Self { inner }).ok_or_else(|| {
            PyValueError::new_err(format!("unknown preset {name:?}; known: {}", presets::PRESET_NAMES.join(", ")))
        })
    }

    #[staticmethod]
    fn preset_names() -> Vec<&'static str> {
        presets::PRESET_NAMES.to_vec()
    }

    /// Reads the text model format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: model_file::parse_model(text).py()?.model })
    }

    fn to_text(&self) -> String {
        model_file::write_model(&self.inner)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.states().to_vec()
    }

    #[getter]
    fn pi(&self) -> Vec<f64> {
        self.inner.pi().to_vec()
    }

    #[getter]
    fn g(&self) -> Vec<f64> {
        self.inner.g_values().to_vec()
    }

    #[getter]
    fn kernel(&self) -> Vec<Vec<f64>> {
        self.inner.kernel_rows()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.hash().to_string()
    }

    fn apply_kernel(&self, h: Vec<f64>) -> PyResult<Vec<f64>> {
        let f = self.inner.function(h).py()?;
        Ok(self.inner.apply_kernel(&f).py()?.into_values())
    }

    /// `E(S_n | X_0 = x)` for each state.
    fn conditional_mean(&self, n: usize) -> PyResult<Vec<f64>> {
        Ok(self.inner.conditional_mean_sn(n).py()?.into_values())
    }

    fn sigma_n_sq(&self, n: usize) -> f64 {
        variance::sigma_n_sq_raw(&self.inner, n)
    }

    /// Poisson approximant `h` for horizon `n`.
    #[pyo3(signature = (n, method="averaged"))]
    fn poisson(&self, n: usize, method: &str) -> PyResult<Vec<f64>> {
        Ok(approximant(&self.inner, n, method)?.h.into_values())
    }

    /// Martingale difference `H(x0, x1)` as an `S × S` nested list.
    #[pyo3(signature = (n, method="averaged"))]
    fn difference(&self, n: usize, method: &str) -> PyResult<Vec<Vec<f64>>> {
        let h = martingale::difference_function(&self.inner, &approximant(&self.inner, n, method)?).py()?;
        Ok(h.values().chunks(h.num_states()).map(<[f64]>::to_vec).collect())
    }

    /// Exact `‖S_k − M_{nk}‖` for `k = 1..n` and the bound they are compared with.
    fn error_bound<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyDict>> {
        let r = martingale::error_bound_report(&self.inner, n).py()?;
        let d = PyDict::new(py);
        d.set_item("n", r.n)?;
        d.set_item("errors", r.per_k_errors)?;
        d.set_item("max_error", r.max_error)?;
        d.set_item("bound", r.bound)?;
        d.set_item("sigma_n", r.sigma_n)?;
        Ok(d)
    }

    fn alpha_mixing(&self, n: usize) -> PyResult<f64> {
        clt::alpha_mixing_exact(&self.inner, n).py()
    }

    /// `count` paths `X_1..X_n`; stationary starts unless `start` is given.
    #[pyo3(signature = (n, count, seed, start=None))]
    fn simulate(&self, n: usize, count: usize, seed: u64, start: Option<usize>) -> PyResult<Vec<(usize, Vec<u32>)>> {
        let spec = start.map_or(StartSpec::Stationary, StartSpec::Fixed);
        let e = self.inner.simulate_paths(n, count, spec, RootSeed(seed)).py()?;
        Ok(e.trajectories.into_iter().map(|t| (t.start, t.path)).collect())
    }

    /// π-averaged Lévy distance of `S_n/σ_n` given `X_0` from the normal law.
    fn conditional_clt<'py>(&self, py: Python<'py>, n: usize, paths_per_state: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let r = clt::conditional_clt_stat(&self.inner, n, paths_per_state, RootSeed(seed)).py()?;
        let d = PyDict::new(py);
        d.set_item("n", r.n)?;
        d.set_item("per_state", r.per_state_levy)?;
        d.set_item("integrated", r.integrated)?;
        d.set_item("floor", r.floor)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("MarkovModel(states={:?}, hash={:.12})", self.inner.states(), self.inner.hash())
    }
}

/// Coefficients `a_j` of a linear process.
#[pyclass(name = "Coefficients", module = "martapprox", frozen)]
struct PyCoefficients {
    inner: CoefficientSequence,
}

#[pymethods]
impl PyCoefficients {
    #[staticmethod]
    fn geometric(rho: f64) -> PyResult<Self> {
        Ok(Self { inner: CoefficientSequence::geometric(rho).py()? })
    }

    #[staticmethod]
    fn harmonic() -> Self {
        Self { inner: CoefficientSequence::harmonic() }
    }

    #[staticmethod]
    fn log_gap() -> Self {
        Self { inner: CoefficientSequence::log_gap() }
    }

    #[staticmethod]
    fn power_law(beta: f64) -> PyResult<Self> {
        Ok(Self { inner: CoefficientSequence::power_law(beta).py()? })
    }

    #[staticmethod]
    fn alternating_power(beta: f64) -> PyResult<Self> {
        Ok(Self { inner: CoefficientSequence::alternating_power(beta).py()? })
    }

    #[staticmethod]
    #[pyo3(signature = (values, finite_support=false))]
    fn tabulated(values: Vec<f64>, finite_support: bool) -> PyResult<Self> {
        Ok(Self { inner: CoefficientSequence::tabulated(values, finite_support).py()? })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn a(&self, j: usize) -> f64 {
        self.inner.a(j)
    }

    /// `(σ_{n,1}², σ_{n,2}²)`.
    #[pyo3(signature = (n, tol=1e-6))]
    fn variances(&self, n: usize, tol: f64) -> PyResult<(f64, f64)> {
        let r = linear::linear_variance(&self.inner, n, tol).py()?;
        Ok((r.sigma1_sq, r.sigma2_sq))
    }

    /// Verdict string and per-grid ratios `σ_{n,1}²/σ_{n,2}²`.
    #[pyo3(signature = (grid, tol=1e-6))]
    fn condition9(&self, grid: Vec<usize>, tol: f64) -> PyResult<(String, Vec<f64>)> {
        let r = linear::condition9_report(&self.inner, &grid, tol, Condition9Thresholds::default()).py()?;
        Ok((r.verdict.to_string(), r.rows.iter().map(|row| row.ratio9).collect()))
    }

    fn __repr__(&self) -> String {
        format!("Coefficients({})", self.inner.name())
    }
}

/// Lévy distance of the empirical law of `samples` from the standard normal.
#[pyfunction]
fn levy_to_normal(samples: Vec<f64>) -> PyResult<f64> {
    clt::levy_to_normal(samples).py()
}

/// Lévy distance between two empirical laws.
#[pyfunction]
fn levy_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let f = clt::Cdf::Empirical(clt::EmpiricalCdf::new(a).py()?);
    let g = clt::Cdf::Empirical(clt::EmpiricalCdf::new(b).py()?);
    Ok(clt::levy_distance(&f, &g))
}

#[pymodule]
fn martapprox(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyCoefficients>()?;
    m.add_function(wrap_pyfunction!(levy_to_normal, m)?)?;
    m.add_function(wrap_pyfunction!(levy_distance, m)?)?;
    m.add("MartapproxError", m.py().get_type::<MartapproxError>())?;
    Ok(())
}
