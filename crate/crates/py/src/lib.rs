//! Python bindings: scenarios, channel instances, the three solvers and the
//! sweep runner.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tsr_relay::alpf::{self, AlpfOptions};
use tsr_relay::channel::generate_seeded;
use tsr_relay::experiment::{self, ExperimentSpec, Solver, SolverOutcome};
use tsr_relay::tsr::{Allocation, Pairing, SystemInstance};
use tsr_relay::{oracle, ComplexMatrix, Error};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        Error::SvdNotConverged { .. } => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: tsr_relay::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Keyword arguments override the defaults, e.g. `Scenario(phi=0.3)`.
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = tsr_relay::Scenario::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let value = v.str()?.to_string();
                if !inner.set(&key, &value).map_err(to_py)? {
                    return Err(PyValueError::new_err(format!("unknown scenario key `{key}`")));
                }
            }
        }
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        tsr_relay::Scenario::from_config_str(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn to_config(&self) -> String {
        self.inner.to_config_string()
    }

    #[getter]
    fn n_s(&self) -> usize {
        self.inner.n_s
    }
    #[getter]
    fn n_r(&self) -> usize {
        self.inner.n_r
    }
    #[getter]
    fn n_d(&self) -> usize {
        self.inner.n_d
    }
    #[getter]
    fn k_subcarriers(&self) -> usize {
        self.inner.k_subcarriers
    }
    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.inner.bandwidth_hz
    }
    #[getter]
    fn p_source(&self) -> f64 {
        self.inner.p_source
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }
    #[getter]
    fn d_sd(&self) -> f64 {
        self.inner.d_sd
    }
    #[getter]
    fn pathloss_exp(&self) -> f64 {
        self.inner.pathloss_exp
    }
    #[getter]
    fn noise_total_w(&self) -> f64 {
        self.inner.noise_total_w
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Number of flattened subchannels `K * min(N_S, N_R, N_D)`.
    fn subchannels(&self) -> usize {
        self.inner.subchannels()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "Scenario(n_s={}, n_r={}, n_d={}, k_subcarriers={}, p_source={}, phi={}, d_sd={})",
            s.n_s, s.n_r, s.n_d, s.k_subcarriers, s.p_source, s.phi, s.d_sd
        )
    }
}

fn options(eps: Option<f64>, max_outer_iters: Option<usize>, max_inner_iters: Option<usize>) -> AlpfOptions {
    let mut o = AlpfOptions::default();
    if let Some(e) = eps {
        o.eps = e;
    }
    if let Some(n) = max_outer_iters {
        o.max_outer_iters = n;
    }
    if let Some(n) = max_inner_iters {
        o.max_inner_iters = n;
    }
    o
}

fn allocation_dict<'py>(py: Python<'py>, a: &Allocation) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("alpha", a.alpha)?;
    d.set_item("mu", a.mu.clone())?;
    d.set_item("mu_bar", a.mu_bar.clone())?;
    d.set_item("pairing", a.pairing.as_slice().to_vec())?;
    Ok(d)
}

fn outcome_dict<'py>(py: Python<'py>, o: &SolverOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = allocation_dict(py, &o.allocation)?;
    d.set_item("solver", o.solver.name())?;
    d.set_item("rate", o.rate)?;
    d.set_item("pair_snrs", o.pair_snrs.clone())?;
    d.set_item("iterations", o.iterations)?;
    d.set_item("converged", o.converged)?;
    d.set_item("final_violation", o.final_violation)?;
    Ok(d)
}

/// One channel realization with its energy plan and subchannel pairing.
#[pyclass(name = "Instance")]
struct PyInstance {
    inner: SystemInstance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (scenario, seed=0))]
    fn new(scenario: &PyScenario, seed: u64) -> PyResult<Self> {
        let real = generate_seeded(&scenario.inner, seed).map_err(to_py)?;
        SystemInstance::new(&real, &scenario.inner)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Hop-1 gains, sorted descending.
    #[getter]
    fn gains1(&self) -> Vec<f64> {
        self.inner.gains1.clone()
    }

    /// Hop-2 gains, sorted descending.
    #[getter]
    fn gains2(&self) -> Vec<f64> {
        self.inner.gains2.clone()
    }

    #[getter]
    fn pairing(&self) -> Vec<usize> {
        self.inner.pairing.as_slice().to_vec()
    }

    #[getter]
    fn a_coeffs(&self) -> Vec<f64> {
        self.inner.a_coeffs()
    }

    #[getter]
    fn b_coeffs(&self) -> Vec<f64> {
        self.inner.b_coeffs()
    }

    #[getter]
    fn energy_subcarrier(&self) -> usize {
        self.inner.plan.chosen_subcarrier
    }

    #[getter]
    fn harvest_coeff(&self) -> f64 {
        self.inner.plan.harvest_coeff
    }

    fn relay_power(&self, alpha: f64) -> PyResult<f64> {
        self.inner.plan.relay_power(alpha).map_err(to_py)
    }

    /// Rate in bit/s of an allocation; `pairing` defaults to the instance's.
    #[pyo3(signature = (alpha, mu, mu_bar, pairing=None))]
    fn rate(&self, alpha: f64, mu: Vec<f64>, mu_bar: Vec<f64>, pairing: Option<Vec<usize>>) -> PyResult<f64> {
        let pairing = match pairing {
            Some(p) => Pairing::new(p).map_err(to_py)?,
            None => self.inner.pairing.clone(),
        };
        let alloc = Allocation { alpha, mu, mu_bar, pairing };
        alloc.validate().map_err(to_py)?;
        self.inner.rate(&alloc).map_err(to_py)
    }

    #[pyo3(signature = (eps=None, max_outer_iters=None, max_inner_iters=None))]
    fn optimize<'py>(
        &self,
        py: Python<'py>,
        eps: Option<f64>,
        max_outer_iters: Option<usize>,
        max_inner_iters: Option<usize>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = options(eps, max_outer_iters, max_inner_iters);
        let o = experiment::run_solver(&self.inner, Solver::Alpf, &opts).map_err(to_py)?;
        let d = outcome_dict(py, &o)?;
        let (_, report) = alpf::optimize_instance(&self.inner, &opts).map_err(to_py)?;
        d.set_item("violation_history", report.violation_history)?;
        d.set_item("inner_iterations", report.inner_iterations)?;
        Ok(d)
    }

    fn oracle<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let problem = self.inner.problem().map_err(to_py)?;
        let sol = oracle::solve(&problem, oracle::DEFAULT_GRID_POINTS, oracle::DEFAULT_REFINE_TOL);
        let o = experiment::run_solver(&self.inner, Solver::Oracle, &AlpfOptions::default()).map_err(to_py)?;
        let d = outcome_dict(py, &o)?;
        d.set_item("alpha_grid_profile", sol.alpha_grid_profile)?;
        Ok(d)
    }

    fn benchmark<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let o = experiment::run_solver(&self.inner, Solver::Benchmark, &AlpfOptions::default()).map_err(to_py)?;
        outcome_dict(py, &o)
    }
}

/// Singular values (descending) of a complex matrix given as a list of rows.
#[pyfunction]
fn singular_values(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    let m = ComplexMatrix::new(r, c, rows.into_iter().flatten().collect()).map_err(to_py)?;
    m.svd().map(|s| s.singular_values).map_err(to_py)
}

/// Run a sweep described in the key-value spec format. Returns the aggregated
/// rows; the CSV is also written when the spec names an output file.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, spec: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = ExperimentSpec::from_config_str(spec).map_err(to_py)?;
    let result = py.detach(|| experiment::run(&spec)).map_err(to_py)?;
    if let Some(path) = &spec.output_path {
        experiment::emit_csv(&result, path).map_err(to_py)?;
    }
    result
        .rows
        .iter()
        .map(|row| {
            let d = PyDict::new(py);
            d.set_item("sweep", &result.sweep)?;
            d.set_item("value", row.value)?;
            d.set_item("solver", row.solver.name())?;
            d.set_item("mean_rate_bps", row.mean_rate)?;
            d.set_item("std_error", row.std_error)?;
            d.set_item("mean_alpha", row.mean_alpha)?;
            d.set_item("mean_iterations", row.mean_iterations)?;
            d.set_item("converged_fraction", row.converged_fraction)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (trials=50, seed=0))]
fn selftest<'py>(py: Python<'py>, trials: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| experiment::selftest(trials, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("passed", r.passed())?;
    d.set_item("trials", r.trials)?;
    d.set_item("converged", r.converged)?;
    d.set_item("worst_oracle_gap", r.worst_oracle_gap)?;
    d.set_item("worst_benchmark_excess", r.worst_benchmark_excess)?;
    d.set_item("failures", r.failures)?;
    Ok(d)
}

#[pymodule]
fn tsr_relay_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
