//! Python bindings: `import pyhetnet`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hetnet::beamforming;
use hetnet::config;
use hetnet::harness;
use hetnet::io::{self, Format};
use hetnet::linalg::{CMatrix, CVector};
use hetnet::seed::stream;
use hetnet::topology::{self, CellKind};
use hetnet::{CoordinationStrategy, Error, ExperimentSpec, Scenario};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        e @ Error::PlacementInfeasible { .. } => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_vector(v: Vec<Complex64>) -> CVector {
    CVector::from_vec(v)
}

fn to_matrix(rows: Vec<Vec<Complex64>>, cols: usize) -> PyResult<CMatrix> {
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(PyValueError::new_err(format!(
            "leakage rows must have {cols} entries, got {}",
            bad.len()
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Scenario and network parameters; defaults reproduce the standard setup.
#[pyclass(name = "NetworkConfig", from_py_object)]
#[derive(Clone)]
struct PyNetworkConfig {
    inner: config::NetworkConfig,
}

#[pymethods]
impl PyNetworkConfig {
    /// `NetworkConfig(**overrides)`; values use the config-file syntax.
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = config::NetworkConfig::default();
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let value = v.str()?.to_string();
                inner.set(&key, &value).map_err(py_err)?;
            }
        }
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        config::NetworkConfig::parse(text)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        config::NetworkConfig::load(&path)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(py_err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    #[staticmethod]
    fn keys() -> Vec<&'static str> {
        config::KEYS.to_vec()
    }

    #[getter]
    fn scenario(&self) -> &'static str {
        self.inner.scenario.name()
    }

    #[getter]
    fn strategies(&self) -> Vec<&'static str> {
        self.inner.strategies.iter().map(|s| s.name()).collect()
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.trials
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn num_microcells(&self) -> usize {
        self.inner.num_microcells
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkConfig(scenario={}, strategies={:?}, trials={}, seed={}, rho={})",
            self.inner.scenario,
            self.strategies(),
            self.inner.trials,
            self.inner.seed,
            self.inner.rho
        )
    }
}

/// Per-user received power in mW: `(P_t/k) (d0/d)^gamma * shadow`.
#[pyfunction]
#[pyo3(signature = (erp_dbm, num_users, distance_m, gamma, shadow_linear = 1.0))]
fn received_power(erp_dbm: f64, num_users: usize, distance_m: f64, gamma: f64, shadow_linear: f64) -> PyResult<f64> {
    hetnet::channel::received_power(erp_dbm, num_users, distance_m, gamma, shadow_linear).map_err(py_err)
}

/// Unit-norm SLNR beamformer for a desired channel and leakage rows.
#[pyfunction]
fn slnr_beamformer(desired: Vec<Complex64>, leakage: Vec<Vec<Complex64>>, noise_variance: f64) -> PyResult<Vec<Complex64>> {
    let cols = desired.len();
    let w = beamforming::slnr_beamformer(&to_vector(desired), &to_matrix(leakage, cols)?, noise_variance)
        .map_err(py_err)?;
    Ok(w.iter().copied().collect())
}

#[pyfunction]
fn slnr(w: Vec<Complex64>, desired: Vec<Complex64>, leakage: Vec<Vec<Complex64>>, noise_variance: f64) -> PyResult<f64> {
    let cols = desired.len();
    if w.len() != cols {
        return Err(PyValueError::new_err("w and desired must have the same length"));
    }
    let leak = to_matrix(leakage, cols)?;
    Ok(beamforming::slnr(&to_vector(w), &to_vector(desired), &leak, noise_variance))
}

#[pyfunction]
fn appendix_numerator(eigenvalues: Vec<f64>, noise_variance: f64, link_power: f64) -> PyResult<f64> {
    hetnet::metrics::appendix_numerator(&eigenvalues, noise_variance, link_power).map_err(py_err)
}

/// Nearest-rank `(p10, mean, p90)`.
#[pyfunction]
fn summarize_percentiles(values: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let p = harness::summarize_percentiles(&values).map_err(py_err)?;
    Ok((p.p10, p.mean, p.p90))
}

/// Draw one topology; returns `{"sites": [...], "users": [...]}`.
#[pyfunction]
#[pyo3(signature = (config, seed = 0, noise_variance = 1.0))]
fn build_topology<'py>(
    py: Python<'py>,
    config: &PyNetworkConfig,
    seed: u64,
    noise_variance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let topo = topology::build_topology(&config.inner, noise_variance, &mut stream("python-topology", &[seed]))
        .map_err(py_err)?;
    let sites = topo
        .sites
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("id", s.id)?;
            d.set_item("kind", if s.kind == CellKind::Macro { "macro" } else { "micro" })?;
            d.set_item("x", s.position.x)?;
            d.set_item("y", s.position.y)?;
            d.set_item("radius_m", s.radius_m)?;
            d.set_item("num_antennas", s.num_antennas)?;
            d.set_item("num_users", s.num_users)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let users = topo
        .users
        .iter()
        .map(|u| {
            let d = PyDict::new(py);
            d.set_item("id", u.id)?;
            d.set_item("serving_cell", u.serving_cell)?;
            d.set_item("x", u.position.x)?;
            d.set_item("y", u.position.y)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let out = PyDict::new(py);
    out.set_item("sites", sites)?;
    out.set_item("users", users)?;
    Ok(out)
}

fn experiment(py: Python<'_>, config: &PyNetworkConfig) -> PyResult<hetnet::CurveTable> {
    let spec = ExperimentSpec::from_config(&config.inner).map_err(py_err)?;
    py.detach(|| harness::run_experiment(&spec)).map_err(py_err)
}

/// Run the configured experiment; one dict per curve-table row.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &PyNetworkConfig) -> PyResult<Vec<Bound<'py, PyDict>>> {
    experiment(py, config)?
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("scenario", &r.scenario)?;
            d.set_item("strategy", &r.strategy)?;
            d.set_item("x_name", &r.x_name)?;
            d.set_item("x_value", r.x_value)?;
            d.set_item("metric", &r.metric)?;
            d.set_item("value", r.value)?;
            d.set_item("stderr", r.stderr)?;
            d.set_item("trials", r.trials)?;
            d.set_item("seed", r.seed)?;
            Ok(d)
        })
        .collect()
}

/// Run the configured experiment and return the table as CSV or JSON text.
#[pyfunction]
#[pyo3(signature = (config, format = "csv"))]
fn run_experiment_text(py: Python<'_>, config: &PyNetworkConfig, format: &str) -> PyResult<String> {
    let format: Format = format.parse().map_err(PyValueError::new_err)?;
    io::to_string(&experiment(py, config)?, format).map_err(py_err)
}

#[pymodule]
fn pyhetnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkConfig>()?;
    m.add_function(wrap_pyfunction!(received_power, m)?)?;
    m.add_function(wrap_pyfunction!(slnr_beamformer, m)?)?;
    m.add_function(wrap_pyfunction!(slnr, m)?)?;
    m.add_function(wrap_pyfunction!(appendix_numerator, m)?)?;
    m.add_function(wrap_pyfunction!(summarize_percentiles, m)?)?;
    m.add_function(wrap_pyfunction!(build_topology, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment_text, m)?)?;
    m.add(
        "STRATEGIES",
        CoordinationStrategy::ALL.iter().map(|s| s.name()).collect::<Vec<_>>(),
    )?;
    m.add("SCENARIOS", Scenario::ALL.iter().map(|s| s.name()).collect::<Vec<_>>())?;
    Ok(())
}
