//! Python module `chiwalk`. Structured values cross the boundary as JSON
//! strings with the same schema as the HTTP API and save files.

use chiwalk_core::eval::{expense as expense_of, run_eval as run_eval_core, Approach, CostParams};
use chiwalk_core::session::{load_session, save_session, Command, SessionState};
use chiwalk_core::world::Scenario;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: chiwalk_core::Error) -> PyErr {
    match e {
        chiwalk_core::Error::Io(_) | chiwalk_core::Error::SessionClosed => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn approach(s: &str) -> PyResult<Approach> {
    s.parse().map_err(PyValueError::new_err)
}

/// Scenario JSON for `builtin:<name>` or a file path.
#[pyfunction]
#[pyo3(signature = (spec, seed=0))]
fn scenario_json(spec: &str, seed: u64) -> PyResult<String> {
    Scenario::resolve(spec, seed).and_then(|s| s.to_json()).map_err(err)
}

/// Expense of running `approach` for `t` time units.
#[pyfunction]
fn expense(t: f64, approach_spec: &str) -> PyResult<f64> {
    Ok(expense_of(t, &CostParams::for_approach(&approach(approach_spec)?)))
}

/// Runs seeds `0..seeds` for every approach; returns curve rows as JSON.
#[pyfunction]
#[pyo3(signature = (scenario, approaches, seeds, horizon, every=250.0))]
fn run_eval(py: Python<'_>, scenario: &str, approaches: Vec<String>, seeds: u64, horizon: f64, every: f64) -> PyResult<String> {
    let approaches = approaches.iter().map(|a| approach(a)).collect::<PyResult<Vec<_>>>()?;
    let seeds: Vec<u64> = (0..seeds).collect();
    let scenario = scenario.to_string();
    let result = py.detach(move || run_eval_core(&scenario, &approaches, &seeds, horizon, every)).map_err(err)?;
    json(&result.rows)
}

#[pyclass(name = "Session")]
struct PySession {
    inner: SessionState,
}

#[pymethods]
impl PySession {
    #[new]
    #[pyo3(signature = (scenario="builtin:office17", seed=0))]
    fn new(scenario: &str, seed: u64) -> PyResult<Self> {
        let sc = Scenario::resolve(scenario, seed).map_err(err)?;
        Ok(PySession { inner: SessionState::with_defaults(sc, seed).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PySession { inner: load_session(path).map_err(err)? })
    }

    /// Applies one command given as JSON and returns the state delta.
    fn tick(&mut self, command: &str) -> PyResult<String> {
        let cmd: Command = serde_json::from_str(command).map_err(|e| PyValueError::new_err(format!("malformed command: {e}")))?;
        json(&self.inner.tick(cmd).map_err(err)?)
    }

    fn state(&self) -> PyResult<String> {
        self.inner.to_canonical_json().map_err(err)
    }

    fn suggestions(&self) -> PyResult<String> {
        json(&self.inner.suggestions())
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_session(&self.inner, path).map_err(err)
    }

    fn verify_replay(&self) -> PyResult<()> {
        self.inner.verify_replay().map_err(err)
    }

    #[getter]
    fn seq(&self) -> u64 {
        self.inner.seq()
    }
}

#[pymodule]
fn chiwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(scenario_json, m)?)?;
    m.add_function(wrap_pyfunction!(expense, m)?)?;
    m.add_function(wrap_pyfunction!(run_eval, m)?)?;
    m.add_class::<PySession>()?;
    Ok(())
}
