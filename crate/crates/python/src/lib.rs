//! Python bindings: thin wrappers returning floats, tuples and dicts.

use cayley_qmc::dynamics::{self, DynPoint};
use cayley_qmc::free_energy::{self as fe, CriticalPoint};
use cayley_qmc::model::{self, RecursionCoeffs};
use cayley_qmc::spectral::{self, Boundary};
use cayley_qmc::verification::{self, Level};
use cayley_qmc::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::MaxStepsExceeded { .. } | Error::BracketFailure { .. } | Error::AmbiguousBranch { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn boundary(name: &str) -> PyResult<Boundary> {
    match name {
        "alpha0" => Ok(Boundary::Alpha0),
        "gamma" => Ok(Boundary::Gamma),
        _ => Err(PyValueError::new_err(format!("boundary must be 'alpha0' or 'gamma', got {name:?}"))),
    }
}

/// `(t_star, t_star2, beta_star, beta_star2)`.
#[pyfunction]
fn critical_points() -> PyResult<(f64, f64, f64, f64)> {
    let cp = model::critical_points().map_err(py_err)?;
    Ok((cp.t_star, cp.t_star2, cp.beta_star, cp.beta_star2))
}

/// `"Unique"` or `"Window"`.
#[pyfunction]
fn regime(beta: f64) -> &'static str {
    model::critical().regime(beta).as_str()
}

/// `(A1, B1, A2, B2)`.
#[pyfunction]
fn recursion_coeffs(beta: f64) -> PyResult<(f64, f64, f64, f64)> {
    let rc = RecursionCoeffs::new(beta).map_err(py_err)?;
    Ok((rc.a1, rc.b1, rc.a2, rc.b2))
}

#[pyfunction]
fn fixed_points(beta: f64) -> PyResult<Vec<(f64, f64)>> {
    Ok(dynamics::fixed_points(beta).map_err(py_err)?.iter().map(|p| (p.x, p.y)).collect())
}

/// Orbit as a dict with `outcome`, `limit` and `points`.
#[pyfunction]
#[pyo3(signature = (beta, x0, y0 = 0.0, max_steps = dynamics::DEFAULT_MAX_STEPS))]
fn trajectory(py: Python<'_>, beta: f64, x0: f64, y0: f64, max_steps: usize) -> PyResult<Bound<'_, PyDict>> {
    let r = dynamics::trajectory(DynPoint::new(x0, y0), beta, max_steps).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("outcome", r.outcome.label())?;
    d.set_item("limit", r.limit.map(|p| (p.x, p.y)))?;
    d.set_item("points", r.points.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())?;
    Ok(d)
}

/// Expectation of `σ1` at the root under the `"alpha0"` or `"gamma"` state at depth `n`.
#[pyfunction]
fn expectation_sigma1(boundary_name: &str, beta: f64, n: u32) -> PyResult<f64> {
    spectral::expectation_sigma1(boundary(boundary_name)?, beta, n).map_err(py_err)
}

#[pyfunction]
fn quasi_equiv_gap(py: Python<'_>, beta: f64) -> PyResult<Bound<'_, PyDict>> {
    let g = spectral::quasi_equiv_gap(beta).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("epsilon0", g.epsilon0)?;
    d.set_item("n0", g.n0)?;
    d.set_item("lambda2", g.lambda2)?;
    d.set_item("limit", g.limit)?;
    Ok(d)
}

#[pyfunction]
fn free_energy(beta: f64) -> PyResult<f64> {
    fe::f_closed(beta).map_err(py_err)
}

#[pyfunction]
fn free_energy_finite(beta: f64, n: u32) -> PyResult<f64> {
    fe::f_finite_n(beta, n).map_err(py_err)
}

/// `(beta, closed, numeric)` for `"beta_star"` or `"beta_star2"`.
#[pyfunction]
fn derivative_jump(at: &str) -> PyResult<(f64, f64, f64)> {
    let point = match at {
        "beta_star" => CriticalPoint::BetaStar,
        "beta_star2" => CriticalPoint::BetaStar2,
        _ => return Err(PyValueError::new_err(format!("expected 'beta_star' or 'beta_star2', got {at:?}"))),
    };
    let j = fe::derivative_jump(point).map_err(py_err)?;
    Ok((j.beta, j.closed, j.numeric))
}

/// Runs the self-check suite; returns `(all_passed, [(criterion, name, passed, measured), ...])`.
#[pyfunction]
#[pyo3(signature = (level = "quick", seed = cayley_qmc::oracle::DEFAULT_SEED))]
fn verify(level: &str, seed: u64) -> PyResult<(bool, Vec<(u8, String, bool, Option<f64>)>)> {
    let level = match level {
        "quick" => Level::Quick,
        "full" => Level::Full,
        _ => return Err(PyValueError::new_err(format!("level must be 'quick' or 'full', got {level:?}"))),
    };
    let report = verification::run(level, seed, None);
    let checks = report.checks.iter().map(|c| (c.criterion, c.name.to_string(), c.passed, c.measured)).collect();
    Ok((report.all_passed(), checks))
}

#[pymodule]
fn cayley_qmc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(regime, m)?)?;
    m.add_function(wrap_pyfunction!(recursion_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(expectation_sigma1, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_equiv_gap, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy_finite, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_jump, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
