//! Python bindings for the gaussamp core.
//!
//! Results with structure (verdicts, sweep cells, verify reports) come back
//! as plain dicts and lists; correlation matrices as nested lists of complex.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use gaussamp::channel::{ChannelParams as CoreParams, ComplexCM, GaussianState};
use gaussamp::error::Error;
use gaussamp::propagator::{evolve as core_evolve, residue_general};
use gaussamp::separability::{
    cm_symplectic_eigenvalues, ppt_general, strong_asymptotic_criterion,
    strong_finite_time_criterion, symmetric_quartic_criterion, weak_intermode_criterion, Verdict,
};
use gaussamp::sweep::{self, AxisRange, SweepSpec, DEFAULT_NBAR_MAX};
use gaussamp::verify::{run_verify, Suite, DEFAULT_SEED, DEFAULT_TRIALS};

create_exception!(gaussamp_py, GaussampError, PyException);
create_exception!(gaussamp_py, SingularSystemError, GaussampError);
create_exception!(gaussamp_py, RegimeViolationError, GaussampError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SingularSystem { .. } => SingularSystemError::new_err(e.to_string()),
        Error::RegimeViolation(_) => RegimeViolationError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Round-trips through JSON so every serde type maps to dicts and lists.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| GaussampError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Two-mode channel rates. The constructor takes raw rates; `normalized`
/// and `intermode` take primed parameters with gamma0 = 1.
#[pyclass(frozen, module = "gaussamp_py")]
struct ChannelParams {
    inner: CoreParams,
}

#[pymethods]
impl ChannelParams {
    #[new]
    #[pyo3(signature = (eta0, eta1, eta3, gamma1, gamma2, nbar0=0.0))]
    fn new(
        eta0: f64,
        eta1: f64,
        eta3: f64,
        gamma1: f64,
        gamma2: f64,
        nbar0: f64,
    ) -> PyResult<Self> {
        CoreParams::new(eta0, eta1, eta3, gamma1, gamma2, nbar0)
            .map(|inner| ChannelParams { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (eta0p, eta1p, eta3p, gamma3p, nbar0=0.0))]
    fn normalized(eta0p: f64, eta1p: f64, eta3p: f64, gamma3p: f64, nbar0: f64) -> PyResult<Self> {
        CoreParams::normalized(eta0p, eta1p, eta3p, gamma3p, nbar0)
            .map(|inner| ChannelParams { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (gamma3p, eta1p, nbar0=0.0))]
    fn intermode(gamma3p: f64, eta1p: f64, nbar0: f64) -> PyResult<Self> {
        CoreParams::intermode(gamma3p, eta1p, nbar0)
            .map(|inner| ChannelParams { inner })
            .map_err(to_py)
    }

    #[getter]
    fn gamma0(&self) -> f64 {
        self.inner.gamma0()
    }
    #[getter]
    fn gamma3p(&self) -> f64 {
        self.inner.gamma3p()
    }
    #[getter]
    fn eta0p(&self) -> f64 {
        self.inner.eta0p()
    }
    #[getter]
    fn eta1p(&self) -> f64 {
        self.inner.eta1p()
    }
    #[getter]
    fn eta3p(&self) -> f64 {
        self.inner.eta3p()
    }
    #[getter]
    fn nbar0(&self) -> f64 {
        self.inner.nbar0()
    }
    /// sqrt(eta1p² + gamma3p²), the inter-mode regime parameter.
    #[getter]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    fn tprime(&self, t: f64) -> f64 {
        self.inner.tprime(t)
    }

    fn regime(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &self.inner.regime())
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ChannelParams(eta0={}, eta1={}, eta3={}, gamma1={}, gamma2={}, nbar0={})",
            p.eta0(),
            p.eta1(),
            p.eta3(),
            p.gamma1(),
            p.gamma2(),
            p.nbar0()
        )
    }
}

fn cm_dict<'py>(py: Python<'py>, cm: &ComplexCM) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x", cm.x.m)?;
    d.set_item("y", cm.y.m)?;
    d.set_item("nu", cm_symplectic_eigenvalues(cm).map_err(to_py)?)?;
    Ok(d)
}

/// State after time `tprime` (normalized) from the vacuum, or from the
/// stationary state when `initial="stationary"`.
#[pyfunction]
#[pyo3(signature = (params, tprime, initial="vacuum"))]
fn evolve<'py>(
    py: Python<'py>,
    params: &ChannelParams,
    tprime: f64,
    initial: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &params.inner;
    let start = match initial {
        "vacuum" => GaussianState::vacuum(),
        "stationary" => GaussianState::centred(residue_general(p).map_err(to_py)?.to_cm()),
        other => {
            return Err(PyValueError::new_err(format!(
                "initial must be 'vacuum' or 'stationary', got '{other}'"
            )))
        }
    };
    let state = core_evolve(&start, p, p.time_from_tprime(tprime)).map_err(to_py)?;
    let d = cm_dict(py, &state.cm)?;
    d.set_item("m", state.m)?;
    Ok(d)
}

/// Stationary correlation matrix.
#[pyfunction]
fn stationary<'py>(py: Python<'py>, params: &ChannelParams) -> PyResult<Bound<'py, PyDict>> {
    cm_dict(py, &residue_general(&params.inner).map_err(to_py)?.to_cm())
}

fn verdict_dict<'py>(py: Python<'py>, method: &str, v: &Verdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", method)?;
    d.set_item("decision", v.decision.as_str())?;
    d.set_item("margin", v.margin)?;
    Ok(d)
}

/// Separability verdict. Methods: general, weak, strong-finite (needs
/// `tprime`), strong-asymptotic, quartic. `general` checks the stationary
/// state, or the evolved vacuum when `tprime` is given.
#[pyfunction]
#[pyo3(signature = (params, method="general", tprime=None))]
fn check<'py>(
    py: Python<'py>,
    params: &ChannelParams,
    method: &str,
    tprime: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &params.inner;
    let (g, e, n) = (p.gamma3p(), p.eta1p(), p.nbar0());
    let intermode = || {
        if p.is_intermode_only() {
            Ok(())
        } else {
            Err(RegimeViolationError::new_err(format!(
                "method '{method}' needs eta0 = eta3 = 0"
            )))
        }
    };
    let verdict = match method {
        "general" => {
            let cm = match tprime {
                Some(tp) => {
                    gaussamp::propagator::evolve_vacuum_tprime(p, tp)
                        .map_err(to_py)?
                        .cm
                }
                None => residue_general(p).map_err(to_py)?.to_cm(),
            };
            ppt_general(&cm)
        }
        "weak" => {
            intermode()?;
            weak_intermode_criterion(g, e, n)
        }
        "strong-asymptotic" => {
            intermode()?;
            strong_asymptotic_criterion(g, e, n)
        }
        "quartic" => symmetric_quartic_criterion(p),
        "strong-finite" => {
            intermode()?;
            let tp = tprime.ok_or_else(|| PyValueError::new_err("strong-finite needs tprime"))?;
            let v = strong_finite_time_criterion(p, tp).map_err(to_py)?;
            let d = verdict_dict(py, method, &v.verdict())?;
            d.set_item("polynomial_margin", v.polynomial.margin)?;
            d.set_item("polynomial_corrected_margin", v.polynomial_corrected.margin)?;
            d.set_item("comparison", to_object(py, &v.comparison)?)?;
            return Ok(d);
        }
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    }
    .map_err(to_py)?;
    verdict_dict(py, method, &verdict)
}

/// Critical thermal occupancy at one grid cell, or None when the verdict
/// does not change on [0, nbar_max]. Returns (value, status).
#[pyfunction]
#[pyo3(signature = (gamma3p, eta1p, eta0p=0.0, nbar_max=DEFAULT_NBAR_MAX))]
fn critical_noise(
    gamma3p: f64,
    eta1p: f64,
    eta0p: f64,
    nbar_max: f64,
) -> PyResult<(Option<f64>, &'static str)> {
    let spec = SweepSpec {
        gamma3p: AxisRange::single(gamma3p),
        eta1p: AxisRange::single(eta1p),
        eta0p: AxisRange::single(eta0p),
        nbar_max,
    };
    let cell = sweep::sweep_grid(&spec).map_err(to_py)?[0];
    Ok((cell.critical_value, cell.status.as_str()))
}

/// Border sweep over (start, stop, step) ranges; one dict per grid cell.
#[pyfunction]
#[pyo3(signature = (gamma3p=(0.0, 0.9, 0.05), eta1p=(0.05, 2.0, 0.05), eta0p=0.0, nbar_max=DEFAULT_NBAR_MAX))]
fn sweep_grid(
    py: Python<'_>,
    gamma3p: (f64, f64, f64),
    eta1p: (f64, f64, f64),
    eta0p: f64,
    nbar_max: f64,
) -> PyResult<Py<PyAny>> {
    let spec = SweepSpec {
        gamma3p: AxisRange::new(gamma3p.0, gamma3p.1, gamma3p.2),
        eta1p: AxisRange::new(eta1p.0, eta1p.1, eta1p.2),
        eta0p: AxisRange::single(eta0p),
        nbar_max,
    };
    let points = py.detach(|| sweep::sweep_grid(&spec)).map_err(to_py)?;
    to_object(py, &points)
}

/// Seeded self-check suites; returns the report dict.
#[pyfunction]
#[pyo3(signature = (seed=DEFAULT_SEED, trials=DEFAULT_TRIALS, inject_fault=None))]
fn verify(
    py: Python<'_>,
    seed: u64,
    trials: usize,
    inject_fault: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let fault = inject_fault
        .map(Suite::from_name)
        .transpose()
        .map_err(to_py)?;
    let report = py.detach(|| run_verify(seed, trials, fault));
    to_object(py, &report)
}

#[pymodule]
fn gaussamp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<ChannelParams>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(stationary, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(critical_noise, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_grid, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("GaussampError", py.get_type::<GaussampError>())?;
    m.add("SingularSystemError", py.get_type::<SingularSystemError>())?;
    m.add(
        "RegimeViolationError",
        py.get_type::<RegimeViolationError>(),
    )?;
    Ok(())
}
