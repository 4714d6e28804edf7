//! Python bindings. Structured results come back as plain dicts and lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use optomech_cv as core;
use optomech_cv::config;
use optomech_cv::figures;
use optomech_cv::sweep::{resolve_workers, Axis, Observable, SweepSpec};

fn to_py(e: core::Error) -> PyErr {
    use core::Error::*;
    match e {
        Parameter { .. } | Domain(_) | Config(_) => PyValueError::new_err(e.to_string()),
        Unstable { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_obj<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Physical parameters in SI units.
#[pyclass(name = "PhysicalParams", module = "optomech", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: core::PhysicalParams,
}

#[pymethods]
impl PyParams {
    /// Reference parameter set (same as the fig2 preset).
    #[staticmethod]
    fn reference() -> Self {
        Self {
            inner: core::PhysicalParams::reference(),
        }
    }

    #[staticmethod]
    fn preset(id: &str) -> PyResult<Self> {
        figures::preset_params(id)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        config::parse_params(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        config::load_params(&path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn get(&self, name: &str) -> PyResult<f64> {
        self.inner.get_field(name).map_err(to_py)
    }

    /// Copy with one field replaced.
    fn with_field(&self, name: &str, value: f64) -> PyResult<Self> {
        let mut inner = self.inner;
        inner.set_field(name, value).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_toml(&self) -> String {
        config::to_toml(&self.inner)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_obj(py, &config::to_json_value(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("PhysicalParams({})", config::to_json_value(&self.inner))
    }
}

/// Reduced two-mode block (L, R, c, c′).
#[pyclass(name = "TwoModeBlock", module = "optomech", get_all, from_py_object)]
#[derive(Clone, Copy)]
struct PyBlock {
    big_l: f64,
    big_r: f64,
    c: f64,
    c_prime: f64,
    asymmetry: f64,
}

impl From<core::TwoModeBlock> for PyBlock {
    fn from(b: core::TwoModeBlock) -> Self {
        Self {
            big_l: b.big_l,
            big_r: b.big_r,
            c: b.c,
            c_prime: b.c_prime,
            asymmetry: b.asymmetry,
        }
    }
}

impl From<PyBlock> for core::TwoModeBlock {
    fn from(b: PyBlock) -> Self {
        core::TwoModeBlock {
            big_l: b.big_l,
            big_r: b.big_r,
            c: b.c,
            c_prime: b.c_prime,
            asymmetry: b.asymmetry,
        }
    }
}

#[pymethods]
impl PyBlock {
    #[new]
    #[pyo3(signature = (big_l, big_r, c, c_prime = 0.0))]
    fn new(big_l: f64, big_r: f64, c: f64, c_prime: f64) -> Self {
        Self {
            big_l,
            big_r,
            c,
            c_prime,
            asymmetry: 0.0,
        }
    }

    #[staticmethod]
    fn vacuum() -> Self {
        core::TwoModeBlock::vacuum().into()
    }

    /// 4×4 covariance matrix as nested lists.
    fn matrix(&self) -> Vec<Vec<f64>> {
        let m = core::TwoModeBlock::from(*self).matrix();
        (0..4)
            .map(|i| (0..4).map(|j| m[(i, j)]).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "TwoModeBlock(L={}, R={}, c={}, c_prime={})",
            self.big_l, self.big_r, self.c, self.c_prime
        )
    }
}

#[pyfunction]
fn derive<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    json_obj(py, &core::derive(&params.inner).map_err(to_py)?)
}

#[pyfunction]
fn stability<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    let model = core::build(&core::derive(&params.inner).map_err(to_py)?);
    json_obj(py, &core::stability(&model).map_err(to_py)?)
}

/// Stationary output covariance: {"matrix": 6×6, "quad_error": 6×6}.
#[pyfunction]
fn output_cm<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    let e = core::evaluate(&params.inner).map_err(to_py)?;
    let cm = e.output.ok_or_else(|| {
        to_py(core::Error::Unstable {
            margin: e.stability.margin,
        })
    })?;
    json_obj(py, &cm)
}

#[pyfunction]
fn reduce(params: &PyParams) -> PyResult<PyBlock> {
    let e = core::evaluate(&params.inner).map_err(to_py)?;
    e.block.map(PyBlock::from).ok_or_else(|| {
        to_py(core::Error::Unstable {
            margin: e.stability.margin,
        })
    })
}

#[pyfunction]
fn log_negativity(block: &PyBlock) -> PyResult<f64> {
    core::log_negativity(&(*block).into()).map_err(to_py)
}

#[pyfunction]
fn duan_sum(block: &PyBlock) -> f64 {
    core::duan_sum(&(*block).into())
}

#[pyfunction]
fn rate_om(block: &PyBlock, nbar: f64) -> PyResult<f64> {
    core::rate_om(&(*block).into(), nbar).map_err(to_py)
}

#[pyfunction]
fn capacities<'py>(py: Python<'py>, nbar: f64) -> PyResult<Bound<'py, PyAny>> {
    json_obj(py, &core::capacities(nbar).map_err(to_py)?)
}

/// Full chain; returns stability, block and entanglement summary.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    let e = core::evaluate(&params.inner).map_err(to_py)?;
    let report = match &e.block {
        Some(b) => Some(core::entanglement(b).map_err(to_py)?),
        None => None,
    };
    json_obj(
        py,
        &serde_json::json!({
            "stability": e.stability,
            "block": e.block,
            "entanglement": report,
        }),
    )
}

/// Sweep around `params`; returns the CSV text.
#[pyfunction]
#[pyo3(signature = (params, axis, observable = "log_negativity", axis2 = None, workers = None))]
fn sweep(
    params: &PyParams,
    axis: &str,
    observable: &str,
    axis2: Option<&str>,
    workers: Option<usize>,
) -> PyResult<String> {
    let spec = SweepSpec {
        axis1: axis.parse::<Axis>().map_err(to_py)?,
        axis2: axis2.map(str::parse::<Axis>).transpose().map_err(to_py)?,
        observable: observable.parse::<Observable>().map_err(to_py)?,
        preset: None,
    };
    let r = core::run_sweep(&spec, &params.inner, resolve_workers(workers)).map_err(to_py)?;
    r.to_csv_string().map_err(to_py)
}

/// Run a figure preset. Writes files when `out` is given; returns
/// {file name: CSV text} plus the manifest under "manifest.json".
#[pyfunction]
#[pyo3(signature = (preset, out = None, workers = None))]
fn figure<'py>(
    py: Python<'py>,
    preset: &str,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let fig = figures::figure(preset, resolve_workers(workers)).map_err(to_py)?;
    if let Some(dir) = out {
        fig.write(&dir).map_err(to_py)?;
    }
    let mut files = serde_json::Map::new();
    for c in &fig.curves {
        files.insert(c.file.clone(), c.csv.clone().into());
    }
    files.insert("manifest.json".into(), fig.manifest.clone());
    json_obj(py, &files)
}

#[pymodule]
fn optomech(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyBlock>()?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(output_cm, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(log_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(duan_sum, m)?)?;
    m.add_function(wrap_pyfunction!(rate_om, m)?)?;
    m.add_function(wrap_pyfunction!(capacities, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    Ok(())
}
