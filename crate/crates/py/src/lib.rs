//! Python bindings. Structured results come back as plain dicts built from
//! the same JSON the CLI writes.

use dmcic::channel::fixtures;
use dmcic::{ChannelFamily, ConditionId, RegimeCondition, RegionId};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: dmcic::Error) -> PyErr {
    match e {
        dmcic::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Channel", frozen)]
struct PyChannel(dmcic::Channel);

#[pymethods]
impl PyChannel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        dmcic::Channel::load(path).map(PyChannel).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        dmcic::Channel::from_json(text).map(PyChannel).map_err(err)
    }

    /// A canned family, e.g. `Channel.family("degraded_cognitive", [0.1, 0.2])`.
    /// Also accepts the fixtures `noiseless_pair`, `noiseless_product` and
    /// `zero_capacity`.
    #[staticmethod]
    #[pyo3(signature = (name, params=Vec::new(), seed=None))]
    fn family(name: &str, params: Vec<f64>, seed: Option<u64>) -> PyResult<Self> {
        let fixed = match name {
            "noiseless_pair" => Some(fixtures::noiseless_pair()),
            "noiseless_product" => Some(fixtures::noiseless_product()),
            "zero_capacity" => Some(fixtures::zero_capacity()),
            _ => None,
        };
        if let Some(ch) = fixed {
            return Ok(PyChannel(ch));
        }
        let args: Vec<String> = params.iter().map(|p| p.to_string()).collect();
        let fam = ChannelFamily::parse(name, &args, seed).map_err(err)?;
        fam.build().map(PyChannel).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (seed, sizes=(2, 2, 2, 2)))]
    fn random(seed: u64, sizes: (usize, usize, usize, usize)) -> PyResult<Self> {
        dmcic::random_channel(seed, [sizes.0, sizes.1, sizes.2, sizes.3]).map(PyChannel).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(err)
    }

    /// `(x1_card, x2_card, y1_card, y2_card)`.
    #[getter]
    fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.0.x1_card(), self.0.x2_card(), self.0.y1_card(), self.0.y2_card())
    }

    fn prob(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> PyResult<f64> {
        let (a, b, c, d) = self.sizes();
        if x1 >= a || x2 >= b || y1 >= c || y2 >= d {
            return Err(PyValueError::new_err("symbol out of range"));
        }
        Ok(self.0.prob(x1, x2, y1, y2))
    }

    fn __repr__(&self) -> String {
        let (a, b, c, d) = self.sizes();
        format!("Channel(x1={a}, x2={b}, y1={c}, y2={d})")
    }
}

#[pyclass(name = "Budget", frozen)]
struct PyBudget(dmcic::Budget);

#[pymethods]
impl PyBudget {
    #[new]
    #[pyo3(signature = (*, restarts=32, grid_res=8, max_iters=200, aux_card=4, seed=0))]
    fn new(restarts: usize, grid_res: usize, max_iters: usize, aux_card: usize, seed: u64) -> PyResult<Self> {
        let b = dmcic::Budget { restarts, grid_res, max_iters, aux_card, seed, ..dmcic::Budget::default() };
        b.validate().map_err(err)?;
        Ok(PyBudget(b))
    }

    fn __repr__(&self) -> String {
        let b = &self.0;
        format!(
            "Budget(restarts={}, grid_res={}, max_iters={}, aux_card={}, seed={})",
            b.restarts, b.grid_res, b.max_iters, b.aux_card, b.seed
        )
    }
}

fn budget(b: Option<PyRef<'_, PyBudget>>) -> dmcic::Budget {
    b.map(|b| b.0).unwrap_or_default()
}

fn parse<T: std::str::FromStr<Err = dmcic::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

#[pyfunction]
#[pyo3(signature = (channel, budget=None))]
fn classify<'py>(py: Python<'py>, channel: &PyChannel, budget: Option<PyRef<'py, PyBudget>>) -> PyResult<Bound<'py, PyAny>> {
    let b = self::budget(budget);
    let profile = py.detach(|| dmcic::classify(&channel.0, &b)).map_err(err)?;
    to_py(py, &profile)
}

#[pyfunction]
#[pyo3(signature = (channel, condition, budget=None))]
fn check_condition<'py>(
    py: Python<'py>,
    channel: &PyChannel,
    condition: &str,
    budget: Option<PyRef<'py, PyBudget>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cond = RegimeCondition::new(parse::<ConditionId>(condition)?);
    let b = self::budget(budget);
    let report = py.detach(|| dmcic::check_condition(&channel.0, &cond, &b)).map_err(err)?;
    to_py(py, &report)
}

/// Dict with `id`, `vertices`, `area`, `csv` and the per-direction `support`.
#[pyfunction]
#[pyo3(signature = (channel, region, angles=dmcic::DEFAULT_ANGLES, budget=None))]
fn compute_region<'py>(
    py: Python<'py>,
    channel: &PyChannel,
    region: &str,
    angles: usize,
    budget: Option<PyRef<'py, PyBudget>>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = parse::<RegionId>(region)?.spec();
    let b = self::budget(budget);
    let r = py.detach(|| dmcic::compute_region(&channel.0, &spec, angles, &b)).map_err(err)?;
    let out = to_py(py, &r)?;
    out.set_item("vertices", r.region.vertices().to_vec())?;
    out.set_item("area", r.region.area())?;
    out.set_item("csv", r.to_csv())?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (channel, region, weights, budget=None))]
fn weighted_sum_max<'py>(
    py: Python<'py>,
    channel: &PyChannel,
    region: &str,
    weights: (f64, f64),
    budget: Option<PyRef<'py, PyBudget>>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = parse::<RegionId>(region)?.spec();
    let b = self::budget(budget);
    let s = py
        .detach(|| dmcic::weighted_sum_max(&channel.0, &spec, [weights.0, weights.1], &b))
        .map_err(err)?;
    to_py(py, &s)
}

fn region(vertices: Vec<[f64; 2]>) -> PyResult<dmcic::RateRegion> {
    dmcic::RateRegion::from_boundary(vertices).map_err(err)
}

/// Hausdorff distance between two boundary vertex lists.
#[pyfunction]
fn hausdorff(a: Vec<[f64; 2]>, b: Vec<[f64; 2]>) -> PyResult<f64> {
    Ok(dmcic::hausdorff(&region(a)?, &region(b)?))
}

/// `(a ⊆ b within tol, worst violation)`.
#[pyfunction]
#[pyo3(signature = (a, b, tol=dmcic::TOL_REGION))]
fn region_subset(a: Vec<[f64; 2]>, b: Vec<[f64; 2]>, tol: f64) -> PyResult<(bool, f64)> {
    Ok(dmcic::region_subset(&region(a)?, &region(b)?, tol))
}

#[pymodule]
fn dmcic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add_class::<PyBudget>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(check_condition, m)?)?;
    m.add_function(wrap_pyfunction!(compute_region, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_sum_max, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff, m)?)?;
    m.add_function(wrap_pyfunction!(region_subset, m)?)?;
    m.add("TOL_CLASSIFY", dmcic::TOL_CLASSIFY)?;
    m.add("TOL_REGION", dmcic::TOL_REGION)?;
    m.add("CONDITIONS", ConditionId::ALL.iter().map(|c| c.as_str()).collect::<Vec<_>>())?;
    m.add("REGIONS", RegionId::ALL.iter().map(|r| r.as_str()).collect::<Vec<_>>())?;
    Ok(())
}
