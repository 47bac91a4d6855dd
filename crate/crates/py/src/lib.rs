//! Python bindings: generate markets, run mechanisms on them, compare and
//! verify. Settings are passed as the same TOML text the CLI reads.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use chainda_core::baselines::offline;
use chainda_core::chain;
use chainda_core::market::{AgentType, RandomSource, Side};
use chainda_core::sim::{self, Mechanism, SimConfig};
use chainda_core::verify;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(text: Option<&str>) -> PyResult<SimConfig> {
    match text {
        Some(t) => SimConfig::parse(t).map_err(err),
        None => Ok(SimConfig::default()),
    }
}

/// One trader: side, presence window and value (negative for sellers).
#[pyclass(name = "Agent", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyAgent(AgentType);

#[pymethods]
impl PyAgent {
    #[new]
    fn new(id: u32, side: &str, arrival: u32, departure: u32, value: f64) -> PyResult<PyAgent> {
        let a = match side {
            "buyer" => AgentType::buyer(id, arrival, departure, value),
            "seller" => AgentType::seller(id, arrival, departure, value),
            other => return Err(err(format!("side must be 'buyer' or 'seller', got {other:?}"))),
        };
        Ok(PyAgent(a))
    }

    #[getter]
    fn id(&self) -> u32 {
        self.0.id.0
    }

    #[getter]
    fn side(&self) -> &'static str {
        self.0.side.as_str()
    }

    #[getter]
    fn arrival(&self) -> u32 {
        self.0.arrival
    }

    #[getter]
    fn departure(&self) -> u32 {
        self.0.departure
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    fn __repr__(&self) -> String {
        let a = &self.0;
        format!("Agent({}, {:?}, {}, {}, {})", a.id.0, a.side.as_str(), a.arrival, a.departure, a.value)
    }
}

fn agents(schedule: &[PyAgent]) -> Vec<AgentType> {
    schedule.iter().map(|a| a.0).collect()
}

fn mechanism(cfg: &SimConfig, name: &str) -> PyResult<Mechanism> {
    Ok(sim::mechanisms(cfg, &[name]).map_err(err)?.remove(0))
}

/// Names accepted wherever a mechanism is expected.
#[pyfunction]
fn mechanism_names() -> Vec<&'static str> {
    sim::mechanism::mechanism_names().collect()
}

/// Market `trial` of the run seeded with `seed`.
#[pyfunction]
#[pyo3(signature = (seed = 0, trial = 0, config = None))]
fn generate_schedule(seed: u64, trial: u64, config: Option<&str>) -> PyResult<Vec<PyAgent>> {
    let cfg = self::config(config)?;
    let schedule = sim::generate_schedule(&cfg.env, &RandomSource::new(seed).with_trial(trial)).map_err(err)?;
    Ok(schedule.into_iter().map(PyAgent).collect())
}

/// Run a dynamic mechanism and return one dict per offer.
#[pyfunction]
#[pyo3(signature = (mechanism, schedule, seed = 0, config = None))]
fn run_chain<'py>(
    py: Python<'py>,
    mechanism: &str,
    schedule: Vec<PyAgent>,
    seed: u64,
    config: Option<&str>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = self::config(config)?;
    let Mechanism::Chain(chain_cfg) = self::mechanism(&cfg, mechanism)? else {
        return Err(err(format!("{mechanism:?} is not a chain rule")));
    };
    let out = chain::run(&chain_cfg, &agents(&schedule), &RandomSource::new(seed)).map_err(err)?;
    out.offers
        .values()
        .map(|o| {
            let d = PyDict::new(py);
            d.set_item("id", o.report.id.0)?;
            d.set_item("side", o.report.side.as_str())?;
            d.set_item("state", o.state.as_str())?;
            d.set_item("admission_price", o.admission_price)?;
            d.set_item("payment", o.payment)?;
            d.set_item("match_period", o.match_period)?;
            Ok(d)
        })
        .collect()
}

/// Total surplus of the best matching of overlapping buyers and sellers.
#[pyfunction]
fn offline_optimum(schedule: Vec<PyAgent>) -> f64 {
    offline::optimum(&agents(&schedule)).0
}

/// Run several mechanisms on the same markets; one dict per (trial, mechanism).
#[pyfunction]
#[pyo3(signature = (mechanisms, trials = None, seed = 0, config = None))]
fn compare<'py>(
    py: Python<'py>,
    mechanisms: Vec<String>,
    trials: Option<usize>,
    seed: u64,
    config: Option<&str>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = self::config(config)?;
    let names: Vec<&str> = mechanisms.iter().map(String::as_str).collect();
    let mechs = sim::mechanisms(&cfg, &names).map_err(err)?;
    let env = cfg.env.clone();
    let n = trials.unwrap_or(cfg.trials);
    let rows = py.detach(|| sim::compare(&env, &mechs, n, seed)).map_err(err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("trial", r.trial)?;
            d.set_item("mechanism", r.mechanism)?;
            d.set_item("alloc_eff", r.alloc_eff)?;
            d.set_item("net_eff", r.net_eff)?;
            d.set_item("revenue", r.revenue)?;
            d.set_item("n_trades", r.n_trades)?;
            d.set_item("opt_value", r.opt_value)?;
            Ok(d)
        })
        .collect()
}

/// Property checks for one mechanism: (property, passed, cases, violations).
#[pyfunction]
#[pyo3(signature = (mechanism, schedules = 20, seed = 0, config = None))]
fn verify_mechanism(
    py: Python<'_>,
    mechanism: &str,
    schedules: usize,
    seed: u64,
    config: Option<&str>,
) -> PyResult<Vec<(String, bool, usize, usize)>> {
    let cfg = self::config(config)?;
    let mech = self::mechanism(&cfg, mechanism)?;
    let env = cfg.env.clone();
    let results = py.detach(|| verify::verify_mechanism(&mech, &env, schedules, seed)).map_err(err)?;
    Ok(results.into_iter().map(|r| (r.property.clone(), r.passed(), r.cases, r.violations)).collect())
}

#[pymodule]
fn chainda(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAgent>()?;
    m.add_function(wrap_pyfunction!(mechanism_names, m)?)?;
    m.add_function(wrap_pyfunction!(generate_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(run_chain, m)?)?;
    m.add_function(wrap_pyfunction!(offline_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(verify_mechanism, m)?)?;
    m.add("BUYER", Side::Buyer.as_str())?;
    m.add("SELLER", Side::Seller.as_str())?;
    Ok(())
}
