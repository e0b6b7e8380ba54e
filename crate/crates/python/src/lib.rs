//! Python bindings. Sets and weights are passed as preset names or inline JSON,
//! exactly as on the command line; exact rationals come back as `"p/q"` strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hypodense::cli::args::Command;
use hypodense::cli::{default_emit, dispatch, load_config, parse_cli};
use hypodense::densities::{self, IndexSet, WeightSeq};
use hypodense::exactnum::{format_rational, parse_rational, Rational};
use hypodense::weightforge;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn set_and_weight(set: &str, weight: &str) -> PyResult<(IndexSet, WeightSeq)> {
    Ok((IndexSet::from_spec(set).map_err(value_err)?, WeightSeq::from_spec(weight).map_err(value_err)?))
}

fn rational(s: &str) -> PyResult<Rational> {
    parse_rational(s).map_err(value_err)
}

/// Exact weighted density quotient `Q_N(E)` as `"p/q"`.
#[pyfunction]
fn density_quotient(set: &str, weight: &str, n: u64) -> PyResult<String> {
    let (s, w) = set_and_weight(set, weight)?;
    densities::density_quotient(&s, &w, n).map(|q| format_rational(&q)).map_err(value_err)
}

/// Whether `Q_N(E) + Q_N(complement of E) = 1` holds exactly.
#[pyfunction]
fn duality_check(set: &str, weight: &str, n: u64) -> PyResult<bool> {
    let (s, w) = set_and_weight(set, weight)?;
    densities::duality_check(&s, &w, n).map_err(value_err)
}

/// Lower and upper estimates over the tail window `[tail * horizon, horizon]`.
#[pyfunction]
#[pyo3(signature = (set, weight, horizon, tail = "1/2"))]
fn estimate_densities<'py>(
    py: Python<'py>,
    set: &str,
    weight: &str,
    horizon: u64,
    tail: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let (s, w) = set_and_weight(set, weight)?;
    let tail = rational(tail)?;
    let r = densities::estimate_densities(&s, &w, horizon, &tail).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("lower", format_rational(&r.lower_estimate))?;
    d.set_item("upper", format_rational(&r.upper_estimate))?;
    d.set_item("lower_float", r.lower_estimate.to_f64())?;
    d.set_item("upper_float", r.upper_estimate.to_f64())?;
    d.set_item("checkpoints", r.checkpoints.clone())?;
    Ok(d)
}

/// `[alpha_1, ..., alpha_n_max]` for a weight; fails when some value exceeds `cap`.
#[pyfunction]
#[pyo3(signature = (weight, n_max, cap = 1 << 24))]
fn alpha_sequence(weight: &str, n_max: u64, cap: u64) -> PyResult<Vec<u64>> {
    let w = WeightSeq::from_spec(weight).map_err(value_err)?;
    weightforge::alpha_sequence(&w, n_max, cap).map(|s| s.values).map_err(value_err)
}

/// Runs a subcommand given its arguments without the program name and returns
/// `(pass, body, summary)`. `--out` is ignored; the body is always returned.
#[pyfunction]
fn run(py: Python<'_>, args: Vec<String>) -> PyResult<(bool, String, String)> {
    let cli = parse_cli(std::iter::once("hypodense".to_string()).chain(args)).map_err(value_err)?;
    let (command, emit) = match cli.command {
        Command::Run(r) => {
            let cfg = load_config(&r.config).map_err(value_err)?;
            (cfg.experiment, cli.emit.or(cfg.emit))
        }
        c => (c, cli.emit),
    };
    let emit = emit.unwrap_or_else(|| default_emit(&command));
    let outcome = py.detach(|| dispatch(&command, emit)).map_err(value_err)?;
    Ok((outcome.pass, outcome.body, outcome.summary))
}

#[pymodule]
fn hypodense_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(density_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(duality_check, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_densities, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
