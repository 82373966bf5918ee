//! Python module `surfcat`: layouts, campaigns, thresholds and the matching
//! decoder. Structured results cross the boundary as Python dicts built from
//! the same JSON the command-line tool writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;
use surfcat::cycle::SyndromeFixture;
use surfcat::decoder::{min_weight_boundary_matching, DecodeMode, Decoder, DecoderWeights, Partner};
use surfcat::experiment::{
    self, config_hash, CampaignMetadata, ExperimentConfig, FrequencyChoice, ThresholdEstimate,
};
use surfcat::layout::{CodeLayout, Variant};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_err)?;
    let json = PyModule::import(py, "json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

fn parse_variant(s: &str) -> PyResult<Variant> {
    s.parse().map_err(value_err)
}

fn parse_frequency(s: &str) -> PyResult<FrequencyChoice> {
    match s {
        "auto" => Ok(FrequencyChoice::Auto),
        "x-only" | "x_only" => Ok(FrequencyChoice::XOnly),
        n => n.parse().map(FrequencyChoice::Fixed).map_err(value_err),
    }
}

/// Planar code geometry for one variant and size.
#[pyclass(name = "Layout", frozen)]
struct PyLayout {
    inner: CodeLayout,
}

#[pymethods]
impl PyLayout {
    #[new]
    fn new(variant: &str, n: usize) -> PyResult<Self> {
        let inner = CodeLayout::build(parse_variant(variant)?, n).map_err(value_err)?;
        Ok(PyLayout { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.variant.to_string()
    }

    fn num_blocks(&self) -> usize {
        self.inner.num_blocks()
    }

    /// Physical data qubits: one per block, two in the concatenated code.
    fn num_data_qubits(&self) -> usize {
        self.inner.num_data_qubits()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Layout('{}', {})", self.inner.variant, self.inner.n)
    }
}

/// A Monte-Carlo campaign over sizes and global error rates.
#[pyclass(name = "Campaign")]
struct PyCampaign {
    config: ExperimentConfig,
}

#[pymethods]
impl PyCampaign {
    #[new]
    #[pyo3(signature = (variant, sizes, p_global, ratio=1.0, f_depo=0.0, frequency="auto", trials=1000, seed=0, mode=None, rounds=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        variant: &str,
        sizes: Vec<usize>,
        p_global: Vec<f64>,
        ratio: f64,
        f_depo: f64,
        frequency: &str,
        trials: u64,
        seed: u64,
        mode: Option<&str>,
        rounds: Option<usize>,
    ) -> PyResult<Self> {
        let mut config = ExperimentConfig::new(parse_variant(variant)?, sizes, p_global);
        config.ratio = ratio;
        config.relative_strength = f_depo;
        config.frequency = parse_frequency(frequency)?;
        config.trials = trials;
        config.seed = seed;
        config.mode = mode.map(str::parse::<DecodeMode>).transpose().map_err(value_err)?;
        config.rounds = rounds;
        config.validate().map_err(value_err)?;
        Ok(PyCampaign { config })
    }

    #[getter]
    fn config_hash(&self) -> String {
        config_hash(&self.config)
    }

    fn config(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.config)
    }

    /// Runs every point and returns the campaign metadata, threshold included
    /// when `bootstrap` is given and there are at least two sizes.
    #[pyo3(signature = (bootstrap=None))]
    fn run(&self, py: Python<'_>, bootstrap: Option<usize>) -> PyResult<Py<PyAny>> {
        let config = self.config.clone();
        let meta = py
            .detach(move || {
                let est = experiment::run_campaign(&config)?;
                let threshold: Option<ThresholdEstimate> = bootstrap
                    .filter(|_| config.sizes.len() >= 2)
                    .map(|b| experiment::threshold_from(&config, &est, b));
                Ok::<_, experiment::ExperimentError>(CampaignMetadata::new(&config, &est, threshold))
            })
            .map_err(runtime_err)?;
        to_py(py, &meta)
    }

    /// Records and decodes one trial of the point `(n, p_global)`.
    fn replay(&self, py: Python<'_>, n: usize, p_global: f64, trial: u64) -> PyResult<Py<PyAny>> {
        let point = self.config.point(n, p_global);
        let ctx = experiment::TrialContext::new(point).map_err(value_err)?;
        let mut decoder = ctx.decoder();
        let outcome = ctx.run_trial(&mut decoder, trial).map_err(runtime_err)?;
        to_py(py, &outcome)
    }
}

/// Minimum-weight matching where each event may pair with another event or
/// with its own boundary copy. `pair` is a square matrix with `None` for
/// forbidden pairs; returns the partner list (`-1` for the boundary) and total.
#[pyfunction]
fn match_events(pair: Vec<Vec<Option<i64>>>, boundary: Vec<Option<i64>>) -> PyResult<(Vec<i64>, i64)> {
    let m = boundary.len();
    if pair.len() != m || pair.iter().any(|r| r.len() != m) {
        return Err(value_err("pair must be a square matrix matching the boundary length"));
    }
    let flat: Vec<Option<i64>> = pair.into_iter().flatten().collect();
    let result = min_weight_boundary_matching(&flat, &boundary).map_err(value_err)?;
    let partners = result
        .partner
        .iter()
        .map(|p| match p {
            Partner::Event(j) => *j as i64,
            Partner::Boundary => -1,
        })
        .collect();
    Ok((partners, result.total))
}

/// Decodes a syndrome fixture (as written by `surfcat fixture-dump`).
#[pyfunction]
#[pyo3(signature = (fixture_json, mode="risk_list", ratio=1.0))]
fn decode_fixture(py: Python<'_>, fixture_json: &str, mode: &str, ratio: f64) -> PyResult<Py<PyAny>> {
    let fixture = SyndromeFixture::from_json(fixture_json).map_err(value_err)?;
    let mode: DecodeMode = mode.parse().map_err(value_err)?;
    let layout = CodeLayout::build(fixture.variant, fixture.n).map_err(value_err)?;
    let list = match (mode, &fixture.truth_phase_changes) {
        (DecodeMode::Wizard, Some(t)) => ::surfcat::cycle::RiskList {
            entries: t.iter().copied().collect(),
        },
        _ => fixture.risk(),
    };
    let weights = DecoderWeights::for_ratio(1.0 / ratio, fixture.n);
    let result = Decoder::new(&layout)
        .decode(&fixture.record, &list, &weights, mode)
        .map_err(runtime_err)?;
    let value: serde_json::Value = serde_json::from_str(&result.to_json()).map_err(runtime_err)?;
    to_py(py, &value)
}

/// Injects every single fault at every location and decodes each run.
#[pyfunction]
#[pyo3(signature = (variant, n, mode="risk_list", frequency=1))]
fn single_fault_sweep(py: Python<'_>, variant: &str, n: usize, mode: &str, frequency: usize) -> PyResult<Py<PyAny>> {
    use surfcat::cycle::{CheckFrequency, CorrectionQubit};
    let mode: DecodeMode = mode.parse().map_err(value_err)?;
    let freq = if frequency == 0 {
        CheckFrequency::XOnly
    } else {
        CheckFrequency::Ratio(frequency)
    };
    let report = experiment::single_fault_sweep(parse_variant(variant)?, n, mode, freq, CorrectionQubit::Second)
        .map_err(runtime_err)?;
    to_py(py, &report)
}

/// Expected Z-type over X-type fault count per cycle of the plain code.
#[pyfunction]
#[pyo3(signature = (f_depo, frequency, n=20))]
fn fault_ratio(f_depo: f64, frequency: usize, n: usize) -> PyResult<f64> {
    Ok(experiment::fault_ratio(f_depo, frequency, n).map_err(value_err)?.ratio())
}

#[pymodule]
#[pyo3(name = "surfcat")]
fn surfcat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLayout>()?;
    m.add_class::<PyCampaign>()?;
    m.add_function(wrap_pyfunction!(match_events, m)?)?;
    m.add_function(wrap_pyfunction!(decode_fixture, m)?)?;
    m.add_function(wrap_pyfunction!(single_fault_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fault_ratio, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
