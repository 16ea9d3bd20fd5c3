//! Python bindings: circuits, device models, the compile pipeline, and the
//! noise simulator, mirroring the CLI surface.

// The pymethods expansion trips useless_conversion on PyResult returns.
#![allow(clippy::useless_conversion)]

use std::collections::HashMap;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mera_core::bench::{gen_benchmark, BenchmarkSpec};
use mera_core::circuit::{count_swaps, critical_path_length, mcm_intensity, Circuit};
use mera_core::device::{synth_error_map, DeviceModel, Preset, SynthProfile};
use mera_core::pipeline::{compile as compile_rs, CompileOptions, DdChoice, LayoutChoice};
use mera_core::routing::RoutingPolicy;
use mera_core::sim::{
    hellinger_to_ideal, ideal_distribution, run, run_scheduled_with_options, NoiseChannelSet,
    ShotCounts, SimOptions,
};

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// Gate-level circuit with mid-circuit measurement support.
#[pyclass(name = "Circuit")]
#[derive(Clone)]
struct PyCircuit {
    inner: Circuit,
}

#[pymethods]
impl PyCircuit {
    /// Parse the supported OpenQASM subset.
    #[staticmethod]
    fn from_qasm(text: &str) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: mera_core::qasm::parse(text).map_err(value_error)?,
        })
    }

    /// Generate a named benchmark, e.g. "rus:4" or "bv:4-2".
    #[staticmethod]
    fn benchmark(spec: &str) -> PyResult<Self> {
        let spec = BenchmarkSpec::parse(spec).map_err(value_error)?;
        Ok(PyCircuit {
            inner: gen_benchmark(&spec).map_err(value_error)?,
        })
    }

    fn to_qasm(&self) -> String {
        mera_core::qasm::emit(&self.inner)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits
    }

    #[getter]
    fn num_clbits(&self) -> usize {
        self.inner.num_clbits
    }

    fn __len__(&self) -> usize {
        self.inner.instructions.len()
    }

    fn mcm_intensity(&self) -> Vec<usize> {
        mcm_intensity(&self.inner).0
    }

    fn critical_path(&self) -> usize {
        critical_path_length(&self.inner)
    }

    fn count_swaps(&self) -> usize {
        count_swaps(&self.inner)
    }

    /// Exact noiseless outcome distribution over classical bits.
    fn ideal_distribution(&self) -> PyResult<HashMap<String, f64>> {
        Ok(ideal_distribution(&self.inner)
            .map_err(value_error)?
            .into_iter()
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(qubits={}, clbits={}, instructions={})",
            self.inner.num_qubits,
            self.inner.num_clbits,
            self.inner.instructions.len()
        )
    }
}

/// Coupling topology plus calibration data.
#[pyclass(name = "Device")]
#[derive(Clone)]
struct PyDevice {
    inner: DeviceModel,
}

#[pymethods]
impl PyDevice {
    /// Build a preset topology ("eagle127", "small-hex", "line:N",
    /// "grid:RxC") with a synthetic error map: profile is "eagle", "heron",
    /// or "zero".
    #[staticmethod]
    #[pyo3(signature = (preset, profile = "zero", seed = 1))]
    fn preset(preset: &str, profile: &str, seed: u64) -> PyResult<Self> {
        let preset = Preset::from_str(preset).map_err(value_error)?;
        let profile = match profile {
            "eagle" => SynthProfile::eagle(),
            "heron" => SynthProfile::heron(),
            "zero" => SynthProfile::zero(),
            other => return Err(value_error(format!("unknown profile '{other}'"))),
        };
        Ok(PyDevice {
            inner: synth_error_map(preset, seed, &profile).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyDevice {
            inner: DeviceModel::load(path).map_err(value_error)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(value_error)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges.clone()
    }

    fn mcm_errors(&self) -> Vec<f64> {
        self.inner.qubits.iter().map(|q| q.mcm_error).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Device(name={:?}, qubits={}, edges={})",
            self.inner.name,
            self.inner.num_qubits,
            self.inner.edges.len()
        )
    }
}

/// Routed circuit, placement, and schedule produced by one compile run.
#[pyclass(name = "CompileResult")]
struct PyCompileResult {
    #[pyo3(get)]
    swap_count: usize,
    #[pyo3(get)]
    critical_path: usize,
    #[pyo3(get)]
    compile_seconds: f64,
    #[pyo3(get)]
    initial_layout: Vec<Option<usize>>,
    routed: Circuit,
    schedule: mera_core::schedule::Schedule,
    device: DeviceModel,
}

#[pymethods]
impl PyCompileResult {
    fn routed_qasm(&self) -> String {
        mera_core::qasm::emit(&self.routed)
    }

    fn routed_circuit(&self) -> PyCircuit {
        PyCircuit {
            inner: self.routed.clone(),
        }
    }

    fn schedule_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.schedule).map_err(value_error)
    }

    #[getter]
    fn total_duration(&self) -> u64 {
        self.schedule.total_duration
    }

    /// Simulate the scheduled circuit with channels derived from the device.
    #[pyo3(signature = (shots = 1024, seed = 7, max_qubits = 20))]
    fn simulate(&self, shots: u64, seed: u64, max_qubits: usize) -> PyResult<HashMap<String, u64>> {
        let channels = NoiseChannelSet::from_device(&self.device);
        let result = run_scheduled_with_options(
            &self.schedule,
            &self.device,
            &channels,
            shots,
            seed,
            SimOptions { max_qubits },
        )
        .map_err(value_error)?;
        Ok(result.counts.counts.into_iter().collect())
    }
}

/// Compile a circuit: layout ("mera" | "trivial" | "worst"), routing
/// ("mera" | "distance-only"), dd ("cadd" | "none").
#[pyfunction]
#[pyo3(signature = (circuit, device, layout = "mera", routing = "mera", dd = "cadd"))]
fn compile(
    circuit: &PyCircuit,
    device: &PyDevice,
    layout: &str,
    routing: &str,
    dd: &str,
) -> PyResult<PyCompileResult> {
    let mut options = CompileOptions {
        layout: LayoutChoice::from_str(layout).map_err(value_error)?,
        dd: DdChoice::from_str(dd).map_err(value_error)?,
        ..CompileOptions::default()
    };
    options.routing.policy = match routing {
        "mera" => RoutingPolicy::Mera,
        "distance-only" => RoutingPolicy::DistanceOnly,
        other => return Err(value_error(format!("unknown routing '{other}'"))),
    };
    let result = compile_rs(&circuit.inner, &device.inner, &options).map_err(value_error)?;
    Ok(PyCompileResult {
        swap_count: result.swap_count,
        critical_path: result.critical_path,
        compile_seconds: result.compile_seconds,
        initial_layout: result.initial_layout.logical_to_physical().to_vec(),
        routed: result.routed,
        schedule: result.schedule,
        device: device.inner.clone(),
    })
}

/// Simulate a bare circuit (no schedule-derived idle noise).
#[pyfunction]
#[pyo3(signature = (circuit, device, shots = 1024, seed = 7))]
fn simulate(
    circuit: &PyCircuit,
    device: &PyDevice,
    shots: u64,
    seed: u64,
) -> PyResult<HashMap<String, u64>> {
    let channels = NoiseChannelSet::from_device(&device.inner);
    let result = run(&circuit.inner, &device.inner, &channels, shots, seed).map_err(value_error)?;
    Ok(result.counts.counts.into_iter().collect())
}

/// Hellinger fidelity between two histograms (counts or probabilities).
#[pyfunction]
fn hellinger_fidelity(a: HashMap<String, f64>, b: HashMap<String, f64>) -> PyResult<f64> {
    let total = |m: &HashMap<String, f64>| m.values().sum::<f64>();
    let (ta, tb) = (total(&a), total(&b));
    if ta <= 0.0 || tb <= 0.0 {
        return Err(value_error("empty histogram"));
    }
    let mut sum = 0.0;
    for (k, va) in &a {
        if let Some(vb) = b.get(k) {
            sum += (va / ta * vb / tb).sqrt();
        }
    }
    Ok(sum * sum)
}

/// Fidelity of measured counts against a circuit's ideal distribution.
#[pyfunction]
fn fidelity_to_ideal(counts: HashMap<String, u64>, circuit: &PyCircuit) -> PyResult<f64> {
    let ideal = ideal_distribution(&circuit.inner).map_err(value_error)?;
    let shots = counts.values().sum();
    let counts = ShotCounts {
        counts: counts.into_iter().collect(),
        shots,
        seed: 0,
    };
    hellinger_to_ideal(&counts, &ideal).map_err(value_error)
}

/// Estimate per-qubit MCM errors with the X / measure / reset / measure probe.
#[pyfunction]
#[pyo3(signature = (device, shots = 1024, seed = 7))]
fn profile(device: &PyDevice, shots: u64, seed: u64) -> PyResult<Vec<(usize, f64)>> {
    let channels = NoiseChannelSet::from_device(&device.inner);
    let report = mera_core::profiler::profile_device(&device.inner, &channels, shots, seed)
        .map_err(value_error)?;
    Ok(report.estimates)
}

#[pymodule]
fn mera_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyDevice>()?;
    m.add_class::<PyCompileResult>()?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_to_ideal, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    Ok(())
}
