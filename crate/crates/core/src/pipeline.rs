//! End-to-end compilation: layout choice, routing, ALAP scheduling, and
//! optional DD insertion, with the adjacency check asserted on every run.

use std::time::Instant;

use thiserror::Error;

use crate::bench::worst_mapping;
use crate::circuit::{count_swaps, critical_path_length, Circuit, CircuitError};
use crate::device::{normalize_mcm, DeviceModel};
use crate::layout::{select_layout, Layout, LayoutError, LayoutWeights, SeedWeights};
use crate::routing::{route, validate_routed, RoutingConfig, RoutingError};
use crate::schedule::{alap_schedule, cadd_insert, CaddConfig, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutChoice {
    Mera,
    Trivial,
    Worst,
}

impl std::str::FromStr for LayoutChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mera" => Ok(LayoutChoice::Mera),
            "trivial" => Ok(LayoutChoice::Trivial),
            "worst" => Ok(LayoutChoice::Worst),
            other => Err(format!(
                "unknown layout '{other}' (expected mera|trivial|worst)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdChoice {
    Cadd,
    None,
}

impl std::str::FromStr for DdChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cadd" => Ok(DdChoice::Cadd),
            "none" => Ok(DdChoice::None),
            other => Err(format!("unknown dd mode '{other}' (expected cadd|none)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub layout: LayoutChoice,
    pub seed_weights: SeedWeights,
    pub layout_weights: LayoutWeights,
    pub routing: RoutingConfig,
    pub dd: DdChoice,
    pub cadd: CaddConfig,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            layout: LayoutChoice::Mera,
            seed_weights: SeedWeights::default(),
            layout_weights: LayoutWeights::default(),
            routing: RoutingConfig::default(),
            dd: DdChoice::Cadd,
            cadd: CaddConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("circuit is malformed: {0}")]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("post-routing adjacency check failed: {0}")]
    Adjacency(String),
    #[error("schedule validation failed: {0}")]
    Schedule(String),
}

#[derive(Debug, Clone)]
pub struct CompileResult {
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub routed: Circuit,
    pub schedule: Schedule,
    pub swap_count: usize,
    pub critical_path: usize,
    pub compile_seconds: f64,
}

/// Compile a logical circuit for a device: place, route, schedule, decouple.
pub fn compile(
    circuit: &Circuit,
    device: &DeviceModel,
    options: &CompileOptions,
) -> Result<CompileResult, PipelineError> {
    let start = Instant::now();
    circuit.validate()?;
    let normalized = normalize_mcm(device, options.layout_weights.tau_mcm);

    let initial_layout = match options.layout {
        LayoutChoice::Mera => select_layout(
            circuit,
            device,
            &options.seed_weights,
            &options.layout_weights,
        )?,
        LayoutChoice::Trivial => {
            if circuit.num_qubits > device.num_qubits {
                return Err(LayoutError::DeviceTooSmall {
                    logical: circuit.num_qubits,
                    physical: device.num_qubits,
                }
                .into());
            }
            Layout::trivial(circuit.num_qubits, device.num_qubits)
        }
        LayoutChoice::Worst => worst_mapping(circuit, device)?,
    };

    // The router's MCM tie-break reads the normalized error map.
    let (routed, final_layout) = route(circuit, &initial_layout, &normalized, &options.routing)?;
    validate_routed(&routed, device).map_err(PipelineError::Adjacency)?;

    let swap_count = count_swaps(&routed);
    let critical_path = critical_path_length(&routed);

    let schedule = alap_schedule(&routed, device);
    let schedule = match options.dd {
        DdChoice::Cadd => cadd_insert(&schedule, device, &options.cadd),
        DdChoice::None => schedule,
    };
    schedule.validate().map_err(PipelineError::Schedule)?;

    Ok(CompileResult {
        initial_layout,
        final_layout,
        routed,
        schedule,
        swap_count,
        critical_path,
        compile_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Convenience wrapper: compile and return the scheduled circuit.
pub fn compile_to_schedule(
    circuit: &Circuit,
    device: &DeviceModel,
    options: &CompileOptions,
) -> Result<Schedule, PipelineError> {
    compile(circuit, device, options).map(|r| r.schedule)
}
