//! MCM-error-aware transpilation for dynamic quantum circuits.
//!
//! The pipeline profiles per-qubit mid-circuit-measurement (MCM) error
//! rates, places MCM-intensive logical qubits on reliable hardware, routes
//! with an MCM-aware SWAP tie-break, schedules as-late-as-possible, and
//! fills the exposed idle windows with context-aware dynamic decoupling.
//! A stochastic trajectory simulator and a benchmark harness reproduce the
//! evaluation metrics (Hellinger fidelity, attempts, SWAP, critical path)
//! at desk scale.

pub mod bench;
pub mod circuit;
pub mod device;
pub mod layout;
pub mod pipeline;
pub mod profiler;
pub mod qasm;
pub mod routing;
pub mod schedule;
pub mod sim;

pub use circuit::{Circuit, Gate, Instruction};
pub use device::{DeviceModel, Preset, SynthProfile};
pub use layout::{Layout, LayoutWeights, SeedWeights};
pub use pipeline::{compile, CompileOptions, CompileResult};
pub use routing::{RoutingConfig, RoutingPolicy};
pub use schedule::Schedule;
pub use sim::{NoiseChannelSet, ShotCounts};
