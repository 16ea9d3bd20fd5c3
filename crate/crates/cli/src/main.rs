//! `mera` — compile, schedule, simulate, and benchmark dynamic circuits
//! against a calibrated device model.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mera_core::bench::{
    default_suite, gen_benchmark, reuse_suite, run_eval, rus_suite, BenchmarkSpec, CompilerVariant,
    EvalConfig, RunReport,
};
use mera_core::circuit::Circuit;
use mera_core::device::{synth_error_map, DeviceModel, Preset, SynthProfile};
use mera_core::pipeline::{compile, CompileOptions, DdChoice, LayoutChoice};
use mera_core::profiler::profile_device;
use mera_core::routing::RoutingPolicy;
use mera_core::schedule::{alap_schedule, cadd_insert, CaddConfig};
use mera_core::sim::{run, run_scheduled, NoiseChannelSet};
use mera_core::{LayoutWeights, SeedWeights};

#[derive(Parser)]
#[command(
    name = "mera",
    version,
    about = "MCM-error-aware transpiler for dynamic circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DeviceArgs {
    /// Calibration JSON file, or a preset: eagle127 | small-hex | line:N | grid:RxC.
    #[arg(long)]
    device: String,
    /// Synthetic error profile applied when --device names a preset.
    #[arg(long, value_parser = ["eagle", "heron", "zero"], default_value = "zero")]
    synth: String,
    /// Seed for the synthetic error map.
    #[arg(long, default_value_t = 1)]
    synth_seed: u64,
}

impl DeviceArgs {
    fn load(&self) -> Result<DeviceModel> {
        if let Ok(preset) = Preset::from_str(&self.device) {
            let profile = match self.synth.as_str() {
                "eagle" => SynthProfile::eagle(),
                "heron" => SynthProfile::heron(),
                _ => SynthProfile::zero(),
            };
            return Ok(synth_error_map(preset, self.synth_seed, &profile)?);
        }
        if Path::new(&self.device).exists() {
            return Ok(DeviceModel::load(&self.device)?);
        }
        bail!(
            "--device '{}' is neither a preset nor an existing file",
            self.device
        )
    }
}

#[derive(Args)]
struct WeightArgs {
    /// JSON file overriding the seed/layout weight defaults.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Level-1 score band within which the MCM tie-break applies.
    #[arg(long)]
    delta_swap: Option<f64>,
    /// Look-ahead window, in 2Q layers.
    #[arg(long)]
    look_ahead: Option<usize>,
}

#[derive(serde::Deserialize, Default)]
struct WeightsFile {
    #[serde(default)]
    seed: Option<SeedWeights>,
    #[serde(default)]
    layout: Option<LayoutWeights>,
}

impl WeightArgs {
    fn apply(&self, options: &mut CompileOptions) -> Result<()> {
        if let Some(path) = &self.weights {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading weights file {}", path.display()))?;
            let file: WeightsFile = serde_json::from_str(&text)?;
            if let Some(seed) = file.seed {
                options.seed_weights = seed;
            }
            if let Some(layout) = file.layout {
                options.layout_weights = layout;
            }
        }
        if let Some(delta) = self.delta_swap {
            options.routing.delta_swap = delta;
        }
        if let Some(look_ahead) = self.look_ahead {
            options.routing.look_ahead = look_ahead;
            options.layout_weights.look_ahead = look_ahead;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate per-qubit MCM error rates on the simulator backend.
    Profile {
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lay out and route a circuit; emit the routed QASM.
    Compile {
        /// Input QASM file, or a benchmark spec like rus:4 / bv:4-2.
        #[arg(long)]
        input: String,
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, default_value = "mera")]
        layout: String,
        #[arg(long, value_parser = ["mera", "distance-only"], default_value = "mera")]
        routing: String,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the initial layout as JSON.
        #[arg(long)]
        layout_out: Option<PathBuf>,
    },
    /// ALAP-schedule a routed circuit and optionally insert DD pulses;
    /// emit the timeline as JSON.
    Schedule {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        device: DeviceArgs,
        /// Scheduling policy (as-late-as-possible is the only one).
        #[arg(long, value_parser = ["alap"], default_value = "alap")]
        scheduling: String,
        #[arg(long, value_parser = ["cadd", "none"], default_value = "cadd")]
        dd: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the noise simulator on a circuit; emit a counts histogram.
    Simulate {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Channel set JSON; defaults to channels derived from the device.
        #[arg(long)]
        channels: Option<PathBuf>,
        /// ALAP-schedule first so idle-window decoherence applies.
        #[arg(long, default_value_t = false)]
        scheduled: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile, schedule, and simulate a benchmark suite across compilers.
    Bench {
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, value_parser = ["default", "rus", "reuse"], default_value = "default")]
        suite: String,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        #[arg(long, default_value_t = 5)]
        iterations: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Compiler variants to run (default: all four).
        #[arg(long, value_delimiter = ',')]
        compilers: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Convert a bench report to CSV or a per-compiler summary table.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = ["csv", "table"], default_value = "table")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Inputs are either QASM files or generator specs like `rus:4`.
fn load_circuit(input: &str) -> Result<Circuit> {
    if Path::new(input).exists() {
        let text = std::fs::read_to_string(input)?;
        return Ok(mera_core::qasm::parse(&text)?);
    }
    if input.contains(':') {
        return Ok(gen_benchmark(&BenchmarkSpec::parse(input)?)?);
    }
    bail!("input '{input}' is neither an existing file nor a benchmark spec")
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() {
    if let Err(err) = run_cli() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run_cli() -> Result<()> {
    match Cli::parse().command {
        Command::Profile {
            device,
            shots,
            seed,
            out,
        } => {
            let model = device.load()?;
            let channels = NoiseChannelSet::from_device(&model);
            let report = profile_device(&model, &channels, shots, seed)?;
            write_out(&out, &serde_json::to_string_pretty(&report)?)?;
            let mean = report.estimates.iter().map(|&(_, e)| e).sum::<f64>()
                / report.estimates.len().max(1) as f64;
            println!(
                "profiled {} qubits on {} with {} shots each; mean MCM error {:.4}",
                report.estimates.len(),
                report.device,
                shots,
                mean
            );
        }
        Command::Compile {
            input,
            device,
            layout,
            routing,
            weights,
            out,
            layout_out,
        } => {
            let circuit = load_circuit(&input)?;
            let model = device.load()?;
            let mut options = CompileOptions {
                layout: LayoutChoice::from_str(&layout).map_err(anyhow::Error::msg)?,
                ..CompileOptions::default()
            };
            options.routing.policy = match routing.as_str() {
                "distance-only" => RoutingPolicy::DistanceOnly,
                _ => RoutingPolicy::Mera,
            };
            weights.apply(&mut options)?;
            let result = compile(&circuit, &model, &options)?;
            write_out(&out, &mera_core::qasm::emit(&result.routed))?;
            if let Some(path) = layout_out {
                let table: Vec<Option<usize>> =
                    result.initial_layout.logical_to_physical().to_vec();
                write_out(&path, &serde_json::to_string_pretty(&table)?)?;
            }
            println!(
                "compiled {}: swaps = {}, critical path = {}, {:.3} s",
                input, result.swap_count, result.critical_path, result.compile_seconds
            );
        }
        Command::Schedule {
            input,
            device,
            scheduling: _,
            dd,
            out,
        } => {
            let circuit = load_circuit(&input)?;
            let model = device.load()?;
            let schedule = alap_schedule(&circuit, &model);
            let schedule = match DdChoice::from_str(&dd).map_err(anyhow::Error::msg)? {
                DdChoice::Cadd => cadd_insert(&schedule, &model, &CaddConfig::default()),
                DdChoice::None => schedule,
            };
            schedule.validate().map_err(anyhow::Error::msg)?;
            write_out(&out, &serde_json::to_string_pretty(&schedule)?)?;
            let dd_pulses = schedule
                .entries
                .iter()
                .filter(|e| e.instruction.label.as_deref() == Some("dd"))
                .count();
            println!(
                "scheduled {} instructions over {} time units ({} DD pulses)",
                schedule.entries.len(),
                schedule.total_duration,
                dd_pulses
            );
        }
        Command::Simulate {
            input,
            device,
            shots,
            seed,
            channels,
            scheduled,
            out,
        } => {
            let circuit = load_circuit(&input)?;
            let model = device.load()?;
            let channels = match channels {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => NoiseChannelSet::from_device(&model),
            };
            let result = if scheduled {
                let schedule = alap_schedule(&circuit, &model);
                run_scheduled(&schedule, &model, &channels, shots, seed)?
            } else {
                run(&circuit, &model, &channels, shots, seed)?
            };
            write_out(&out, &serde_json::to_string_pretty(&result.counts)?)?;
            println!(
                "simulated {} shots, {} distinct outcomes",
                result.counts.shots,
                result.counts.counts.len()
            );
        }
        Command::Bench {
            device,
            suite,
            shots,
            iterations,
            seed,
            compilers,
            out_dir,
        } => {
            let model = device.load()?;
            let suite = match suite.as_str() {
                "rus" => rus_suite(),
                "reuse" => reuse_suite(),
                _ => default_suite(),
            };
            let variants: Vec<CompilerVariant> = if compilers.is_empty() {
                CompilerVariant::ALL.to_vec()
            } else {
                compilers
                    .iter()
                    .map(|c| CompilerVariant::from_str(c).map_err(anyhow::Error::msg))
                    .collect::<Result<_>>()?
            };
            let config = EvalConfig {
                shots,
                iterations,
                base_seed: seed,
                ..EvalConfig::default()
            };
            let report = run_eval(&suite, &model, &variants, &config)?;
            std::fs::create_dir_all(&out_dir)?;
            write_out(
                &out_dir.join("report.json"),
                &serde_json::to_string_pretty(&report)?,
            )?;
            write_out(&out_dir.join("report.csv"), &report.to_csv())?;
            print!("{}", summarize(&report));
        }
        Command::Report { input, format, out } => {
            let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&input)?)?;
            let text = match format.as_str() {
                "csv" => report.to_csv(),
                _ => summarize(&report),
            };
            match out {
                Some(path) => write_out(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn summarize(report: &RunReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "device {}  shots {}  iterations {}  seed {}",
        report.device, report.shots, report.iterations, report.base_seed
    );
    let _ = writeln!(
        out,
        "{:<14} {:<14} {:>6} {:>5} {:>5} {:>9} {:>9} {:>9}",
        "benchmark", "compiler", "qubits", "path", "swaps", "fidelity", "attempts", "time(s)"
    );
    for row in &report.rows {
        let fidelity = row
            .fidelity
            .map(|f| format!("{f:.4}"))
            .unwrap_or_else(|| "-".into());
        let attempts = row
            .attempts
            .map(|a| a.to_string())
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<14} {:<14} {:>6} {:>5} {:>5} {:>9} {:>9} {:>9.3}",
            row.benchmark,
            row.compiler,
            row.qubits,
            row.path,
            row.swaps,
            fidelity,
            attempts,
            row.compile_seconds
        );
    }
    out
}
