//! Benchmark generators, the worst-mapping baseline, and the evaluation
//! pipeline that compiles, schedules, simulates, and tabulates metrics.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{mcm_intensity, Circuit};
use crate::device::DeviceModel;
use crate::layout::{Layout, LayoutError};
use crate::pipeline::{compile, CompileOptions, DdChoice, LayoutChoice, PipelineError};
use crate::routing::{RoutingConfig, RoutingPolicy};
use crate::sim::{
    attempts_metric, hellinger_to_ideal, ideal_distribution, run_scheduled_with_options,
    NoiseChannelSet, SimError, SimOptions,
};

/// Rounds unrolled into every RUS benchmark; success probability 3/4 per
/// round leaves the residual failure odds below 3e-4.
pub const RUS_ROUNDS: usize = 6;
/// Ancilla rotation angle: P(fail) = sin^2(theta/2) = 1/4 after a clean
/// reset, 3/4 after a failed one, which is what makes MCM errors visible in
/// the attempts metric.
pub const RUS_THETA: f64 = std::f64::consts::FRAC_PI_3;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("qasm error: {0}")]
    Qasm(#[from] crate::qasm::QasmError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BenchmarkSpec {
    /// Bernstein-Vazirani with qubit reuse: `logical` qubits folded onto
    /// `physical` (one target plus reused input slots).
    BvReuse {
        logical: usize,
        physical: usize,
    },
    /// Hadamard-ladder chain reusing two slots.
    HLadder {
        logical: usize,
        physical: usize,
    },
    /// Repeat-until-success block on the first of `qubits/2` adjacent pairs.
    Rus {
        qubits: usize,
    },
    Ghz {
        qubits: usize,
    },
    QasmFile {
        path: PathBuf,
    },
}

impl BenchmarkSpec {
    /// Parse `bv:4-2`, `hladder:3-2`, `rus:4`, `ghz:5`, or `qasm:<path>`.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let (family, args) = text
            .split_once(':')
            .ok_or_else(|| BenchError::InvalidSpec(format!("'{text}' has no ':'")))?;
        let parse_pair = |args: &str| -> Result<(usize, usize), BenchError> {
            let (m, n) = args
                .split_once('-')
                .ok_or_else(|| BenchError::InvalidSpec(format!("'{args}' is not m-n")))?;
            Ok((
                m.parse()
                    .map_err(|_| BenchError::InvalidSpec(format!("bad count '{m}'")))?,
                n.parse()
                    .map_err(|_| BenchError::InvalidSpec(format!("bad count '{n}'")))?,
            ))
        };
        match family {
            "bv" => {
                let (logical, physical) = parse_pair(args)?;
                Ok(BenchmarkSpec::BvReuse { logical, physical })
            }
            "hladder" => {
                let (logical, physical) = parse_pair(args)?;
                Ok(BenchmarkSpec::HLadder { logical, physical })
            }
            "rus" => Ok(BenchmarkSpec::Rus {
                qubits: args
                    .parse()
                    .map_err(|_| BenchError::InvalidSpec(format!("bad count '{args}'")))?,
            }),
            "ghz" => Ok(BenchmarkSpec::Ghz {
                qubits: args
                    .parse()
                    .map_err(|_| BenchError::InvalidSpec(format!("bad count '{args}'")))?,
            }),
            "qasm" => Ok(BenchmarkSpec::QasmFile {
                path: PathBuf::from(args),
            }),
            other => Err(BenchError::InvalidSpec(format!("unknown family '{other}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            BenchmarkSpec::BvReuse { logical, physical } => format!("bv:{logical}-{physical}"),
            BenchmarkSpec::HLadder { logical, physical } => {
                format!("hladder:{logical}-{physical}")
            }
            BenchmarkSpec::Rus { qubits } => format!("rus:{qubits}"),
            BenchmarkSpec::Ghz { qubits } => format!("ghz:{qubits}"),
            BenchmarkSpec::QasmFile { path } => format!("qasm:{}", path.display()),
        }
    }

    /// True for circuits carrying a conditional retry block.
    pub fn is_rus(&self) -> bool {
        matches!(self, BenchmarkSpec::Rus { .. })
    }
}

/// Deterministic benchmark generation.
pub fn gen_benchmark(spec: &BenchmarkSpec) -> Result<Circuit, BenchError> {
    let circuit = match *spec {
        BenchmarkSpec::BvReuse { logical, physical } => bv_reuse(logical, physical)?,
        BenchmarkSpec::HLadder { logical, physical } => h_ladder(logical, physical)?,
        BenchmarkSpec::Rus { qubits } => rus(qubits)?,
        BenchmarkSpec::Ghz { qubits } => ghz(qubits)?,
        BenchmarkSpec::QasmFile { ref path } => {
            let text = std::fs::read_to_string(path)?;
            crate::qasm::parse(&text)?
        }
    };
    circuit
        .validate()
        .expect("generators emit well-formed circuits");
    Ok(circuit)
}

/// One target plus `physical - 1` input slots; each slot runs
/// X-oracle-H rounds for its share of the `logical - 1` inputs, with a
/// fused measure+reset between consecutive uses. The all-ones secret makes
/// the ideal output the all-ones bitstring.
fn bv_reuse(logical: usize, physical: usize) -> Result<Circuit, BenchError> {
    if physical < 2 || logical < physical {
        return Err(BenchError::InvalidSpec(format!(
            "bv needs 2 <= physical <= logical, got {logical}-{physical}"
        )));
    }
    let slots = physical - 1;
    let inputs = logical - 1;
    let target = physical - 1;
    let mut c = Circuit::new(physical, logical);
    c.x(target).h(target);
    for i in 0..inputs {
        let slot = i % slots;
        c.h(slot).cx(slot, target).h(slot).measure(slot, i);
        if i + slots < inputs {
            c.reset(slot);
        }
    }
    c.h(target).measure(target, logical - 1);
    Ok(c)
}

/// A chain of prep blocks and CXs folded onto two alternating slots; block
/// sizes are chosen so the compiled critical path is 8x the logical width.
fn h_ladder(logical: usize, physical: usize) -> Result<Circuit, BenchError> {
    if physical != 2 || logical < 3 {
        return Err(BenchError::InvalidSpec(format!(
            "hladder needs physical = 2 and logical >= 3, got {logical}-{physical}"
        )));
    }
    let prep = |c: &mut Circuit, q: usize| {
        c.h(q).sx(q).h(q).sx(q).h(q);
    };
    let mut c = Circuit::new(2, logical);
    prep(&mut c, 0);
    prep(&mut c, 1);
    c.cx(0, 1);
    for i in 2..logical {
        let slot = i % 2;
        c.measure(slot, i - 2).reset(slot);
        prep(&mut c, slot);
        c.cx(1 - slot, slot);
    }
    c.measure(logical % 2, logical - 2);
    let last = (logical - 1) % 2;
    for k in 0..9 {
        if k % 2 == 0 {
            c.h(last);
        } else {
            c.sx(last);
        }
    }
    c.measure(last, logical - 1);
    Ok(c)
}

/// Adjacent pairs with 2Q gates before and after a repeat-until-success
/// block on the first pair. Each round rotates the ancilla, entangles it
/// with the data qubit, and measures into the shared success bit; failing
/// rounds re-arm the next one through the single-bit condition.
fn rus(qubits: usize) -> Result<Circuit, BenchError> {
    if qubits < 2 {
        return Err(BenchError::InvalidSpec(format!(
            "rus needs >= 2 qubits, got {qubits}"
        )));
    }
    let rounds = RUS_ROUNDS.min(64);
    let mut c = Circuit::new(qubits, 1 + qubits);
    let success_bit = 0;
    for j in 0..qubits / 2 {
        c.h(2 * j).cx(2 * j, 2 * j + 1);
    }
    if qubits % 2 == 1 {
        c.h(qubits - 1);
    }
    c.ry(RUS_THETA, 1).cx(1, 0).measure(1, success_bit);
    for _ in 1..rounds {
        c.push(
            crate::circuit::Instruction::new(crate::circuit::Gate::Reset, vec![1])
                .with_condition(success_bit, true),
        );
        c.push(
            crate::circuit::Instruction::new(crate::circuit::Gate::Ry(RUS_THETA), vec![1])
                .with_condition(success_bit, true),
        );
        c.push(
            crate::circuit::Instruction::new(crate::circuit::Gate::Cx, vec![1, 0])
                .with_condition(success_bit, true),
        );
        c.push(
            crate::circuit::Instruction::new(
                crate::circuit::Gate::Measure { clbit: success_bit },
                vec![1],
            )
            .with_condition(success_bit, true),
        );
    }
    for j in 0..qubits / 2 {
        c.cx(2 * j, 2 * j + 1).h(2 * j);
    }
    for q in 0..qubits {
        c.measure(q, 1 + q);
    }
    Ok(c)
}

fn ghz(qubits: usize) -> Result<Circuit, BenchError> {
    if qubits == 0 {
        return Err(BenchError::InvalidSpec(
            "ghz needs at least one qubit".into(),
        ));
    }
    let mut c = Circuit::new(qubits, qubits);
    c.h(0);
    for q in 0..qubits - 1 {
        c.cx(q, q + 1);
    }
    for q in 0..qubits {
        c.measure(q, q);
    }
    Ok(c)
}

/// The eight RUS benchmarks (4 to 18 qubits).
pub fn rus_suite() -> Vec<BenchmarkSpec> {
    (0..8)
        .map(|i| BenchmarkSpec::Rus { qubits: 4 + 2 * i })
        .collect()
}

/// Reuse-style benchmarks: BV and H-ladder chains folded onto two qubits.
pub fn reuse_suite() -> Vec<BenchmarkSpec> {
    vec![
        BenchmarkSpec::BvReuse {
            logical: 4,
            physical: 2,
        },
        BenchmarkSpec::BvReuse {
            logical: 7,
            physical: 2,
        },
        BenchmarkSpec::BvReuse {
            logical: 10,
            physical: 2,
        },
        BenchmarkSpec::HLadder {
            logical: 3,
            physical: 2,
        },
        BenchmarkSpec::HLadder {
            logical: 5,
            physical: 2,
        },
        BenchmarkSpec::HLadder {
            logical: 7,
            physical: 2,
        },
    ]
}

/// Default 11-circuit suite: the RUS set plus three reuse circuits.
pub fn default_suite() -> Vec<BenchmarkSpec> {
    let mut suite = rus_suite();
    suite.push(BenchmarkSpec::BvReuse {
        logical: 4,
        physical: 2,
    });
    suite.push(BenchmarkSpec::HLadder {
        logical: 3,
        physical: 2,
    });
    suite.push(BenchmarkSpec::Ghz { qubits: 4 });
    suite
}

/// The worst-mapping baseline: over connected physical subgraphs grown
/// greedily from every seed qubit, pick the one maximizing the cumulative
/// MCM cost under the intensity-sorted assignment (most intensive logical
/// qubit onto the worst physical qubit).
pub fn worst_mapping(circuit: &Circuit, device: &DeviceModel) -> Result<Layout, LayoutError> {
    let k = circuit.num_qubits;
    if k > device.num_qubits {
        return Err(LayoutError::DeviceTooSmall {
            logical: k,
            physical: device.num_qubits,
        });
    }
    let intensity = mcm_intensity(circuit);
    let mut logical: Vec<usize> = (0..k).collect();
    logical.sort_by_key(|&q| (std::cmp::Reverse(intensity.of(q)), q));

    let mut best: Option<(f64, Vec<usize>)> = None;
    for seed in 0..device.num_qubits {
        let mut set = vec![seed];
        while set.len() < k {
            let candidate = (0..device.num_qubits)
                .filter(|p| !set.contains(p))
                .filter(|&p| set.iter().any(|&s| device.has_edge(s, p)))
                .max_by(|&a, &b| {
                    device.qubits[a]
                        .mcm_error
                        .partial_cmp(&device.qubits[b].mcm_error)
                        .unwrap()
                        .then(b.cmp(&a))
                });
            match candidate {
                Some(p) => set.push(p),
                None => break,
            }
        }
        if set.len() < k {
            continue;
        }
        let mut physical = set.clone();
        physical.sort_by(|&a, &b| {
            device.qubits[b]
                .mcm_error
                .partial_cmp(&device.qubits[a].mcm_error)
                .unwrap()
                .then(a.cmp(&b))
        });
        let score: f64 = logical
            .iter()
            .zip(&physical)
            .map(|(&q, &p)| intensity.of(q) as f64 * device.qubits[p].mcm_error)
            .sum();
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, physical));
        }
    }
    let (_, physical) = best.expect("connected device with enough qubits");
    let mut layout = Layout::empty(k, device.num_qubits);
    for (&q, &p) in logical.iter().zip(&physical) {
        layout.assign(q, p)?;
    }
    Ok(layout)
}

/// Cumulative MCM cost of the intensity-sorted assignment on a qubit set;
/// the quantity `worst_mapping` maximizes.
pub fn worst_mapping_score(circuit: &Circuit, device: &DeviceModel, set: &[usize]) -> f64 {
    let intensity = mcm_intensity(circuit);
    let mut logical: Vec<usize> = (0..circuit.num_qubits).collect();
    logical.sort_by_key(|&q| (std::cmp::Reverse(intensity.of(q)), q));
    let mut physical: Vec<usize> = set.to_vec();
    physical.sort_by(|&a, &b| {
        device.qubits[b]
            .mcm_error
            .partial_cmp(&device.qubits[a].mcm_error)
            .unwrap()
            .then(a.cmp(&b))
    });
    logical
        .iter()
        .zip(&physical)
        .map(|(&q, &p)| intensity.of(q) as f64 * device.qubits[p].mcm_error)
        .sum()
}

/// Compiler variants the evaluation compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompilerVariant {
    /// MCM-aware layout and routing plus CADD.
    Mera,
    /// MCM-aware layout and routing, no DD.
    MeraNoCadd,
    /// MCM-blind baseline: the same layout machinery with the MCM terms
    /// zeroed, and pure-distance routing.
    DistanceOnly,
    /// Highest-cumulative-MCM-cost layout, pure-distance routing.
    Worst,
}

impl CompilerVariant {
    pub const ALL: [CompilerVariant; 4] = [
        CompilerVariant::Mera,
        CompilerVariant::MeraNoCadd,
        CompilerVariant::DistanceOnly,
        CompilerVariant::Worst,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CompilerVariant::Mera => "mera",
            CompilerVariant::MeraNoCadd => "mera-no-cadd",
            CompilerVariant::DistanceOnly => "distance-only",
            CompilerVariant::Worst => "worst",
        }
    }

    pub fn options(&self) -> CompileOptions {
        let base = CompileOptions::default();
        match self {
            CompilerVariant::Mera => base,
            CompilerVariant::MeraNoCadd => CompileOptions {
                dd: DdChoice::None,
                ..base
            },
            CompilerVariant::DistanceOnly => CompileOptions {
                seed_weights: crate::layout::SeedWeights {
                    alpha: 0.0,
                    ..base.seed_weights
                },
                layout_weights: crate::layout::LayoutWeights {
                    w_mcm: 0.0,
                    ..base.layout_weights
                },
                routing: RoutingConfig {
                    policy: RoutingPolicy::DistanceOnly,
                    ..base.routing
                },
                dd: DdChoice::None,
                ..base
            },
            CompilerVariant::Worst => CompileOptions {
                layout: LayoutChoice::Worst,
                routing: RoutingConfig {
                    policy: RoutingPolicy::DistanceOnly,
                    ..base.routing
                },
                dd: DdChoice::None,
                ..base
            },
        }
    }
}

impl std::str::FromStr for CompilerVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CompilerVariant::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown compiler variant '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub benchmark: String,
    pub compiler: String,
    pub qubits: usize,
    pub path: usize,
    pub swaps: usize,
    /// Mean Hellinger fidelity over the iterations; absent when the circuit
    /// exceeds the simulator cap.
    pub fidelity: Option<f64>,
    pub fidelity_iterations: Vec<f64>,
    /// Total executed MCM operations across all shots (RUS only).
    pub attempts: Option<u64>,
    pub compile_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub device: String,
    pub shots: u64,
    pub iterations: usize,
    pub base_seed: u64,
    pub rows: Vec<BenchRow>,
}

impl RunReport {
    /// Frozen column order; `fidelity` and `attempts` empty when absent.
    pub const CSV_HEADER: &'static str =
        "benchmark,compiler,qubits,path,swaps,fidelity,attempts,compile_seconds";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let fidelity = row.fidelity.map(|f| format!("{f:.6}")).unwrap_or_default();
            let attempts = row.attempts.map(|a| a.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:.4}\n",
                row.benchmark,
                row.compiler,
                row.qubits,
                row.path,
                row.swaps,
                fidelity,
                attempts,
                row.compile_seconds
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    pub shots: u64,
    pub iterations: usize,
    pub base_seed: u64,
    /// Simulator cap for the evaluation; the bundled suite reaches 18 qubits.
    pub sim_max_qubits: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            shots: 1024,
            iterations: 5,
            base_seed: 7,
            sim_max_qubits: 20,
        }
    }
}

fn derive_seed(base: u64, bench: usize, compiler: usize, iteration: usize) -> u64 {
    // splitmix64 over a packed index keeps iteration streams well separated.
    let mut z = base
        .wrapping_add((bench as u64) << 40)
        .wrapping_add((compiler as u64) << 24)
        .wrapping_add(iteration as u64)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Compile, schedule, and simulate every (benchmark, compiler) cell; emit
/// one row per cell with the overhead and fidelity metrics.
pub fn run_eval(
    suite: &[BenchmarkSpec],
    device: &DeviceModel,
    compilers: &[CompilerVariant],
    config: &EvalConfig,
) -> Result<RunReport, BenchError> {
    let channels = NoiseChannelSet::from_device(device);
    let mut rows = Vec::new();
    for (b_idx, spec) in suite.iter().enumerate() {
        let circuit = gen_benchmark(spec)?;
        let ideal = ideal_distribution(&circuit).ok();
        for (c_idx, variant) in compilers.iter().enumerate() {
            let result = compile(&circuit, device, &variant.options())?;
            let mut fidelity_iterations = Vec::new();
            let mut attempts_total = 0u64;
            let mut attempts_valid = spec.is_rus();
            let sim_options = SimOptions {
                max_qubits: config.sim_max_qubits,
            };
            let mut simulated = true;
            for iteration in 0..config.iterations {
                let seed = derive_seed(config.base_seed, b_idx, c_idx, iteration);
                match run_scheduled_with_options(
                    &result.schedule,
                    device,
                    &channels,
                    config.shots,
                    seed,
                    sim_options,
                ) {
                    Ok(sim) => {
                        if let Some(ideal) = &ideal {
                            fidelity_iterations.push(hellinger_to_ideal(&sim.counts, ideal)?);
                        }
                        if attempts_valid {
                            match attempts_metric(&result.schedule.to_circuit(), &sim) {
                                Ok(a) => attempts_total += a,
                                Err(_) => attempts_valid = false,
                            }
                        }
                    }
                    Err(SimError::TooManyQubits { .. }) => {
                        simulated = false;
                        break;
                    }
                    Err(other) => return Err(other.into()),
                }
            }
            let fidelity = if simulated && !fidelity_iterations.is_empty() {
                Some(fidelity_iterations.iter().sum::<f64>() / fidelity_iterations.len() as f64)
            } else {
                None
            };
            rows.push(BenchRow {
                benchmark: spec.name(),
                compiler: variant.name().to_string(),
                qubits: circuit.num_qubits,
                path: result.critical_path,
                swaps: result.swap_count,
                fidelity,
                fidelity_iterations,
                attempts: (simulated && attempts_valid).then_some(attempts_total),
                compile_seconds: result.compile_seconds,
            });
        }
    }
    Ok(RunReport {
        device: device.name.clone(),
        shots: config.shots,
        iterations: config.iterations,
        base_seed: config.base_seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{count_swaps, critical_path_length, interaction_graph};
    use crate::device::{make_heavy_hex, synth_error_map, Preset, SynthProfile};

    #[test]
    fn spec_parsing_round_trips() {
        for text in ["bv:4-2", "hladder:3-2", "rus:4", "ghz:5"] {
            let spec = BenchmarkSpec::parse(text).unwrap();
            assert_eq!(spec.name(), text);
        }
        assert!(matches!(
            BenchmarkSpec::parse("qft:4"),
            Err(BenchError::InvalidSpec(_))
        ));
        assert!(matches!(
            BenchmarkSpec::parse("bv:4"),
            Err(BenchError::InvalidSpec(_))
        ));
    }

    #[test]
    fn bv_reuse_shape() {
        let c = gen_benchmark(&BenchmarkSpec::BvReuse {
            logical: 4,
            physical: 2,
        })
        .unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(
            mcm_intensity(&c).0,
            vec![2, 0],
            "two MCM stages on the reused slot"
        );
        let g = interaction_graph(&c);
        assert_eq!(
            g.edges.get(&(0, 1)),
            Some(&3),
            "the slot meets the target three times"
        );

        let ideal = crate::sim::ideal_distribution(&c).unwrap();
        assert!(
            (ideal["1111"] - 1.0).abs() < 1e-9,
            "all-ones secret reads out exactly"
        );
    }

    #[test]
    fn bv_reuse_general_folding() {
        let c = gen_benchmark(&BenchmarkSpec::BvReuse {
            logical: 10,
            physical: 2,
        })
        .unwrap();
        assert_eq!(mcm_intensity(&c).total(), 8, "m - n MCM stages");
        let c = gen_benchmark(&BenchmarkSpec::BvReuse {
            logical: 7,
            physical: 4,
        })
        .unwrap();
        assert_eq!(c.num_qubits, 4);
        assert_eq!(mcm_intensity(&c).total(), 3);
    }

    #[test]
    fn rus_shape_and_path() {
        let c = gen_benchmark(&BenchmarkSpec::Rus { qubits: 4 }).unwrap();
        assert_eq!(c.num_qubits, 4);
        assert_eq!(
            mcm_intensity(&c).0[1],
            RUS_ROUNDS,
            "every round measure is an MCM"
        );
        let conditionals = c
            .instructions
            .iter()
            .filter(|i| i.condition.is_some())
            .count();
        assert_eq!(
            conditionals,
            4 * (RUS_ROUNDS - 1),
            "retry rounds are fully conditioned"
        );
        assert_eq!(critical_path_length(&c), 28);
        for qubits in [6, 8, 10, 12, 14, 16, 18] {
            let c = gen_benchmark(&BenchmarkSpec::Rus { qubits }).unwrap();
            assert_eq!(critical_path_length(&c), 28, "rus:{qubits}");
        }
    }

    #[test]
    fn h_ladder_critical_paths_scale_with_width() {
        for (logical, path) in [(3, 24), (5, 40), (7, 56)] {
            let c = gen_benchmark(&BenchmarkSpec::HLadder {
                logical,
                physical: 2,
            })
            .unwrap();
            assert_eq!(c.num_qubits, 2);
            assert_eq!(critical_path_length(&c), path, "hladder:{logical}-2");
            assert_eq!(count_swaps(&c), 0);
        }
    }

    #[test]
    fn worst_mapping_prefers_hot_qubits() {
        let circuit = gen_benchmark(&BenchmarkSpec::BvReuse {
            logical: 4,
            physical: 2,
        })
        .unwrap();
        let mut device = make_heavy_hex(Preset::Line(5));
        for (i, q) in device.qubits.iter_mut().enumerate() {
            q.mcm_error = 0.01 * (i + 1) as f64;
        }
        device.qubits[3].mcm_error = 0.40; // single hot qubit
        let layout = worst_mapping(&circuit, &device).unwrap();
        assert_eq!(
            layout.phys(0),
            Some(3),
            "the MCM-intensive qubit lands on the hot spot"
        );
    }

    #[test]
    fn worst_mapping_uniform_map_is_deterministic() {
        let circuit = gen_benchmark(&BenchmarkSpec::Rus { qubits: 4 }).unwrap();
        let device = make_heavy_hex(Preset::Grid(2, 3));
        let a = worst_mapping(&circuit, &device).unwrap();
        let b = worst_mapping(&circuit, &device).unwrap();
        assert_eq!(a, b);
        assert!(a.is_total());
    }

    /// All connected `k`-subsets of the device, by BFS over subsets.
    pub(crate) fn connected_subsets(device: &DeviceModel, k: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..device.num_qubits).map(|p| vec![p]).collect();
        while let Some(set) = stack.pop() {
            if set.len() == k {
                let mut sorted = set.clone();
                sorted.sort_unstable();
                if !out.contains(&sorted) {
                    out.push(sorted);
                }
                continue;
            }
            for p in 0..device.num_qubits {
                if !set.contains(&p) && set.iter().any(|&s| device.has_edge(s, p)) {
                    let mut next = set.clone();
                    next.push(p);
                    stack.push(next);
                }
            }
        }
        out
    }

    #[test]
    fn worst_mapping_matches_exhaustive_search_on_small_devices() {
        let circuit = gen_benchmark(&BenchmarkSpec::Rus { qubits: 4 }).unwrap();
        for (preset, seed) in [
            (Preset::Line(6), 11),
            (Preset::Grid(2, 4), 12),
            (Preset::Line(8), 13),
            (Preset::Grid(2, 3), 14),
        ] {
            let device = synth_error_map(preset, seed, &SynthProfile::eagle()).unwrap();
            let layout = worst_mapping(&circuit, &device).unwrap();
            let got = worst_mapping_score(&circuit, &device, &layout.mapped_physical());
            let best = connected_subsets(&device, 4)
                .into_iter()
                .map(|set| worst_mapping_score(&circuit, &device, &set))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (got - best).abs() < 1e-12,
                "{}: greedy {got} vs exhaustive {best}",
                device.name
            );
        }
    }

    #[test]
    fn empty_suite_empty_report() {
        let device = make_heavy_hex(Preset::Line(4));
        let report = run_eval(&[], &device, &CompilerVariant::ALL, &EvalConfig::default()).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.to_csv().lines().count(), 1);
    }

    #[test]
    fn rus_path_and_swaps_identical_across_mera_and_distance_only() {
        let device = synth_error_map(Preset::Eagle127, 3, &SynthProfile::eagle()).unwrap();
        let config = EvalConfig {
            shots: 64,
            iterations: 1,
            ..Default::default()
        };
        let suite = rus_suite();
        let report = run_eval(
            &suite,
            &device,
            &[CompilerVariant::Mera, CompilerVariant::DistanceOnly],
            &config,
        )
        .unwrap();
        for pair in report.rows.chunks(2) {
            assert_eq!(pair[0].path, pair[1].path, "{}", pair[0].benchmark);
            assert_eq!(pair[0].swaps, pair[1].swaps);
            assert_eq!(pair[0].swaps, 0);
            assert_eq!(pair[0].path, 28);
        }
    }

    #[test]
    fn report_rows_are_deterministic() {
        let device = synth_error_map(Preset::SmallHex, 9, &SynthProfile::eagle()).unwrap();
        let suite = [BenchmarkSpec::BvReuse {
            logical: 4,
            physical: 2,
        }];
        let config = EvalConfig {
            shots: 128,
            iterations: 2,
            ..Default::default()
        };
        let mut a = run_eval(&suite, &device, &CompilerVariant::ALL, &config).unwrap();
        let mut b = run_eval(&suite, &device, &CompilerVariant::ALL, &config).unwrap();
        // Wall-clock timings are the one nondeterministic field.
        for row in a.rows.iter_mut().chain(b.rows.iter_mut()) {
            row.compile_seconds = 0.0;
        }
        assert_eq!(a, b);
    }

    #[test]
    fn cadd_never_hurts_rus_fidelity_beyond_noise() {
        let device = synth_error_map(Preset::Eagle127, 11, &SynthProfile::eagle()).unwrap();
        let suite = [BenchmarkSpec::Rus { qubits: 4 }];
        for base_seed in 1..=5 {
            let config = EvalConfig {
                shots: 1024,
                iterations: 5,
                base_seed,
                sim_max_qubits: 20,
            };
            let report = run_eval(
                &suite,
                &device,
                &[CompilerVariant::Mera, CompilerVariant::MeraNoCadd],
                &config,
            )
            .unwrap();
            let with_dd = report.rows[0].fidelity.unwrap();
            let without = report.rows[1].fidelity.unwrap();
            assert!(
                with_dd >= without - 0.02,
                "seed {base_seed}: CADD dropped fidelity {without} -> {with_dd}"
            );
        }
    }

    #[test]
    fn full_suite_smoke() {
        // Every generated benchmark compiles, routes to adjacency, schedules
        // validly, and simulates without error (small shot budget).
        let device = synth_error_map(Preset::Eagle127, 3, &SynthProfile::eagle()).unwrap();
        let config = EvalConfig {
            shots: 32,
            iterations: 1,
            ..Default::default()
        };
        let report =
            run_eval(&default_suite(), &device, &[CompilerVariant::Mera], &config).unwrap();
        assert_eq!(report.rows.len(), 11);
        for row in &report.rows {
            assert!(row.fidelity.is_some(), "{} must simulate", row.benchmark);
            assert!(row.compile_seconds < 2.0);
        }
    }
}
