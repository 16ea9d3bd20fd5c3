//! Monte Carlo trajectory simulator for dynamic circuits.
//!
//! Each shot evolves a statevector and a classical bit register, sampling
//! stochastic Pauli error channels: depolarizing noise after 1Q/2Q gates,
//! readout bit flips, post-reset flips (the MCM error), measurement-induced
//! Z crosstalk on coupled neighbors, and per-idle-window decoherence when a
//! schedule is supplied. Shots draw from counter-based RNG streams keyed by
//! (seed, shot index), so results are bit-identical at any thread count.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, Instruction};
use crate::device::DeviceModel;
use crate::schedule::Schedule;

/// Default cap on simulated (used) qubits; 2^14 amplitudes per trajectory.
pub const DEFAULT_QUBIT_CAP: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("circuit uses {used} qubits, above the engine cap of {cap}")]
    TooManyQubits { used: usize, cap: usize },
    #[error("shot counts are empty")]
    EmptyCounts,
    #[error("circuit is not a repeat-until-success circuit (no conditional retry on an MCM)")]
    NotRus,
    #[error("statevector oracle supports unitary circuits only (found {0})")]
    NonUnitary(String),
    #[error("ideal-distribution branch limit exceeded ({0} branches)")]
    TooManyBranches(usize),
}

/// JSON-friendly encoding of the per-edge map as (a, b, rate) triples.
mod edge_rates {
    use std::collections::BTreeMap;

    use serde::de::Deserializer;
    use serde::ser::Serializer;
    use serde::{Deserialize, Serialize};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), f64>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let triples: Vec<(usize, usize, f64)> = map.iter().map(|(&(a, b), &e)| (a, b, e)).collect();
        triples.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let triples = Vec::<(usize, usize, f64)>::deserialize(deserializer)?;
        Ok(triples
            .into_iter()
            .map(|(a, b, e)| ((a.min(b), a.max(b)), e))
            .collect())
    }
}

/// Stochastic error channels, indexed by the qubit ids the circuit uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseChannelSet {
    /// Depolarizing probability after each 1Q gate.
    pub e1q: Vec<f64>,
    /// Depolarizing probability after each 2Q gate, keyed by qubit pair.
    #[serde(with = "edge_rates")]
    pub e2q: BTreeMap<(usize, usize), f64>,
    /// Readout bit-flip probability per qubit.
    pub readout: Vec<f64>,
    /// Post-reset bit-flip probability per qubit (MCM error).
    pub mcm: Vec<f64>,
    /// Relaxation / dephasing times (ns) feeding idle-window Pauli noise.
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// Neighbor Z-flip probability during a measurement on qubit m is
    /// `crosstalk_factor * mcm[m]`.
    pub crosstalk_factor: f64,
    /// Multiplier on idle dephasing inside windows that received DD pulses.
    pub dd_suppression: f64,
}

impl NoiseChannelSet {
    pub fn noiseless(num_qubits: usize) -> Self {
        NoiseChannelSet {
            e1q: vec![0.0; num_qubits],
            e2q: BTreeMap::new(),
            readout: vec![0.0; num_qubits],
            mcm: vec![0.0; num_qubits],
            t1: vec![f64::INFINITY; num_qubits],
            t2: vec![f64::INFINITY; num_qubits],
            crosstalk_factor: 0.0,
            dd_suppression: 1.0,
        }
    }

    /// Derive channels from device calibration. Crosstalk magnitude and DD
    /// suppression are synthetic defaults (0.25 and 0.2); both are plain
    /// fields and serialize with the rest of the set.
    pub fn from_device(device: &DeviceModel) -> Self {
        let mut e2q = BTreeMap::new();
        for (&(a, b), &e) in device.edges.iter().zip(&device.e2q) {
            e2q.insert((a, b), e);
        }
        NoiseChannelSet {
            e1q: device.qubits.iter().map(|q| q.e1q).collect(),
            e2q,
            readout: device.qubits.iter().map(|q| q.readout_error).collect(),
            mcm: device.qubits.iter().map(|q| q.mcm_error).collect(),
            t1: device.qubits.iter().map(|q| q.t1).collect(),
            t2: device.qubits.iter().map(|q| q.t2).collect(),
            crosstalk_factor: 0.25,
            dd_suppression: 0.2,
        }
    }

    fn e1q_at(&self, q: usize) -> f64 {
        self.e1q.get(q).copied().unwrap_or(0.0)
    }

    fn e2q_at(&self, a: usize, b: usize) -> f64 {
        self.e2q.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    fn readout_at(&self, q: usize) -> f64 {
        self.readout.get(q).copied().unwrap_or(0.0)
    }

    fn mcm_at(&self, q: usize) -> f64 {
        self.mcm.get(q).copied().unwrap_or(0.0)
    }

    fn t1_at(&self, q: usize) -> f64 {
        self.t1.get(q).copied().unwrap_or(f64::INFINITY)
    }

    fn t2_at(&self, q: usize) -> f64 {
        self.t2.get(q).copied().unwrap_or(f64::INFINITY)
    }
}

/// Histogram of measured bitstrings. Character `i` of a key is clbit `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotCounts {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn probabilities(&self) -> BTreeMap<String, f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .map(|(k, &v)| (k.clone(), v as f64 / total))
            .collect()
    }
}

/// Counts plus the per-shot record of executed mid-circuit measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub counts: ShotCounts,
    pub mcm_per_shot: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub max_qubits: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_qubits: DEFAULT_QUBIT_CAP,
        }
    }
}

/// One step of a trajectory: an instruction, or idle-window noise on a qubit.
#[derive(Debug, Clone)]
enum Event {
    Inst(Instruction, bool), // instruction, is_mcm
    Idle {
        qubit: usize,
        duration: f64,
        dd: bool,
    },
}

fn used_qubits(instructions: &[Instruction]) -> Vec<usize> {
    let mut used: Vec<usize> = instructions
        .iter()
        .flat_map(|i| i.qubits.iter().copied())
        .collect();
    used.sort_unstable();
    used.dedup();
    used
}

struct Engine {
    events: Vec<Event>,
    /// Physical qubit id -> dense statevector index.
    dense: BTreeMap<usize, usize>,
    num_clbits: usize,
    channels: NoiseChannelSet,
    /// Coupled neighbors per physical qubit (only those in the dense set).
    neighbors: BTreeMap<usize, Vec<usize>>,
}

impl Engine {
    fn new(
        events: Vec<Event>,
        num_clbits: usize,
        device: &DeviceModel,
        channels: &NoiseChannelSet,
        options: SimOptions,
    ) -> Result<Self, SimError> {
        let touched: Vec<Instruction> = events
            .iter()
            .map(|e| match e {
                Event::Inst(inst, _) => inst.clone(),
                Event::Idle { qubit, .. } => Instruction::new(Gate::Barrier, vec![*qubit]),
            })
            .collect();
        let used = used_qubits(&touched);
        if used.len() > options.max_qubits {
            return Err(SimError::TooManyQubits {
                used: used.len(),
                cap: options.max_qubits,
            });
        }
        let dense: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut neighbors = BTreeMap::new();
        for &q in &used {
            let coupled: Vec<usize> = device
                .neighbors(q)
                .into_iter()
                .filter(|n| dense.contains_key(n))
                .collect();
            neighbors.insert(q, coupled);
        }
        Ok(Engine {
            events,
            dense,
            num_clbits,
            channels: channels.clone(),
            neighbors,
        })
    }

    fn run(&self, shots: u64, seed: u64) -> SimResult {
        let per_shot: Vec<(String, u32)> = (0..shots)
            .into_par_iter()
            .map(|shot| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(shot + 1);
                self.trajectory(&mut rng)
            })
            .collect();
        let mut counts = BTreeMap::new();
        let mut mcm_per_shot = Vec::with_capacity(shots as usize);
        for (bits, mcms) in per_shot {
            *counts.entry(bits).or_insert(0) += 1;
            mcm_per_shot.push(mcms);
        }
        SimResult {
            counts: ShotCounts {
                counts,
                shots,
                seed,
            },
            mcm_per_shot,
        }
    }

    fn trajectory(&self, rng: &mut ChaCha8Rng) -> (String, u32) {
        let n = self.dense.len();
        let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
        state[0] = Complex64::new(1.0, 0.0);
        let mut clbits = vec![false; self.num_clbits];
        let mut mcm_count = 0u32;

        for event in &self.events {
            match event {
                Event::Idle {
                    qubit,
                    duration,
                    dd,
                } => {
                    let q = self.dense[qubit];
                    let p_flip = 1.0 - (-duration / self.channels.t1_at(*qubit)).exp();
                    let mut p_phase = 1.0 - (-duration / self.channels.t2_at(*qubit)).exp();
                    if *dd {
                        p_phase *= self.channels.dd_suppression;
                    }
                    if rng.gen_bool(p_flip.clamp(0.0, 1.0)) {
                        apply_1q(&mut state, q, &PAULI_X);
                    }
                    if rng.gen_bool(p_phase.clamp(0.0, 1.0)) {
                        apply_1q(&mut state, q, &PAULI_Z);
                    }
                }
                Event::Inst(inst, is_mcm) => {
                    if let Some(cond) = inst.condition {
                        if clbits[cond.bit] != cond.value {
                            continue;
                        }
                    }
                    self.apply_instruction(
                        inst,
                        *is_mcm,
                        &mut state,
                        &mut clbits,
                        &mut mcm_count,
                        rng,
                    );
                }
            }
        }
        let bits: String = clbits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        (bits, mcm_count)
    }

    fn apply_instruction(
        &self,
        inst: &Instruction,
        is_mcm: bool,
        state: &mut [Complex64],
        clbits: &mut [bool],
        mcm_count: &mut u32,
        rng: &mut ChaCha8Rng,
    ) {
        match inst.gate {
            g if g.is_gate_1q() => {
                let phys = inst.qubits[0];
                let q = self.dense[&phys];
                apply_1q(state, q, &gate_matrix_1q(g));
                let p = self.channels.e1q_at(phys);
                if p > 0.0 && rng.gen_bool(p) {
                    apply_random_pauli(state, q, rng);
                }
            }
            Gate::Cx | Gate::Swap => {
                let (pa, pb) = (inst.qubits[0], inst.qubits[1]);
                let (a, b) = (self.dense[&pa], self.dense[&pb]);
                if inst.gate == Gate::Cx {
                    apply_cx(state, a, b);
                } else {
                    apply_swap(state, a, b);
                }
                let p = self.channels.e2q_at(pa, pb);
                if p > 0.0 && rng.gen_bool(p) {
                    // Uniform non-identity two-qubit Pauli.
                    let k = rng.gen_range(1..16);
                    if k % 4 != 0 {
                        apply_pauli_index(state, a, k % 4, rng);
                    }
                    if k / 4 != 0 {
                        apply_pauli_index(state, b, k / 4, rng);
                    }
                }
            }
            Gate::Measure { clbit } => {
                let phys = inst.qubits[0];
                let q = self.dense[&phys];
                let outcome = sample_and_project(state, q, rng);
                let p_ro = self.channels.readout_at(phys);
                let recorded = if p_ro > 0.0 && rng.gen_bool(p_ro) {
                    !outcome
                } else {
                    outcome
                };
                clbits[clbit] = recorded;
                if is_mcm {
                    *mcm_count += 1;
                }
                let kappa = self.channels.crosstalk_factor * self.channels.mcm_at(phys);
                if kappa > 0.0 {
                    for &n in &self.neighbors[&phys] {
                        if rng.gen_bool(kappa.clamp(0.0, 1.0)) {
                            apply_1q(state, self.dense[&n], &PAULI_Z);
                        }
                    }
                }
            }
            Gate::Reset => {
                let phys = inst.qubits[0];
                let q = self.dense[&phys];
                let outcome = sample_and_project(state, q, rng);
                if outcome {
                    apply_1q(state, q, &PAULI_X);
                }
                let p = self.channels.mcm_at(phys);
                if p > 0.0 && rng.gen_bool(p) {
                    apply_1q(state, q, &PAULI_X);
                }
            }
            Gate::Barrier => {}
            Gate::Delay { duration } => {
                // A bare delay decoheres like an idle window.
                let phys = inst.qubits[0];
                let q = self.dense[&phys];
                let t = duration as f64;
                let p_flip = 1.0 - (-t / self.channels.t1_at(phys)).exp();
                let p_phase = 1.0 - (-t / self.channels.t2_at(phys)).exp();
                if rng.gen_bool(p_flip.clamp(0.0, 1.0)) {
                    apply_1q(state, q, &PAULI_X);
                }
                if rng.gen_bool(p_phase.clamp(0.0, 1.0)) {
                    apply_1q(state, q, &PAULI_Z);
                }
            }
            _ => unreachable!("1q gates handled above"),
        }
    }
}

/// Simulate a circuit with no timing information (no idle-window channels).
pub fn run(
    circuit: &Circuit,
    device: &DeviceModel,
    channels: &NoiseChannelSet,
    shots: u64,
    seed: u64,
) -> Result<SimResult, SimError> {
    run_with_options(
        circuit,
        device,
        channels,
        shots,
        seed,
        SimOptions::default(),
    )
}

pub fn run_with_options(
    circuit: &Circuit,
    device: &DeviceModel,
    channels: &NoiseChannelSet,
    shots: u64,
    seed: u64,
    options: SimOptions,
) -> Result<SimResult, SimError> {
    let events: Vec<Event> = circuit
        .instructions
        .iter()
        .zip(circuit.mcm_flags())
        .map(|(inst, flag)| Event::Inst(inst.clone(), flag))
        .collect();
    let engine = Engine::new(events, circuit.num_clbits, device, channels, options)?;
    Ok(engine.run(shots, seed))
}

/// Simulate a scheduled circuit: instructions execute in time order and
/// idle windows contribute decoherence, suppressed where DD pulses landed.
pub fn run_scheduled(
    schedule: &Schedule,
    device: &DeviceModel,
    channels: &NoiseChannelSet,
    shots: u64,
    seed: u64,
) -> Result<SimResult, SimError> {
    run_scheduled_with_options(
        schedule,
        device,
        channels,
        shots,
        seed,
        SimOptions::default(),
    )
}

pub fn run_scheduled_with_options(
    schedule: &Schedule,
    device: &DeviceModel,
    channels: &NoiseChannelSet,
    shots: u64,
    seed: u64,
    options: SimOptions,
) -> Result<SimResult, SimError> {
    // Keyed (time, kind, sequence): idle noise at a window's end applies
    // before the instruction that starts there.
    let mut keyed: Vec<(u64, u8, usize, Event)> = Vec::new();
    let circuit = schedule.to_circuit();
    let flags = circuit.mcm_flags();
    for (i, entry) in schedule.entries.iter().enumerate() {
        keyed.push((
            entry.start,
            1,
            i,
            Event::Inst(entry.instruction.clone(), flags[i]),
        ));
    }
    let mut seq = 0;
    for (q, windows) in schedule.idle_windows.iter().enumerate() {
        for w in windows {
            keyed.push((
                w.end,
                0,
                seq,
                Event::Idle {
                    qubit: q,
                    duration: (w.end - w.start) as f64,
                    dd: w.dd,
                },
            ));
            seq += 1;
        }
    }
    keyed.sort_by_key(|&(t, kind, s, _)| (t, kind, s));
    let events: Vec<Event> = keyed.into_iter().map(|(_, _, _, e)| e).collect();
    let engine = Engine::new(events, schedule.num_clbits, device, channels, options)?;
    Ok(engine.run(shots, seed))
}

/// Hellinger fidelity between two histograms: (sum_x sqrt(p_x q_x))^2.
pub fn hellinger_fidelity(a: &ShotCounts, b: &ShotCounts) -> Result<f64, SimError> {
    if a.total() == 0 || b.total() == 0 {
        return Err(SimError::EmptyCounts);
    }
    Ok(hellinger_from_probs(&a.probabilities(), &b.probabilities()))
}

/// Hellinger fidelity between measured counts and an exact distribution.
pub fn hellinger_to_ideal(
    counts: &ShotCounts,
    ideal: &BTreeMap<String, f64>,
) -> Result<f64, SimError> {
    if counts.total() == 0 {
        return Err(SimError::EmptyCounts);
    }
    Ok(hellinger_from_probs(&counts.probabilities(), ideal))
}

fn hellinger_from_probs(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut sum = 0.0;
    for (key, &pv) in p {
        if let Some(&qv) = q.get(key) {
            sum += (pv * qv).sqrt();
        }
    }
    sum * sum
}

/// Total executed MCM operations across all shots of an RUS circuit.
///
/// Rounds are gated by single-bit conditions, so a shot stops executing
/// round measurements once its success condition fires; the per-shot counter
/// therefore equals "MCM operations until success" (bounded by the unrolled
/// round count).
pub fn attempts_metric(circuit: &Circuit, result: &SimResult) -> Result<u64, SimError> {
    let has_conditional_mcm_retry = circuit.instructions.iter().any(|i| i.condition.is_some())
        && circuit.mcm_flags().iter().any(|&f| f);
    if !has_conditional_mcm_retry {
        return Err(SimError::NotRus);
    }
    Ok(result.mcm_per_shot.iter().map(|&c| c as u64).sum())
}

/// Exact final statevector of a unitary circuit (no measure/reset/condition).
/// Test oracle for DAG replay and routing equivalence checks.
pub fn statevector(circuit: &Circuit) -> Result<Vec<Complex64>, SimError> {
    let used = used_qubits(&circuit.instructions);
    let n = circuit
        .num_qubits
        .max(used.last().map(|&q| q + 1).unwrap_or(0));
    if n > 20 {
        return Err(SimError::TooManyQubits { used: n, cap: 20 });
    }
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
    state[0] = Complex64::new(1.0, 0.0);
    for inst in &circuit.instructions {
        if inst.condition.is_some() {
            return Err(SimError::NonUnitary("conditional".into()));
        }
        match inst.gate {
            g if g.is_gate_1q() => apply_1q(&mut state, inst.qubits[0], &gate_matrix_1q(g)),
            Gate::Cx => apply_cx(&mut state, inst.qubits[0], inst.qubits[1]),
            Gate::Swap => apply_swap(&mut state, inst.qubits[0], inst.qubits[1]),
            Gate::Barrier | Gate::Delay { .. } => {}
            other => return Err(SimError::NonUnitary(format!("{other:?}"))),
        }
    }
    Ok(state)
}

/// Exact noiseless outcome distribution over classical bits, by branch
/// enumeration: every measure/reset splits the trajectory. Handles the
/// conditional circuits the trajectory engine runs, at the cost of up to
/// 2^(#measurements) branches (capped).
pub fn ideal_distribution(circuit: &Circuit) -> Result<BTreeMap<String, f64>, SimError> {
    const BRANCH_CAP: usize = 1 << 16;
    const PRUNE: f64 = 1e-14;

    let used = used_qubits(&circuit.instructions);
    let n = used.len();
    if n > 20 {
        return Err(SimError::TooManyQubits { used: n, cap: 20 });
    }
    let dense: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &q)| (q, i)).collect();

    struct Branch {
        state: Vec<Complex64>,
        clbits: Vec<bool>,
        prob: f64,
    }
    let mut init = vec![Complex64::new(0.0, 0.0); 1 << n];
    init[0] = Complex64::new(1.0, 0.0);
    let mut branches = vec![Branch {
        state: init,
        clbits: vec![false; circuit.num_clbits],
        prob: 1.0,
    }];

    for inst in &circuit.instructions {
        let mut next = Vec::with_capacity(branches.len());
        for mut branch in branches {
            if let Some(cond) = inst.condition {
                if branch.clbits[cond.bit] != cond.value {
                    next.push(branch);
                    continue;
                }
            }
            match inst.gate {
                g if g.is_gate_1q() => {
                    apply_1q(
                        &mut branch.state,
                        dense[&inst.qubits[0]],
                        &gate_matrix_1q(g),
                    );
                    next.push(branch);
                }
                Gate::Cx => {
                    apply_cx(
                        &mut branch.state,
                        dense[&inst.qubits[0]],
                        dense[&inst.qubits[1]],
                    );
                    next.push(branch);
                }
                Gate::Swap => {
                    apply_swap(
                        &mut branch.state,
                        dense[&inst.qubits[0]],
                        dense[&inst.qubits[1]],
                    );
                    next.push(branch);
                }
                Gate::Barrier | Gate::Delay { .. } => next.push(branch),
                Gate::Measure { clbit } => {
                    let q = dense[&inst.qubits[0]];
                    let p1 = prob_one(&branch.state, q);
                    for outcome in [false, true] {
                        let p = if outcome { p1 } else { 1.0 - p1 };
                        if p * branch.prob < PRUNE {
                            continue;
                        }
                        let mut state = branch.state.clone();
                        project(&mut state, q, outcome, p);
                        let mut clbits = branch.clbits.clone();
                        clbits[clbit] = outcome;
                        next.push(Branch {
                            state,
                            clbits,
                            prob: branch.prob * p,
                        });
                    }
                }
                Gate::Reset => {
                    let q = dense[&inst.qubits[0]];
                    let p1 = prob_one(&branch.state, q);
                    for outcome in [false, true] {
                        let p = if outcome { p1 } else { 1.0 - p1 };
                        if p * branch.prob < PRUNE {
                            continue;
                        }
                        let mut state = branch.state.clone();
                        project(&mut state, q, outcome, p);
                        if outcome {
                            apply_1q(&mut state, q, &PAULI_X);
                        }
                        next.push(Branch {
                            state,
                            clbits: branch.clbits.clone(),
                            prob: branch.prob * p,
                        });
                    }
                }
                other => unreachable!("covered by the 1Q guard: {other:?}"),
            }
        }
        if next.len() > BRANCH_CAP {
            return Err(SimError::TooManyBranches(next.len()));
        }
        branches = next;
    }

    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for branch in branches {
        let bits: String = branch
            .clbits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        *out.entry(bits).or_insert(0.0) += branch.prob;
    }
    Ok(out)
}

// --- statevector primitives ---

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

static PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
static PAULI_Y: Mat2 = [
    [ZERO, Complex64::new(0.0, -1.0)],
    [Complex64::new(0.0, 1.0), ZERO],
];
static PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];

fn gate_matrix_1q(gate: Gate) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        Gate::H => [
            [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ],
        Gate::X => PAULI_X,
        Gate::Y => PAULI_Y,
        Gate::Z => PAULI_Z,
        Gate::Sx => [
            [Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5)],
            [Complex64::new(0.5, -0.5), Complex64::new(0.5, 0.5)],
        ],
        Gate::Rx(t) => {
            let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
            [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ]
        }
        Gate::Ry(t) => {
            let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ]
        }
        Gate::Rz(t) => [
            [Complex64::from_polar(1.0, -t / 2.0), ZERO],
            [ZERO, Complex64::from_polar(1.0, t / 2.0)],
        ],
        other => unreachable!("not a 1q gate: {other:?}"),
    }
}

fn apply_1q(state: &mut [Complex64], q: usize, m: &Mat2) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            let a = state[i];
            let b = state[i | bit];
            state[i] = m[0][0] * a + m[0][1] * b;
            state[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_cx(state: &mut [Complex64], control: usize, target: usize) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..state.len() {
        if i & cb != 0 && i & tb == 0 {
            state.swap(i, i | tb);
        }
    }
}

fn apply_swap(state: &mut [Complex64], a: usize, b: usize) {
    let (ab, bb) = (1usize << a, 1usize << b);
    for i in 0..state.len() {
        if i & ab != 0 && i & bb == 0 {
            state.swap(i, (i & !ab) | bb);
        }
    }
}

fn apply_random_pauli(state: &mut [Complex64], q: usize, rng: &mut ChaCha8Rng) {
    match rng.gen_range(0..3) {
        0 => apply_1q(state, q, &PAULI_X),
        1 => apply_1q(state, q, &PAULI_Y),
        _ => apply_1q(state, q, &PAULI_Z),
    }
}

/// Apply Pauli index 1=X, 2=Y, 3=Z (0 = identity, skipped by callers).
fn apply_pauli_index(state: &mut [Complex64], q: usize, index: usize, _rng: &mut ChaCha8Rng) {
    match index {
        1 => apply_1q(state, q, &PAULI_X),
        2 => apply_1q(state, q, &PAULI_Y),
        3 => apply_1q(state, q, &PAULI_Z),
        _ => {}
    }
}

fn prob_one(state: &[Complex64], q: usize) -> f64 {
    let bit = 1usize << q;
    state
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

fn project(state: &mut [Complex64], q: usize, outcome: bool, prob: f64) {
    let bit = 1usize << q;
    let norm = prob.sqrt();
    for (i, amp) in state.iter_mut().enumerate() {
        let matches = (i & bit != 0) == outcome;
        if matches {
            *amp /= norm;
        } else {
            *amp = ZERO;
        }
    }
}

fn sample_and_project(state: &mut [Complex64], q: usize, rng: &mut ChaCha8Rng) -> bool {
    let p1 = prob_one(state, q);
    let outcome = rng.gen_bool(p1.clamp(0.0, 1.0));
    let p = if outcome { p1 } else { 1.0 - p1 };
    project(state, q, outcome, p.max(f64::MIN_POSITIVE));
    outcome
}
