//! Gate-level IR for dynamic circuits: instructions with mid-circuit
//! measurement, reset, and single-bit classical conditions, plus the
//! dependency DAG and the static analyses consumed by layout and routing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Gate/operation kinds understood by the whole pipeline.
///
/// Angles are radians; delays are in device time units (ns).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    Sx,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cx,
    Swap,
    Measure { clbit: usize },
    Reset,
    Barrier,
    Delay { duration: u64 },
}

impl Gate {
    /// Expected qubit arity, or `None` for variable arity (Barrier).
    pub fn arity(&self) -> Option<usize> {
        match self {
            Gate::Cx | Gate::Swap => Some(2),
            Gate::Barrier => None,
            _ => Some(1),
        }
    }

    /// True for unitary one-qubit gates (H..Rz).
    pub fn is_gate_1q(&self) -> bool {
        matches!(
            self,
            Gate::H
                | Gate::X
                | Gate::Y
                | Gate::Z
                | Gate::Sx
                | Gate::Rx(_)
                | Gate::Ry(_)
                | Gate::Rz(_)
        )
    }

    /// True for unitary two-qubit gates (CX, SWAP).
    pub fn is_gate_2q(&self) -> bool {
        matches!(self, Gate::Cx | Gate::Swap)
    }

    /// Barrier and Delay are timing directives: they order the wire but do
    /// not count as operations for depth metrics or MCM detection.
    pub fn is_directive(&self) -> bool {
        matches!(self, Gate::Barrier | Gate::Delay { .. })
    }
}

/// Single-bit equality condition: execute iff `clbits[bit] == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub bit: usize,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub gate: Gate,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Instruction {
    pub fn new(gate: Gate, qubits: Vec<usize>) -> Self {
        Instruction {
            gate,
            qubits,
            condition: None,
            label: None,
        }
    }

    pub fn with_condition(mut self, bit: usize, value: bool) -> Self {
        self.condition = Some(Condition { bit, value });
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Classical bit written by this instruction, if any.
    pub fn writes_clbit(&self) -> Option<usize> {
        match self.gate {
            Gate::Measure { clbit } => Some(clbit),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("instruction {index}: gate expects {expected} qubit(s), got {got}")]
    ArityMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("instruction {index}: qubit index {qubit} out of range (num_qubits = {num_qubits})")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("instruction {index}: classical bit {clbit} out of range (num_clbits = {num_clbits})")]
    ClbitOutOfRange {
        index: usize,
        clbit: usize,
        num_clbits: usize,
    },
    #[error("instruction {index}: duplicate qubit operand {qubit}")]
    DuplicateQubit { index: usize, qubit: usize },
    #[error("instruction {index}: condition reads bit {bit} never written by an earlier measure")]
    ConditionNeverWritten { index: usize, bit: usize },
    #[error("instruction {index}: barrier must span at least one qubit")]
    EmptyBarrier { index: usize },
}

/// An ordered list of instructions over flat qubit/clbit index spaces.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            instructions: Vec::new(),
        }
    }

    pub fn push(&mut self, inst: Instruction) -> &mut Self {
        self.instructions.push(inst);
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::H, vec![q]))
    }
    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::X, vec![q]))
    }
    pub fn y(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Y, vec![q]))
    }
    pub fn z(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Z, vec![q]))
    }
    pub fn sx(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Sx, vec![q]))
    }
    pub fn rx(&mut self, theta: f64, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Rx(theta), vec![q]))
    }
    pub fn ry(&mut self, theta: f64, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Ry(theta), vec![q]))
    }
    pub fn rz(&mut self, theta: f64, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Rz(theta), vec![q]))
    }
    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Cx, vec![control, target]))
    }
    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Swap, vec![a, b]))
    }
    pub fn measure(&mut self, q: usize, clbit: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Measure { clbit }, vec![q]))
    }
    pub fn reset(&mut self, q: usize) -> &mut Self {
        self.push(Instruction::new(Gate::Reset, vec![q]))
    }
    pub fn barrier(&mut self, qubits: Vec<usize>) -> &mut Self {
        self.push(Instruction::new(Gate::Barrier, qubits))
    }
    pub fn delay(&mut self, q: usize, duration: u64) -> &mut Self {
        self.push(Instruction::new(Gate::Delay { duration }, vec![q]))
    }

    /// Check all structural invariants. Analyses assume this has passed.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut written = vec![false; self.num_clbits];
        for (index, inst) in self.instructions.iter().enumerate() {
            if let Some(expected) = inst.gate.arity() {
                if inst.qubits.len() != expected {
                    return Err(CircuitError::ArityMismatch {
                        index,
                        expected,
                        got: inst.qubits.len(),
                    });
                }
            } else if inst.qubits.is_empty() {
                return Err(CircuitError::EmptyBarrier { index });
            }
            for (i, &q) in inst.qubits.iter().enumerate() {
                if q >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        qubit: q,
                        num_qubits: self.num_qubits,
                    });
                }
                if inst.qubits[..i].contains(&q) {
                    return Err(CircuitError::DuplicateQubit { index, qubit: q });
                }
            }
            if let Some(cond) = inst.condition {
                if cond.bit >= self.num_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        index,
                        clbit: cond.bit,
                        num_clbits: self.num_clbits,
                    });
                }
                if !written[cond.bit] {
                    return Err(CircuitError::ConditionNeverWritten {
                        index,
                        bit: cond.bit,
                    });
                }
            }
            if let Some(clbit) = inst.writes_clbit() {
                if clbit >= self.num_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        index,
                        clbit,
                        num_clbits: self.num_clbits,
                    });
                }
                written[clbit] = true;
            }
        }
        Ok(())
    }

    /// Indices of instructions that are mid-circuit measurements: a Measure
    /// is an MCM iff the qubit is used again afterwards, by a gate or a
    /// reset. Later measures alone do not count (no reuse happens), which
    /// keeps the intensity invariant under appended terminal readout.
    pub fn mcm_flags(&self) -> Vec<bool> {
        let mut last_reuse = vec![None; self.num_qubits];
        for (index, inst) in self.instructions.iter().enumerate() {
            if inst.gate.is_directive() || matches!(inst.gate, Gate::Measure { .. }) {
                continue;
            }
            for &q in &inst.qubits {
                last_reuse[q] = Some(index);
            }
        }
        self.instructions
            .iter()
            .enumerate()
            .map(|(index, inst)| {
                matches!(inst.gate, Gate::Measure { .. })
                    && last_reuse[inst.qubits[0]].is_some_and(|last| last > index)
            })
            .collect()
    }
}

/// Dependency DAG over instruction indices. Edges connect consecutive
/// instructions that share a qubit, or that touch the same classical bit
/// (a measure writing it or a condition reading it).
#[derive(Debug, Clone)]
pub struct DependencyDag {
    pub num_nodes: usize,
    pub successors: Vec<Vec<usize>>,
    pub predecessors: Vec<Vec<usize>>,
}

impl DependencyDag {
    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }
}

/// Build the dependency DAG of a well-formed circuit.
pub fn build_dag(circuit: &Circuit) -> DependencyDag {
    let n = circuit.instructions.len();
    let mut successors = vec![Vec::new(); n];
    let mut predecessors = vec![Vec::new(); n];
    let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    let mut last_on_clbit: Vec<Option<usize>> = vec![None; circuit.num_clbits];

    let link = |u: usize, v: usize, succ: &mut Vec<Vec<usize>>, pred: &mut Vec<Vec<usize>>| {
        if !succ[u].contains(&v) {
            succ[u].push(v);
            pred[v].push(u);
        }
    };

    for (v, inst) in circuit.instructions.iter().enumerate() {
        for &q in &inst.qubits {
            if let Some(u) = last_on_qubit[q] {
                link(u, v, &mut successors, &mut predecessors);
            }
            last_on_qubit[q] = Some(v);
        }
        let mut clbits = Vec::new();
        if let Some(cond) = inst.condition {
            clbits.push(cond.bit);
        }
        if let Some(w) = inst.writes_clbit() {
            if !clbits.contains(&w) {
                clbits.push(w);
            }
        }
        for b in clbits {
            if let Some(u) = last_on_clbit[b] {
                if u != v {
                    link(u, v, &mut successors, &mut predecessors);
                }
            }
            last_on_clbit[b] = Some(v);
        }
    }
    DependencyDag {
        num_nodes: n,
        successors,
        predecessors,
    }
}

/// Logical interaction graph: one node per qubit, edge multiplicity equal
/// to the number of two-qubit gates between the pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    pub num_qubits: usize,
    /// Keyed by (min, max) qubit pair.
    pub edges: BTreeMap<(usize, usize), usize>,
}

impl InteractionGraph {
    /// Total two-qubit-gate participation of `q` (sum of incident multiplicities).
    pub fn degree(&self, q: usize) -> usize {
        self.edges
            .iter()
            .filter(|((a, b), _)| *a == q || *b == q)
            .map(|(_, m)| m)
            .sum()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.edges.values().sum()
    }

    /// Interaction-graph neighbors of `q`.
    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in self.edges.keys() {
            if a == q {
                out.push(b);
            } else if b == q {
                out.push(a);
            }
        }
        out
    }
}

pub fn interaction_graph(circuit: &Circuit) -> InteractionGraph {
    let mut edges = BTreeMap::new();
    for inst in &circuit.instructions {
        if inst.gate.is_gate_2q() {
            let (a, b) = (inst.qubits[0], inst.qubits[1]);
            let key = (a.min(b), a.max(b));
            *edges.entry(key).or_insert(0) += 1;
        }
    }
    InteractionGraph {
        num_qubits: circuit.num_qubits,
        edges,
    }
}

/// Per-logical-qubit count of mid-circuit measurements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McmIntensity(pub Vec<usize>);

impl McmIntensity {
    pub fn of(&self, q: usize) -> usize {
        self.0[q]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

pub fn mcm_intensity(circuit: &Circuit) -> McmIntensity {
    let flags = circuit.mcm_flags();
    let mut counts = vec![0usize; circuit.num_qubits];
    for (inst, &is_mcm) in circuit.instructions.iter().zip(&flags) {
        if is_mcm {
            counts[inst.qubits[0]] += 1;
        }
    }
    McmIntensity(counts)
}

/// Longest instruction-count path through the DAG. Barrier and Delay are
/// excluded from the count but still order the wire; Measure and Reset count.
pub fn critical_path_length(circuit: &Circuit) -> usize {
    let dag = build_dag(circuit);
    let mut best = vec![0usize; dag.num_nodes];
    let mut max = 0;
    for v in 0..dag.num_nodes {
        let weight = if circuit.instructions[v].gate.is_directive() {
            0
        } else {
            1
        };
        let from_preds = dag.predecessors[v]
            .iter()
            .map(|&u| best[u])
            .max()
            .unwrap_or(0);
        best[v] = from_preds + weight;
        max = max.max(best[v]);
    }
    max
}

pub fn count_swaps(circuit: &Circuit) -> usize {
    circuit
        .instructions
        .iter()
        .filter(|inst| matches!(inst.gate, Gate::Swap))
        .count()
}

/// Two-qubit gates grouped into precedence layers: a gate's layer is one
/// past the deepest layer among earlier 2Q gates sharing a qubit. Layer 0
/// is the 2Q front layer. Used by the layout cost's distance term.
pub fn two_qubit_layers(circuit: &Circuit) -> Vec<Vec<(usize, usize)>> {
    let mut depth_on_qubit = vec![0usize; circuit.num_qubits];
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for inst in &circuit.instructions {
        if !inst.gate.is_gate_2q() {
            continue;
        }
        let (a, b) = (inst.qubits[0], inst.qubits[1]);
        let layer = depth_on_qubit[a].max(depth_on_qubit[b]);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push((a, b));
        depth_on_qubit[a] = layer + 1;
        depth_on_qubit[b] = layer + 1;
    }
    layers
}

/// Per-qubit operation counts used by the layout cost: 1Q gates, 2Q gate
/// endpoints, and readout (measure) operations.
#[derive(Debug, Clone, Default)]
pub struct OpCounts {
    pub n_1q: Vec<usize>,
    pub n_2q: Vec<usize>,
    pub n_ro: Vec<usize>,
}

pub fn op_counts(circuit: &Circuit) -> OpCounts {
    let mut counts = OpCounts {
        n_1q: vec![0; circuit.num_qubits],
        n_2q: vec![0; circuit.num_qubits],
        n_ro: vec![0; circuit.num_qubits],
    };
    for inst in &circuit.instructions {
        match inst.gate {
            g if g.is_gate_1q() => counts.n_1q[inst.qubits[0]] += 1,
            g if g.is_gate_2q() => {
                counts.n_2q[inst.qubits[0]] += 1;
                counts.n_2q[inst.qubits[1]] += 1;
            }
            Gate::Measure { .. } => counts.n_ro[inst.qubits[0]] += 1,
            _ => {}
        }
    }
    counts
}

/// Everything the layout stage needs to know about a circuit, computed once.
#[derive(Debug, Clone)]
pub struct CircuitAnalysis {
    pub interaction: InteractionGraph,
    pub intensity: McmIntensity,
    pub layers_2q: Vec<Vec<(usize, usize)>>,
    pub counts: OpCounts,
    pub num_qubits: usize,
}

impl CircuitAnalysis {
    pub fn of(circuit: &Circuit) -> Self {
        CircuitAnalysis {
            interaction: interaction_graph(circuit),
            intensity: mcm_intensity(circuit),
            layers_2q: two_qubit_layers(circuit),
            counts: op_counts(circuit),
            num_qubits: circuit.num_qubits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv_reuse_4_2() -> Circuit {
        // Fig 1(a) shape: one slot qubit reused for three inputs against a target.
        crate::bench::gen_benchmark(&crate::bench::BenchmarkSpec::BvReuse {
            logical: 4,
            physical: 2,
        })
        .unwrap()
    }

    #[test]
    fn empty_circuit_has_empty_dag() {
        let c = Circuit::new(0, 0);
        let dag = build_dag(&c);
        assert_eq!(dag.num_nodes, 0);
        assert_eq!(dag.edge_count(), 0);
    }

    #[test]
    fn shared_qubit_chain() {
        let mut c = Circuit::new(2, 0);
        c.h(0).cx(0, 1).h(1);
        let dag = build_dag(&c);
        assert_eq!(dag.successors[0], vec![1]);
        assert_eq!(dag.successors[1], vec![2]);
        assert!(dag.successors[2].is_empty());
    }

    #[test]
    fn condition_depends_on_measure() {
        let mut c = Circuit::new(2, 1);
        c.h(0).measure(0, 0);
        c.push(Instruction::new(Gate::X, vec![1]).with_condition(0, true));
        let dag = build_dag(&c);
        assert_eq!(dag.successors[1], vec![2]);
        c.validate().unwrap();
    }

    #[test]
    fn validate_rejects_condition_before_write() {
        let mut c = Circuit::new(2, 1);
        c.push(Instruction::new(Gate::X, vec![1]).with_condition(0, true));
        assert_eq!(
            c.validate(),
            Err(CircuitError::ConditionNeverWritten { index: 0, bit: 0 })
        );
    }

    #[test]
    fn validate_rejects_bad_arity_and_ranges() {
        let mut c = Circuit::new(1, 0);
        c.push(Instruction::new(Gate::Cx, vec![0]));
        assert!(matches!(
            c.validate(),
            Err(CircuitError::ArityMismatch { .. })
        ));

        let mut c = Circuit::new(1, 0);
        c.h(3);
        assert!(matches!(
            c.validate(),
            Err(CircuitError::QubitOutOfRange { .. })
        ));

        let mut c = Circuit::new(2, 0);
        c.push(Instruction::new(Gate::Cx, vec![1, 1]));
        assert!(matches!(
            c.validate(),
            Err(CircuitError::DuplicateQubit { .. })
        ));
    }

    #[test]
    fn interaction_graph_multiplicity() {
        let c = bv_reuse_4_2();
        let g = interaction_graph(&c);
        assert_eq!(g.edges.len(), 1, "single reused pair");
        assert_eq!(
            g.edges.values().copied().next(),
            Some(3),
            "reused three times"
        );
    }

    #[test]
    fn interaction_graph_edgeless_and_path() {
        let mut c = Circuit::new(3, 0);
        c.h(0).x(1).z(2);
        assert!(interaction_graph(&c).edges.is_empty());

        let mut ghz = Circuit::new(4, 4);
        ghz.h(0).cx(0, 1).cx(1, 2).cx(2, 3);
        for q in 0..4 {
            ghz.measure(q, q);
        }
        let g = interaction_graph(&ghz);
        assert_eq!(g.edges.len(), 3);
        assert!(g.edges.values().all(|&m| m == 1));
        assert_eq!(g.total_multiplicity(), 3);
    }

    #[test]
    fn mcm_intensity_terminal_only_is_zero() {
        let mut c = Circuit::new(2, 2);
        c.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
        assert_eq!(mcm_intensity(&c).0, vec![0, 0]);
    }

    #[test]
    fn mcm_intensity_bv_reuse() {
        let c = bv_reuse_4_2();
        let intensity = mcm_intensity(&c);
        assert_eq!(intensity.of(0), 2, "two MCM stages on the reused qubit");
        assert_eq!(intensity.of(1), 0);
    }

    #[test]
    fn mcm_intensity_profiling_circuit() {
        // X; measure; reset; measure — the first measure is the only MCM.
        let mut c = Circuit::new(1, 2);
        c.x(0).measure(0, 0).reset(0).measure(0, 1);
        assert_eq!(mcm_intensity(&c).0, vec![1]);
    }

    #[test]
    fn mcm_intensity_invariant_under_appended_terminal_measures() {
        let mut c = bv_reuse_4_2();
        let before = mcm_intensity(&c);
        let clbits = c.num_clbits;
        c.num_clbits += 2;
        c.measure(0, clbits).measure(1, clbits + 1);
        // The previously-terminal measures stay terminal per qubit; the new
        // final measures are terminal too.
        assert_eq!(mcm_intensity(&c).0, before.0);
    }

    #[test]
    fn critical_path_basics() {
        let mut c = Circuit::new(1, 0);
        c.h(0);
        assert_eq!(critical_path_length(&c), 1);

        let mut chain = Circuit::new(1, 0);
        for _ in 0..17 {
            chain.x(0);
        }
        assert_eq!(critical_path_length(&chain), 17);

        // Directives order the wire but do not count.
        let mut d = Circuit::new(1, 0);
        d.h(0).delay(0, 100).x(0);
        d.barrier(vec![0]);
        d.x(0);
        assert_eq!(critical_path_length(&d), 3);
    }

    #[test]
    fn count_swaps_counts_only_swaps() {
        let mut c = Circuit::new(5, 0);
        for i in 0..7 {
            c.swap(i % 4, i % 4 + 1);
        }
        c.cx(0, 1).h(2);
        assert_eq!(count_swaps(&c), 7);
        assert_eq!(count_swaps(&Circuit::new(3, 0)), 0);
    }

    #[test]
    fn two_qubit_layers_group_by_precedence() {
        let mut c = Circuit::new(4, 0);
        c.cx(0, 1).cx(2, 3).cx(1, 2).cx(0, 1);
        let layers = two_qubit_layers(&c);
        assert_eq!(layers[0], vec![(0, 1), (2, 3)]);
        assert_eq!(layers[1], vec![(1, 2)]);
        assert_eq!(layers[2], vec![(0, 1)]);
    }

    #[test]
    fn op_counts_by_kind() {
        let mut c = Circuit::new(2, 2);
        c.h(0).h(0).cx(0, 1).measure(0, 0).reset(0).measure(1, 1);
        let counts = op_counts(&c);
        assert_eq!(counts.n_1q, vec![2, 0]);
        assert_eq!(counts.n_2q, vec![1, 1]);
        assert_eq!(counts.n_ro, vec![1, 1]);
    }

    #[test]
    fn dag_topological_replay_preserves_unitary() {
        // Replaying instructions in any topological order of the DAG must
        // give the same statevector as program order (unitary circuits).
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};

        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let mut c = Circuit::new(n, 0);
            for _ in 0..20 {
                match rng.gen_range(0..5) {
                    0 => {
                        c.h(rng.gen_range(0..n));
                    }
                    1 => {
                        c.sx(rng.gen_range(0..n));
                    }
                    2 => {
                        c.rz(rng.gen_range(0.0..6.28), rng.gen_range(0..n));
                    }
                    3 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + rng.gen_range(1..n)) % n;
                        c.cx(a, b);
                    }
                    _ => {
                        let a = rng.gen_range(0..n);
                        let b = (a + rng.gen_range(1..n)) % n;
                        c.swap(a, b);
                    }
                }
            }
            let dag = build_dag(&c);
            let order = random_topological_order(&dag, &mut rng);
            let mut replayed = Circuit::new(n, 0);
            for &i in &order {
                replayed.push(c.instructions[i].clone());
            }
            let a = crate::sim::statevector(&c).unwrap();
            let b = crate::sim::statevector(&replayed).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).norm() < 1e-9);
            }
        }
    }

    fn random_topological_order(dag: &DependencyDag, rng: &mut impl rand::Rng) -> Vec<usize> {
        let mut indegree: Vec<usize> = dag.predecessors.iter().map(Vec::len).collect();
        let mut ready: Vec<usize> = (0..dag.num_nodes).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(dag.num_nodes);
        while !ready.is_empty() {
            let pick = rng.gen_range(0..ready.len());
            let v = ready.swap_remove(pick);
            order.push(v);
            for &s in &dag.successors[v] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.push(s);
                }
            }
        }
        assert_eq!(order.len(), dag.num_nodes);
        order
    }
}
