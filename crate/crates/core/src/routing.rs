//! SABRE-style SWAP insertion with a two-level ranking: look-ahead coupling
//! distance first, and within a `delta_swap` band of the best distance, the
//! MCM exposure of the qubits a swap would relocate.
//!
//! The router walks the dependency DAG, emitting everything executable and
//! inserting SWAPs chosen from edges around the blocked front layer. When no
//! front-edge candidate improves the distance score it re-expands to the
//! 2-hop neighborhood, and as a last resort walks the lowest-index blocked
//! gate one step along a shortest path so progress never stalls silently.

use thiserror::Error;

use crate::circuit::{build_dag, Circuit, Gate, Instruction};
use crate::device::{distance_matrix, DeviceError, DeviceModel, DistanceMatrix};
use crate::layout::Layout;

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("routing exceeded {0} iterations")]
    RoutingStalled(usize),
    #[error("no swap candidates available")]
    NoCandidates,
    #[error("initial layout must map every logical qubit")]
    PartialLayout,
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingPolicy {
    /// Two-level ranking: distance, then MCM exposure within `delta_swap`.
    Mera,
    /// Pure distance ranking with index tie-breaks (ablation baseline).
    DistanceOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingConfig {
    pub look_ahead: usize,
    pub delta_swap: f64,
    pub max_iterations: usize,
    pub policy: RoutingPolicy,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig {
            look_ahead: 6,
            delta_swap: 0.008,
            max_iterations: 10_000,
            policy: RoutingPolicy::Mera,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapCandidate {
    pub edge: (usize, usize),
    pub level1_cost: f64,
    pub level2_cost: f64,
}

/// Distance score of a hypothetical swap on `edge`: the summed coupling
/// distance of the front-layer gates plus a 0.5-weighted sum over the
/// look-ahead window, evaluated with the swap's relocation applied.
pub fn level1_cost(
    edge: (usize, usize),
    front: &[(usize, usize)],
    window: &[(usize, usize)],
    layout: &Layout,
    distances: &DistanceMatrix,
) -> f64 {
    let relocate = |p: usize| {
        if p == edge.0 {
            edge.1
        } else if p == edge.1 {
            edge.0
        } else {
            p
        }
    };
    let gate_distance = |&(a, b): &(usize, usize)| {
        let pa = relocate(layout.phys(a).expect("total layout"));
        let pb = relocate(layout.phys(b).expect("total layout"));
        distances.get(pa, pb) as f64
    };
    front.iter().map(gate_distance).sum::<f64>()
        + 0.5 * window.iter().map(gate_distance).sum::<f64>()
}

/// MCM exposure of a swap: for each logical qubit it relocates, the product
/// of the qubit's not-yet-routed MCM intensity and the MCM error rate of its
/// destination physical qubit.
pub fn level2_cost(
    edge: (usize, usize),
    layout: &Layout,
    remaining_mcm: &[usize],
    device: &DeviceModel,
) -> f64 {
    let mut cost = 0.0;
    if let Some(q) = layout.logical_at(edge.0) {
        cost += remaining_mcm[q] as f64 * device.qubits[edge.1].mcm_error;
    }
    if let Some(q) = layout.logical_at(edge.1) {
        cost += remaining_mcm[q] as f64 * device.qubits[edge.0].mcm_error;
    }
    cost
}

/// Select a swap: shortlist the candidates whose distance score lies within
/// `delta_swap` of the minimum, then take the lowest MCM exposure, breaking
/// ties toward the lower edge index. The distance-only policy skips the
/// second level entirely.
pub fn pick_swap<'a>(
    candidates: &'a [SwapCandidate],
    config: &RoutingConfig,
) -> Result<&'a SwapCandidate, RoutingError> {
    if candidates.is_empty() {
        return Err(RoutingError::NoCandidates);
    }
    let min_level1 = candidates
        .iter()
        .map(|c| c.level1_cost)
        .fold(f64::INFINITY, f64::min);
    let chosen = match config.policy {
        RoutingPolicy::DistanceOnly => candidates
            .iter()
            .min_by(|a, b| {
                a.level1_cost
                    .partial_cmp(&b.level1_cost)
                    .unwrap()
                    .then(a.edge.cmp(&b.edge))
            })
            .unwrap(),
        RoutingPolicy::Mera => candidates
            .iter()
            .filter(|c| c.level1_cost <= min_level1 + config.delta_swap)
            .min_by(|a, b| {
                a.level2_cost
                    .partial_cmp(&b.level2_cost)
                    .unwrap()
                    .then(a.edge.cmp(&b.edge))
            })
            .unwrap(),
    };
    debug_assert!(
        chosen.level1_cost <= min_level1 + config.delta_swap
            || matches!(config.policy, RoutingPolicy::DistanceOnly)
    );
    Ok(chosen)
}

struct Router<'a> {
    circuit: &'a Circuit,
    device: &'a DeviceModel,
    distances: DistanceMatrix,
    config: RoutingConfig,
    layout: Layout,
    indegree: Vec<usize>,
    ready: Vec<usize>,
    successors: Vec<Vec<usize>>,
    remaining_mcm: Vec<usize>,
    mcm_flags: Vec<bool>,
    /// Next 2Q gate on each wire after a given 2Q gate, by instruction index.
    next_2q_on_wire: Vec<Vec<usize>>,
    out: Circuit,
}

impl<'a> Router<'a> {
    fn new(
        circuit: &'a Circuit,
        initial: &Layout,
        device: &'a DeviceModel,
        config: RoutingConfig,
    ) -> Result<Self, RoutingError> {
        if !initial.is_total() {
            return Err(RoutingError::PartialLayout);
        }
        let distances = distance_matrix(device)?;
        let dag = build_dag(circuit);
        let indegree: Vec<usize> = dag.predecessors.iter().map(Vec::len).collect();
        let ready: Vec<usize> = (0..dag.num_nodes).filter(|&v| indegree[v] == 0).collect();
        let mcm_flags = circuit.mcm_flags();
        let remaining_mcm = crate::circuit::mcm_intensity(circuit).0;

        // Wire-successor links between 2Q gates, for the look-ahead window.
        let mut last_2q_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
        let mut next_2q_on_wire: Vec<Vec<usize>> = vec![Vec::new(); circuit.instructions.len()];
        for (i, inst) in circuit.instructions.iter().enumerate() {
            if !inst.gate.is_gate_2q() {
                continue;
            }
            for &q in &inst.qubits {
                if let Some(prev) = last_2q_on_qubit[q] {
                    if !next_2q_on_wire[prev].contains(&i) {
                        next_2q_on_wire[prev].push(i);
                    }
                }
                last_2q_on_qubit[q] = Some(i);
            }
        }

        Ok(Router {
            circuit,
            device,
            distances,
            config,
            layout: initial.clone(),
            indegree,
            ready,
            successors: dag.successors,
            remaining_mcm,
            mcm_flags,
            next_2q_on_wire,
            out: Circuit::new(device.num_qubits, circuit.num_clbits),
        })
    }

    fn emit(&mut self, index: usize) {
        let inst = &self.circuit.instructions[index];
        let qubits: Vec<usize> = inst
            .qubits
            .iter()
            .map(|&q| self.layout.phys(q).expect("total layout"))
            .collect();
        self.out.push(Instruction {
            gate: inst.gate,
            qubits,
            condition: inst.condition,
            label: inst.label.clone(),
        });
        if self.mcm_flags[index] {
            self.remaining_mcm[inst.qubits[0]] -= 1;
        }
        self.ready.retain(|&v| v != index);
        for &s in &self.successors[index] {
            self.indegree[s] -= 1;
            if self.indegree[s] == 0 {
                self.ready.push(s);
            }
        }
        self.ready.sort_unstable();
    }

    fn executable(&self, index: usize) -> bool {
        let inst = &self.circuit.instructions[index];
        if !inst.gate.is_gate_2q() {
            return true;
        }
        let pa = self.layout.phys(inst.qubits[0]).unwrap();
        let pb = self.layout.phys(inst.qubits[1]).unwrap();
        self.device.has_edge(pa, pb)
    }

    /// Emit every ready instruction that can execute; repeat to exhaustion.
    fn drain(&mut self) {
        loop {
            let Some(&index) = self.ready.iter().find(|&&v| self.executable(v)) else {
                return;
            };
            self.emit(index);
        }
    }

    /// Blocked front layer as logical qubit pairs, ascending instruction index.
    fn front_pairs(&self) -> Vec<(usize, usize)> {
        self.ready
            .iter()
            .map(|&v| {
                let q = &self.circuit.instructions[v].qubits;
                (q[0], q[1])
            })
            .collect()
    }

    /// Look-ahead window: wire-successor 2Q gates up to `look_ahead` levels
    /// past the front layer.
    fn window_pairs(&self) -> Vec<(usize, usize)> {
        let mut seen: Vec<usize> = self.ready.clone();
        let mut level: Vec<usize> = self.ready.clone();
        let mut window = Vec::new();
        for _ in 0..self.config.look_ahead {
            let mut next_level = Vec::new();
            for &g in &level {
                for &s in &self.next_2q_on_wire[g] {
                    if !seen.contains(&s) {
                        seen.push(s);
                        next_level.push(s);
                    }
                }
            }
            next_level.sort_unstable();
            for &g in &next_level {
                let q = &self.circuit.instructions[g].qubits;
                window.push((q[0], q[1]));
            }
            level = next_level;
        }
        window
    }

    /// Coupling edges incident to the given physical qubits, deduplicated.
    fn edges_incident(&self, physical: &[usize]) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .device
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| physical.contains(&a) || physical.contains(&b))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn score_candidates(
        &self,
        edges: &[(usize, usize)],
        front: &[(usize, usize)],
        window: &[(usize, usize)],
    ) -> Vec<SwapCandidate> {
        edges
            .iter()
            .map(|&edge| SwapCandidate {
                edge,
                level1_cost: level1_cost(edge, front, window, &self.layout, &self.distances),
                level2_cost: level2_cost(edge, &self.layout, &self.remaining_mcm, self.device),
            })
            .collect()
    }

    fn run(mut self) -> Result<(Circuit, Layout), RoutingError> {
        let mut iterations = 0;
        loop {
            self.drain();
            if self.ready.is_empty() {
                return Ok((self.out, self.layout));
            }
            iterations += 1;
            if iterations > self.config.max_iterations {
                return Err(RoutingError::RoutingStalled(self.config.max_iterations));
            }

            let front = self.front_pairs();
            let window = self.window_pairs();
            let current = level1_cost(
                (usize::MAX, usize::MAX),
                &front,
                &window,
                &self.layout,
                &self.distances,
            );
            let front_physical: Vec<usize> = front
                .iter()
                .flat_map(|&(a, b)| [self.layout.phys(a).unwrap(), self.layout.phys(b).unwrap()])
                .collect();

            // Front-edge candidates, then the 2-hop re-expansion fallback.
            let mut candidates =
                self.score_candidates(&self.edges_incident(&front_physical), &front, &window);
            let improves = |cands: &[SwapCandidate]| cands.iter().any(|c| c.level1_cost < current);
            if !improves(&candidates) {
                let two_hop: Vec<usize> = (0..self.device.num_qubits)
                    .filter(|&p| {
                        front_physical
                            .iter()
                            .any(|&f| self.distances.get(f, p) <= 2)
                    })
                    .collect();
                candidates = self.score_candidates(&self.edges_incident(&two_hop), &front, &window);
            }

            if improves(&candidates) {
                let edge = pick_swap(&candidates, &self.config)?.edge;
                self.out
                    .push(Instruction::new(Gate::Swap, vec![edge.0, edge.1]));
                self.layout.swap_physical(edge.0, edge.1);
            } else {
                // Forced progress: no candidate lowers the distance score
                // (opposing gates cancel out), so walk the lowest-index
                // blocked gate to adjacency along a shortest path. A single
                // step would invite the next iteration to undo it; the full
                // walk guarantees one gate executes and can never unwind.
                let (a, b) = front[0];
                loop {
                    let (pa, pb) = (self.layout.phys(a).unwrap(), self.layout.phys(b).unwrap());
                    if self.distances.get(pa, pb) <= 1 {
                        break;
                    }
                    iterations += 1;
                    if iterations > self.config.max_iterations {
                        return Err(RoutingError::RoutingStalled(self.config.max_iterations));
                    }
                    let step = self
                        .device
                        .neighbors(pa)
                        .into_iter()
                        .find(|&n| self.distances.get(n, pb) == self.distances.get(pa, pb) - 1)
                        .expect("connected device has a shortest-path step");
                    let edge = (pa.min(step), pa.max(step));
                    self.out
                        .push(Instruction::new(Gate::Swap, vec![edge.0, edge.1]));
                    self.layout.swap_physical(edge.0, edge.1);
                }
            }
        }
    }
}

/// Route a logical circuit onto the device starting from a total layout.
/// Returns the physical circuit (SWAPs inserted, qubits relabeled) and the
/// final layout.
pub fn route(
    circuit: &Circuit,
    initial: &Layout,
    device: &DeviceModel,
    config: &RoutingConfig,
) -> Result<(Circuit, Layout), RoutingError> {
    Router::new(circuit, initial, device, *config)?.run()
}

/// Every 2Q gate of a routed circuit must sit on a coupling edge.
pub fn validate_routed(circuit: &Circuit, device: &DeviceModel) -> Result<(), String> {
    for (i, inst) in circuit.instructions.iter().enumerate() {
        if inst.gate.is_gate_2q() && !device.has_edge(inst.qubits[0], inst.qubits[1]) {
            return Err(format!(
                "instruction {i}: 2Q gate on uncoupled pair ({}, {})",
                inst.qubits[0], inst.qubits[1]
            ));
        }
    }
    Ok(())
}
