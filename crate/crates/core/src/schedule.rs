//! ALAP timing assignment over device durations, idle-window extraction,
//! and context-aware dynamic-decoupling insertion into those windows.
//!
//! A measure immediately followed on its wire by a reset is scheduled as one
//! contiguous MCM window. ALAP pushes every instruction as late as its
//! successors allow, which parks idle time early in the timeline where DD
//! pulses can cover it.

use serde::{Deserialize, Serialize};

use crate::circuit::{build_dag, Circuit, Gate, Instruction};
use crate::device::DeviceModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledInstruction {
    pub instruction: Instruction,
    pub start: u64,
    pub duration: u64,
}

/// Maximal gap between two operations on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleWindow {
    pub start: u64,
    pub end: u64,
    /// Overlaps an MCM window somewhere on the device.
    pub concurrent_mcm: bool,
    /// Overlaps an MCM window on a coupled qubit.
    pub neighbor_of_mcm: bool,
    /// Received a DD pulse pair.
    pub dd: bool,
}

impl IdleWindow {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub num_qubits: usize,
    pub num_clbits: usize,
    /// Sorted by (start, original order).
    pub entries: Vec<ScheduledInstruction>,
    pub total_duration: u64,
    /// Per-qubit interior idle windows.
    pub idle_windows: Vec<Vec<IdleWindow>>,
    /// Per-qubit MCM window intervals (measure+reset units and bare
    /// mid-circuit measures), used for window flags and insertion rules.
    pub mcm_windows: Vec<Vec<(u64, u64)>>,
}

impl Schedule {
    /// Serialize the timeline back to a circuit, in time order.
    pub fn to_circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.num_qubits, self.num_clbits);
        for entry in &self.entries {
            c.push(entry.instruction.clone());
        }
        c
    }

    /// Structural validity: per-qubit non-overlap and dependency order.
    pub fn validate(&self) -> Result<(), String> {
        let circuit = self.to_circuit();
        let dag = build_dag(&circuit);
        for (u, succs) in dag.successors.iter().enumerate() {
            let end_u = self.entries[u].start + self.entries[u].duration;
            for &v in succs {
                if self.entries[v].start < end_u {
                    return Err(format!(
                        "dependency violated: entry {u} ends at {end_u}, successor {v} starts at {}",
                        self.entries[v].start
                    ));
                }
            }
        }
        let mut per_qubit: Vec<Vec<(u64, u64)>> = vec![Vec::new(); self.num_qubits];
        for entry in &self.entries {
            for &q in &entry.instruction.qubits {
                per_qubit[q].push((entry.start, entry.start + entry.duration));
            }
        }
        for (q, intervals) in per_qubit.iter_mut().enumerate() {
            intervals.sort_unstable();
            for pair in intervals.windows(2) {
                if pair[1].0 < pair[0].1 {
                    return Err(format!("qubit {q}: overlapping instructions at {pair:?}"));
                }
            }
        }
        for (q, windows) in self.idle_windows.iter().enumerate() {
            for w in windows {
                for &(s, e) in &per_qubit[q] {
                    if s < w.end && w.start < e && e - s > 0 {
                        // DD pulses inside the window are expected; anything
                        // else is a bookkeeping bug.
                        let is_dd = self.entries.iter().any(|entry| {
                            entry.start == s
                                && entry.instruction.qubits == vec![q]
                                && entry.instruction.label.as_deref() == Some("dd")
                        });
                        if !is_dd {
                            return Err(format!(
                                "qubit {q}: idle window {w:?} overlaps instruction at ({s},{e})"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn instruction_duration(inst: &Instruction, device: &DeviceModel) -> u64 {
    match inst.gate {
        g if g.is_gate_1q() => device.qubits[inst.qubits[0]].durations.gate_1q,
        Gate::Cx | Gate::Swap => inst
            .qubits
            .iter()
            .map(|&q| device.qubits[q].durations.gate_2q)
            .max()
            .unwrap_or(0),
        Gate::Measure { .. } => device.qubits[inst.qubits[0]].durations.measure,
        Gate::Reset => device.qubits[inst.qubits[0]].durations.reset,
        Gate::Barrier => 0,
        Gate::Delay { duration } => duration,
        other => unreachable!("covered by the 1Q guard: {other:?}"),
    }
}

/// Group a measure with an immediately following reset on the same wire.
/// Returns, per instruction, the unit id it belongs to, plus unit members.
fn fuse_mcm_units(circuit: &Circuit) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = circuit.instructions.len();
    let mut unit_of = vec![usize::MAX; n];
    let mut units: Vec<Vec<usize>> = Vec::new();
    // Next instruction on each wire.
    let mut next_on_wire = vec![None; n];
    let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    for (i, inst) in circuit.instructions.iter().enumerate() {
        for &q in &inst.qubits {
            if let Some(prev) = last_on_qubit[q] {
                if next_on_wire[prev].is_none() {
                    next_on_wire[prev] = Some(i);
                }
            }
            last_on_qubit[q] = Some(i);
        }
    }
    for i in 0..n {
        if unit_of[i] != usize::MAX {
            continue;
        }
        let inst = &circuit.instructions[i];
        let mut members = vec![i];
        if matches!(inst.gate, Gate::Measure { .. }) {
            if let Some(j) = next_on_wire[i] {
                let follower = &circuit.instructions[j];
                if matches!(follower.gate, Gate::Reset)
                    && follower.qubits == inst.qubits
                    && unit_of[j] == usize::MAX
                {
                    members.push(j);
                }
            }
        }
        let id = units.len();
        for &m in &members {
            unit_of[m] = id;
        }
        units.push(members);
    }
    (unit_of, units)
}

/// As-late-as-possible schedule: every instruction starts as late as its
/// successors permit; the total duration equals the critical path in time.
pub fn alap_schedule(circuit: &Circuit, device: &DeviceModel) -> Schedule {
    let n = circuit.instructions.len();
    let dag = build_dag(circuit);
    let (unit_of, units) = fuse_mcm_units(circuit);

    let durations: Vec<u64> = circuit
        .instructions
        .iter()
        .map(|i| instruction_duration(i, device))
        .collect();
    let unit_duration: Vec<u64> = units
        .iter()
        .map(|members| members.iter().map(|&m| durations[m]).sum())
        .collect();

    // Unit-level successor sets.
    let mut unit_succ: Vec<Vec<usize>> = vec![Vec::new(); units.len()];
    for u in 0..n {
        for &v in &dag.successors[u] {
            let (a, b) = (unit_of[u], unit_of[v]);
            if a != b && !unit_succ[a].contains(&b) {
                unit_succ[a].push(b);
            }
        }
    }

    let horizon: u64 = durations.iter().sum::<u64>() + 1;
    let mut unit_start = vec![0u64; units.len()];
    // Units are indexed in first-member program order, so reverse order is
    // a reverse topological order.
    for id in (0..units.len()).rev() {
        let end = unit_succ[id]
            .iter()
            .map(|&s| unit_start[s])
            .min()
            .unwrap_or(horizon);
        unit_start[id] = end - unit_duration[id];
    }
    let shift = unit_start.iter().copied().min().unwrap_or(0);

    let mut entries: Vec<ScheduledInstruction> = Vec::with_capacity(n);
    for (id, members) in units.iter().enumerate() {
        let mut t = unit_start[id] - shift;
        for &m in members {
            entries.push(ScheduledInstruction {
                instruction: circuit.instructions[m].clone(),
                start: t,
                duration: durations[m],
            });
            t += durations[m];
        }
    }
    entries.sort_by_key(|e| e.start);
    let total_duration = entries
        .iter()
        .map(|e| e.start + e.duration)
        .max()
        .unwrap_or(0);

    // MCM windows: fused measure+reset units and bare mid-circuit measures.
    let flags = circuit.mcm_flags();
    let mut mcm_windows: Vec<Vec<(u64, u64)>> = vec![Vec::new(); circuit.num_qubits];
    for (id, members) in units.iter().enumerate() {
        let first = &circuit.instructions[members[0]];
        let is_mcm_unit =
            matches!(first.gate, Gate::Measure { .. }) && (members.len() == 2 || flags[members[0]]);
        if is_mcm_unit {
            let start = unit_start[id] - shift;
            mcm_windows[first.qubits[0]].push((start, start + unit_duration[id]));
        }
    }

    let mut schedule = Schedule {
        num_qubits: circuit.num_qubits,
        num_clbits: circuit.num_clbits,
        entries,
        total_duration,
        idle_windows: vec![Vec::new(); circuit.num_qubits],
        mcm_windows,
    };
    schedule.idle_windows = find_idle_windows(&schedule, device);
    schedule
}

/// Interior gaps between consecutive operations on each qubit, flagged by
/// their overlap with MCM windows elsewhere on the device.
fn find_idle_windows(schedule: &Schedule, device: &DeviceModel) -> Vec<Vec<IdleWindow>> {
    let mut per_qubit: Vec<Vec<(u64, u64)>> = vec![Vec::new(); schedule.num_qubits];
    for entry in &schedule.entries {
        for &q in &entry.instruction.qubits {
            per_qubit[q].push((entry.start, entry.start + entry.duration));
        }
    }
    let all_mcm: Vec<(usize, u64, u64)> = schedule
        .mcm_windows
        .iter()
        .enumerate()
        .flat_map(|(q, ws)| ws.iter().map(move |&(s, e)| (q, s, e)))
        .collect();

    let mut out = vec![Vec::new(); schedule.num_qubits];
    for (q, intervals) in per_qubit.iter_mut().enumerate() {
        intervals.sort_unstable();
        let coupled = device.neighbors(q);
        for pair in intervals.windows(2) {
            let (gap_start, gap_end) = (pair[0].1, pair[1].0);
            if gap_end <= gap_start {
                continue;
            }
            let overlaps = |&(_, s, e): &(usize, u64, u64)| s < gap_end && gap_start < e;
            let concurrent_mcm = all_mcm.iter().any(|w| w.0 != q && overlaps(w));
            let neighbor_of_mcm = all_mcm
                .iter()
                .any(|w| coupled.contains(&w.0) && overlaps(w));
            out[q].push(IdleWindow {
                start: gap_start,
                end: gap_end,
                concurrent_mcm,
                neighbor_of_mcm,
                dd: false,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CaddConfig {
    /// Minimum window length for unconditional insertion; defaults to
    /// two-thirds of the qubit's MCM window.
    pub min_dd_window: Option<u64>,
    /// Padding kept free at each window edge; defaults to one 1Q duration.
    pub gap: Option<u64>,
}

/// Insert X-X decoupling pairs into idle windows:
/// - windows overlapping an MCM window on a coupled qubit get a pair as soon
///   as it fits (2 pulses + edge padding);
/// - other windows get a pair once they reach `min_dd_window`;
/// - a qubit's own measure/reset windows are never touched (interior windows
///   exclude them by construction);
/// - pulse centers on coupled, simultaneously idle qubits are staggered by
///   one pulse duration to break up symmetric ZZ accumulation.
///
/// The pulse count per window is even, so the net unitary is the identity.
pub fn cadd_insert(schedule: &Schedule, device: &DeviceModel, config: &CaddConfig) -> Schedule {
    let mut out = schedule.clone();
    let mut placed: Vec<(usize, u64, u64, u64)> = Vec::new(); // (qubit, center, w_start, w_end)
    let mut new_entries: Vec<ScheduledInstruction> = Vec::new();

    for q in 0..out.num_qubits {
        let d_x = device.qubits[q].durations.gate_1q;
        let gap = config.gap.unwrap_or(d_x);
        let min_dd = config
            .min_dd_window
            .unwrap_or(2 * device.qubits[q].durations.mcm_window() / 3);
        let coupled = device.neighbors(q);
        for w in &mut out.idle_windows[q] {
            let fits = w.len() >= 2 * d_x + 2 * gap;
            if !fits || !(w.neighbor_of_mcm || w.len() >= min_dd) {
                continue;
            }
            let mut center = (w.start + w.end) / 2;
            // Stagger against already-placed pairs on coupled qubits whose
            // windows overlap this one.
            let conflict = |c: u64, placed: &[(usize, u64, u64, u64)]| {
                placed.iter().any(|&(p, pc, ps, pe)| {
                    coupled.contains(&p) && ps < w.end && w.start < pe && c.abs_diff(pc) < d_x
                })
            };
            if conflict(center, &placed) {
                let fwd = center + d_x;
                let bwd = center.saturating_sub(d_x);
                if fwd + d_x + gap <= w.end && !conflict(fwd, &placed) {
                    center = fwd;
                } else if bwd >= w.start + gap + d_x && !conflict(bwd, &placed) {
                    center = bwd;
                }
            }
            debug_assert!(center - d_x >= w.start && center + d_x <= w.end);
            for (k, start) in [(0u64, center - d_x), (1, center)] {
                let _ = k;
                new_entries.push(ScheduledInstruction {
                    instruction: Instruction::new(Gate::X, vec![q]).with_label("dd"),
                    start,
                    duration: d_x,
                });
            }
            placed.push((q, center, w.start, w.end));
            w.dd = true;
        }
    }

    out.entries.extend(new_entries);
    out.entries.sort_by_key(|e| e.start);
    // Keep dependent zero-duration entries ahead of same-time starters.
    out.entries.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then((a.duration == 0).cmp(&(b.duration == 0)).reverse())
    });
    out
}

/// Reference forward scheduler used to cross-check ALAP durations.
pub fn asap_total_duration(circuit: &Circuit, device: &DeviceModel) -> u64 {
    let dag = build_dag(circuit);
    let (unit_of, units) = fuse_mcm_units(circuit);
    let durations: Vec<u64> = circuit
        .instructions
        .iter()
        .map(|i| instruction_duration(i, device))
        .collect();
    let unit_duration: Vec<u64> = units
        .iter()
        .map(|members| members.iter().map(|&m| durations[m]).sum())
        .collect();
    let mut unit_pred: Vec<Vec<usize>> = vec![Vec::new(); units.len()];
    for u in 0..circuit.instructions.len() {
        for &v in &dag.successors[u] {
            let (a, b) = (unit_of[u], unit_of[v]);
            if a != b && !unit_pred[b].contains(&a) {
                unit_pred[b].push(a);
            }
        }
    }
    let mut end = vec![0u64; units.len()];
    for id in 0..units.len() {
        let start = unit_pred[id].iter().map(|&p| end[p]).max().unwrap_or(0);
        end[id] = start + unit_duration[id];
    }
    end.into_iter().max().unwrap_or(0)
}
