//! MCM-error-aware initial placement: composite seed scoring, greedy BFS
//! expansion over the coupling graph driven by an incremental cost, variant
//! generation by intensity/connectivity reordering, and final selection by
//! the full layout cost.
//!
//! All cost functions expect a device whose MCM errors have already been
//! threshold-normalized (`device::normalize_mcm`), so sub-threshold rates do
//! not drown out the distance and connectivity terms.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitAnalysis, McmIntensity};
use crate::device::{distance_matrix, normalize_mcm, DeviceError, DeviceModel, DistanceMatrix};

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("physical qubit {0} already hosts a logical qubit")]
    OccupiedPhysical(usize),
    #[error("logical qubit {0} is already mapped")]
    AlreadyMapped(usize),
    #[error("device has {physical} qubits, circuit needs {logical}")]
    DeviceTooSmall { logical: usize, physical: usize },
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// Injective partial map from logical to physical qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    log_to_phys: Vec<Option<usize>>,
    phys_to_log: Vec<Option<usize>>,
}

impl Layout {
    pub fn empty(num_logical: usize, num_physical: usize) -> Self {
        Layout {
            log_to_phys: vec![None; num_logical],
            phys_to_log: vec![None; num_physical],
        }
    }

    /// Identity placement of the first `num_logical` physical qubits.
    pub fn trivial(num_logical: usize, num_physical: usize) -> Self {
        let mut layout = Layout::empty(num_logical, num_physical);
        for q in 0..num_logical {
            layout
                .assign(q, q)
                .expect("identity placement is injective");
        }
        layout
    }

    pub fn assign(&mut self, logical: usize, physical: usize) -> Result<(), LayoutError> {
        if self.log_to_phys[logical].is_some() {
            return Err(LayoutError::AlreadyMapped(logical));
        }
        if self.phys_to_log[physical].is_some() {
            return Err(LayoutError::OccupiedPhysical(physical));
        }
        self.log_to_phys[logical] = Some(physical);
        self.phys_to_log[physical] = Some(logical);
        Ok(())
    }

    pub fn phys(&self, logical: usize) -> Option<usize> {
        self.log_to_phys[logical]
    }

    pub fn logical_at(&self, physical: usize) -> Option<usize> {
        self.phys_to_log[physical]
    }

    pub fn is_total(&self) -> bool {
        self.log_to_phys.iter().all(Option::is_some)
    }

    pub fn num_logical(&self) -> usize {
        self.log_to_phys.len()
    }

    pub fn num_physical(&self) -> usize {
        self.phys_to_log.len()
    }

    pub fn mapped_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.log_to_phys
            .iter()
            .enumerate()
            .filter_map(|(q, p)| p.map(|p| (q, p)))
    }

    pub fn mapped_physical(&self) -> Vec<usize> {
        self.mapped_pairs().map(|(_, p)| p).collect()
    }

    /// The logical-to-physical table, for serialization.
    pub fn logical_to_physical(&self) -> &[Option<usize>] {
        &self.log_to_phys
    }

    /// Exchange the logical occupants of two physical qubits (either may be
    /// empty). This is what a routed SWAP does to the mapping.
    pub fn swap_physical(&mut self, pa: usize, pb: usize) {
        let (la, lb) = (self.phys_to_log[pa], self.phys_to_log[pb]);
        self.phys_to_log[pa] = lb;
        self.phys_to_log[pb] = la;
        if let Some(q) = la {
            self.log_to_phys[q] = Some(pb);
        }
        if let Some(q) = lb {
            self.log_to_phys[q] = Some(pa);
        }
    }
}

/// Weights of the composite seed score.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SeedWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for SeedWeights {
    fn default() -> Self {
        SeedWeights {
            alpha: 0.25,
            beta: 0.25,
            gamma: 0.1,
            delta: 0.2,
            epsilon: 0.2,
        }
    }
}

/// Weights and knobs of the layout cost.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LayoutWeights {
    pub w_dist: f64,
    pub w_mcm: f64,
    pub w_2q: f64,
    pub w_1q: f64,
    pub w_ro: f64,
    pub look_ahead: usize,
    pub tau_mcm: f64,
    pub n_seed: usize,
}

impl Default for LayoutWeights {
    fn default() -> Self {
        LayoutWeights {
            w_dist: 0.45,
            w_mcm: 0.2,
            w_2q: 0.2,
            w_1q: 0.05,
            w_ro: 0.1,
            look_ahead: 6,
            tau_mcm: 0.02,
            n_seed: 4,
        }
    }
}

/// Cost of hosting logical qubit `q` on physical qubit `p`: MCM intensity
/// times the (normalized) per-qubit MCM error rate.
pub fn mcm_cost(q: usize, p: usize, intensity: &McmIntensity, device: &DeviceModel) -> f64 {
    intensity.of(q) as f64 * device.qubits[p].mcm_error
}

/// Rank physical qubits by the composite seed score, descending; ties break
/// toward the lower index. Connectivity is degree over the device maximum,
/// so every term lies in [0, 1].
pub fn seed_scores(device: &DeviceModel, weights: &SeedWeights) -> Vec<(usize, f64)> {
    let max_degree = device.max_degree().max(1) as f64;
    let mut scored: Vec<(usize, f64)> = (0..device.num_qubits)
        .map(|p| {
            let cal = &device.qubits[p];
            let score = weights.alpha * (1.0 - cal.mcm_error)
                + weights.beta * (1.0 - device.mean_e2q(p))
                + weights.gamma * (1.0 - cal.e1q)
                + weights.delta * (1.0 - cal.readout_error)
                + weights.epsilon * (device.degree(p) as f64 / max_degree);
            (p, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored
}

/// Distance term: coupling distance summed over the two-qubit gates of the
/// first `look_ahead` layers whose endpoints are both mapped.
fn sabre_distance(
    layout: &Layout,
    analysis: &CircuitAnalysis,
    distances: &DistanceMatrix,
    look_ahead: usize,
) -> f64 {
    let mut total = 0.0;
    for layer in analysis.layers_2q.iter().take(look_ahead) {
        for &(a, b) in layer {
            if let (Some(pa), Some(pb)) = (layout.phys(a), layout.phys(b)) {
                total += distances.get(pa, pb) as f64;
            }
        }
    }
    total
}

/// Full layout cost: weighted distance term plus, per mapped pair, the MCM
/// cost and the 2Q/1Q/readout error loads of the operations landing there.
pub fn layout_cost(
    layout: &Layout,
    analysis: &CircuitAnalysis,
    device: &DeviceModel,
    distances: &DistanceMatrix,
    weights: &LayoutWeights,
) -> f64 {
    let mut cost = weights.w_dist * sabre_distance(layout, analysis, distances, weights.look_ahead);
    for (q, p) in layout.mapped_pairs() {
        let cal = &device.qubits[p];
        cost += weights.w_mcm * mcm_cost(q, p, &analysis.intensity, device)
            + weights.w_2q * analysis.counts.n_2q[q] as f64 * device.mean_e2q(p)
            + weights.w_1q * analysis.counts.n_1q[q] as f64 * cal.e1q
            + weights.w_ro * analysis.counts.n_ro[q] as f64 * cal.readout_error;
    }
    cost
}

/// Cost of extending a partial layout with the pair (q_u, p_v): the layout
/// cost of the extended mapping, by definition.
pub fn incremental_cost(
    layout: &Layout,
    q_u: usize,
    p_v: usize,
    analysis: &CircuitAnalysis,
    device: &DeviceModel,
    distances: &DistanceMatrix,
    weights: &LayoutWeights,
) -> Result<f64, LayoutError> {
    let mut extended = layout.clone();
    extended.assign(q_u, p_v)?;
    Ok(layout_cost(&extended, analysis, device, distances, weights))
}

/// Logical qubits in expansion order: interaction degree descending, then
/// MCM intensity descending, then index.
fn expansion_order(analysis: &CircuitAnalysis) -> Vec<usize> {
    let mut order: Vec<usize> = (0..analysis.num_qubits).collect();
    order.sort_by_key(|&q| {
        (
            std::cmp::Reverse(analysis.interaction.degree(q)),
            std::cmp::Reverse(analysis.intensity.of(q)),
            q,
        )
    });
    order
}

/// Free physical qubits within 1..=2 hops of the mapped set.
fn frontier_candidates(
    layout: &Layout,
    device: &DeviceModel,
    distances: &DistanceMatrix,
) -> Vec<usize> {
    let mapped = layout.mapped_physical();
    let mut out = Vec::new();
    for p in 0..device.num_qubits {
        if layout.logical_at(p).is_some() {
            continue;
        }
        let near = mapped.iter().any(|&m| distances.get(m, p) <= 2);
        if near {
            out.push(p);
        }
    }
    out
}

/// Greedy BFS expansion from one seed qubit. Qubits whose interaction
/// neighbors are all unmapped (or whose 2-hop frontier is exhausted) are
/// deferred to a shortest-path bridging pass that keeps the layout total.
pub fn expand_from_seed(
    seed: usize,
    analysis: &CircuitAnalysis,
    device: &DeviceModel,
    distances: &DistanceMatrix,
    weights: &LayoutWeights,
) -> Result<Layout, LayoutError> {
    if analysis.num_qubits > device.num_qubits {
        return Err(LayoutError::DeviceTooSmall {
            logical: analysis.num_qubits,
            physical: device.num_qubits,
        });
    }
    let order = expansion_order(analysis);
    let mut layout = Layout::empty(analysis.num_qubits, device.num_qubits);
    let Some(&first) = order.first() else {
        return Ok(layout);
    };
    layout.assign(first, seed)?;
    let mut remaining: Vec<usize> = order[1..].to_vec();

    loop {
        let next = remaining.iter().position(|&q| {
            analysis
                .interaction
                .neighbors(q)
                .iter()
                .any(|&n| layout.phys(n).is_some())
        });
        let Some(pos) = next else { break };
        let q = remaining[pos];
        let candidates = frontier_candidates(&layout, device, distances);
        if candidates.is_empty() {
            break;
        }
        let best = candidates
            .into_iter()
            .map(|p| {
                let cost = incremental_cost(&layout, q, p, analysis, device, distances, weights)
                    .expect("candidate is free");
                (cost, p)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
            .map(|(_, p)| p)
            .expect("nonempty candidates");
        layout.assign(q, best)?;
        remaining.remove(pos);
    }

    // Bridging: nearest free qubit to the mapped set, incremental cost as
    // the tie-break.
    for q in remaining {
        let mapped = layout.mapped_physical();
        let best = (0..device.num_qubits)
            .filter(|&p| layout.logical_at(p).is_none())
            .map(|p| {
                let hops = mapped
                    .iter()
                    .map(|&m| distances.get(m, p))
                    .min()
                    .unwrap_or(0);
                let cost = incremental_cost(&layout, q, p, analysis, device, distances, weights)
                    .expect("candidate is free");
                (hops, cost, p)
            })
            .min_by(|a, b| {
                a.0.cmp(&b.0)
                    .then(a.1.partial_cmp(&b.1).unwrap())
                    .then(a.2.cmp(&b.2))
            })
            .map(|(_, _, p)| p)
            .expect("device is large enough");
        layout.assign(q, best)?;
    }
    Ok(layout)
}

/// Intra-candidate permutations over the same physical set:
/// (1) MCM-aware: higher-intensity logical qubits onto lower-MCM-error
///     physical qubits;
/// (2) connectivity-aware: higher 2Q participation onto higher-degree
///     physical qubits.
/// Tie orders follow the candidate's own pairing, so a fully tied reorder
/// reproduces the input; duplicates are removed. The candidate itself is
/// returned first.
pub fn generate_variants(
    candidate: &Layout,
    analysis: &CircuitAnalysis,
    device: &DeviceModel,
) -> Vec<Layout> {
    let pairs: Vec<(usize, usize)> = candidate.mapped_pairs().collect();
    let err = |p: usize| device.qubits[p].mcm_error;

    let build = |logical_order: Vec<usize>, physical_order: Vec<usize>| -> Layout {
        let mut layout = Layout::empty(candidate.num_logical(), candidate.num_physical());
        for (&q, &p) in logical_order.iter().zip(&physical_order) {
            layout
                .assign(q, p)
                .expect("permutation of an injective map");
        }
        layout
    };

    // MCM-aware reordering.
    let mut phys_by_err: Vec<usize> = pairs.iter().map(|&(_, p)| p).collect();
    phys_by_err.sort_by(|&a, &b| err(a).partial_cmp(&err(b)).unwrap().then(a.cmp(&b)));
    let mut logical_by_intensity: Vec<(usize, usize)> = pairs.clone();
    logical_by_intensity.sort_by(|&(qa, pa), &(qb, pb)| {
        analysis
            .intensity
            .of(qb)
            .cmp(&analysis.intensity.of(qa))
            .then(err(pa).partial_cmp(&err(pb)).unwrap())
            .then(pa.cmp(&pb))
    });
    let mcm_variant = build(
        logical_by_intensity.iter().map(|&(q, _)| q).collect(),
        phys_by_err,
    );

    // Connectivity-aware reordering.
    let mut phys_by_degree: Vec<usize> = pairs.iter().map(|&(_, p)| p).collect();
    phys_by_degree.sort_by(|&a, &b| device.degree(b).cmp(&device.degree(a)).then(a.cmp(&b)));
    let mut logical_by_2q: Vec<(usize, usize)> = pairs.clone();
    logical_by_2q.sort_by(|&(qa, pa), &(qb, pb)| {
        analysis.counts.n_2q[qb]
            .cmp(&analysis.counts.n_2q[qa])
            .then(device.degree(pb).cmp(&device.degree(pa)))
            .then(pa.cmp(&pb))
    });
    let conn_variant = build(
        logical_by_2q.iter().map(|&(q, _)| q).collect(),
        phys_by_degree,
    );

    let mut out = vec![candidate.clone()];
    for variant in [mcm_variant, conn_variant] {
        if !out.contains(&variant) {
            out.push(variant);
        }
    }
    out
}

/// All candidate layouts select_layout chooses from, in generation order:
/// for each of the top-N seeds, the BFS expansion plus its variants.
pub fn layout_candidates(
    circuit: &Circuit,
    device: &DeviceModel,
    seed_weights: &SeedWeights,
    weights: &LayoutWeights,
) -> Result<(Vec<Layout>, CircuitAnalysis, DeviceModel), LayoutError> {
    if circuit.num_qubits > device.num_qubits {
        return Err(LayoutError::DeviceTooSmall {
            logical: circuit.num_qubits,
            physical: device.num_qubits,
        });
    }
    let normalized = normalize_mcm(device, weights.tau_mcm);
    let distances = distance_matrix(&normalized)?;
    let analysis = CircuitAnalysis::of(circuit);
    let seeds = seed_scores(&normalized, seed_weights);
    let mut pool = Vec::new();
    for &(seed, _) in seeds.iter().take(weights.n_seed.max(1)) {
        let candidate = expand_from_seed(seed, &analysis, &normalized, &distances, weights)?;
        pool.extend(generate_variants(&candidate, &analysis, &normalized));
    }
    Ok((pool, analysis, normalized))
}

/// Seed scoring, expansion, variant generation, and argmin selection.
/// Deterministic: ties resolve to the first candidate in generation order.
pub fn select_layout(
    circuit: &Circuit,
    device: &DeviceModel,
    seed_weights: &SeedWeights,
    weights: &LayoutWeights,
) -> Result<Layout, LayoutError> {
    let (pool, analysis, normalized) = layout_candidates(circuit, device, seed_weights, weights)?;
    let distances = distance_matrix(&normalized)?;
    let best = pool
        .into_iter()
        .map(|layout| {
            let cost = layout_cost(&layout, &analysis, &normalized, &distances, weights);
            (cost, layout)
        })
        .reduce(|acc, item| if item.0 < acc.0 { item } else { acc })
        .map(|(_, layout)| layout)
        .expect("at least one seed expansion");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::mcm_intensity;
    use crate::device::{make_heavy_hex, Preset};

    /// Seven-qubit H-shaped device with hand-set calibration, used by the
    /// formula tests.
    pub(crate) fn hex7() -> DeviceModel {
        let mut model = DeviceModel::uniform(
            "hex7",
            7,
            vec![(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)],
        );
        let mcm = [0.010, 0.015, 0.050, 0.008, 0.030, 0.012, 0.020];
        let e1q = [0.0002, 0.0003, 0.0005, 0.0001, 0.0004, 0.0002, 0.0003];
        let ro = [0.01, 0.02, 0.015, 0.01, 0.025, 0.012, 0.018];
        for (i, q) in model.qubits.iter_mut().enumerate() {
            q.mcm_error = mcm[i];
            q.e1q = e1q[i];
            q.readout_error = ro[i];
        }
        model.e2q = vec![0.008, 0.012, 0.006, 0.010, 0.014, 0.009];
        model.validate().unwrap();
        model
    }

    #[test]
    fn mcm_cost_is_the_product() {
        let device = normalize_mcm(&hex7(), 0.02);
        let intensity = McmIntensity(vec![3, 0]);
        assert_eq!(mcm_cost(0, 0, &intensity, &device), 3.0 * 0.02);
        assert_eq!(
            mcm_cost(1, 2, &intensity, &device),
            0.0,
            "zero intensity is free anywhere"
        );
        // Cost ratio between two placements equals the error ratio.
        let r = mcm_cost(0, 2, &intensity, &device) / mcm_cost(0, 4, &intensity, &device);
        assert!((r - 0.05 / 0.03).abs() < 1e-12);
    }

    #[test]
    fn seed_ranking_uniform_errors_follows_degree() {
        let device = make_heavy_hex(Preset::Line(5));
        let ranked = seed_scores(&device, &SeedWeights::default());
        // Interior qubits (degree 2) outrank the endpoints; ties by index.
        let order: Vec<usize> = ranked.iter().map(|&(p, _)| p).collect();
        assert_eq!(order, vec![1, 2, 3, 0, 4]);
    }

    #[test]
    fn seed_ranking_dominant_qubit_wins_without_connectivity() {
        let mut device = make_heavy_hex(Preset::Line(4));
        for q in &mut device.qubits {
            q.mcm_error = 0.05;
            q.e1q = 0.001;
            q.readout_error = 0.02;
        }
        device.qubits[3].mcm_error = 0.02;
        device.qubits[3].e1q = 0.0001;
        device.qubits[3].readout_error = 0.005;
        let weights = SeedWeights {
            epsilon: 0.0,
            ..SeedWeights::default()
        };
        let ranked = seed_scores(&device, &weights);
        assert_eq!(ranked[0].0, 3);
    }

    #[test]
    fn normalization_prefers_connectivity_between_equalized_qubits() {
        // Two sub-threshold qubits: p3 (err 0.8%, degree 2) and p6
        // (err 1.0%, degree 1). Normalization equalizes their MCM scores at
        // tau, so p3 outranks p6 on connectivity.
        let device = normalize_mcm(&hex7(), 0.02);
        assert_eq!(device.qubits[3].mcm_error, 0.02);
        assert_eq!(device.qubits[6].mcm_error, 0.02);
        let ranked = seed_scores(&device, &SeedWeights::default());
        let pos = |p: usize| ranked.iter().position(|&(x, _)| x == p).unwrap();
        assert!(
            pos(3) < pos(6),
            "better-connected qubit must outrank the equal-error leaf: {ranked:?}"
        );
    }

    fn two_qubit_case() -> (Circuit, CircuitAnalysis) {
        let mut c = Circuit::new(2, 3);
        c.h(0)
            .cx(0, 1)
            .h(0)
            .measure(0, 0)
            .reset(0)
            .h(0)
            .cx(0, 1)
            .measure(0, 1)
            .measure(1, 2);
        let analysis = CircuitAnalysis::of(&c);
        (c, analysis)
    }

    #[test]
    fn layout_cost_hand_computed() {
        let (_, analysis) = two_qubit_case();
        assert_eq!(analysis.counts.n_1q, vec![3, 0]);
        assert_eq!(analysis.counts.n_2q, vec![2, 2]);
        assert_eq!(analysis.counts.n_ro, vec![2, 1]);
        assert_eq!(mcm_intensity(&two_qubit_case().0).0, vec![1, 0]);

        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();

        let mut layout = Layout::empty(2, 7);
        layout.assign(0, 1).unwrap();
        layout.assign(1, 3).unwrap();
        // Both CX layers land on the coupled pair (1,3): distance term
        // 0.45 * 2. Frozen expected value computed independently.
        let cost = layout_cost(&layout, &analysis, &device, &distances, &weights);
        assert!(
            (cost - 0.915_711_666_666_666_7).abs() / cost < 1e-12,
            "cost = {cost}"
        );

        // Partial layout: unmapped gates contribute no distance.
        let mut partial = Layout::empty(2, 7);
        partial.assign(0, 1).unwrap();
        let cost = layout_cost(&partial, &analysis, &device, &distances, &weights);
        assert!(
            (cost - 0.011_511_666_666_666_667).abs() / cost < 1e-12,
            "cost = {cost}"
        );
    }

    #[test]
    fn layout_cost_single_qubit_circuit_has_no_distance_term() {
        let mut c = Circuit::new(1, 1);
        c.h(0).h(0).measure(0, 0);
        let analysis = CircuitAnalysis::of(&c);
        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let mut layout = Layout::empty(1, 7);
        layout.assign(0, 4).unwrap();
        let cost = layout_cost(&layout, &analysis, &device, &distances, &weights);
        let expected = 0.05 * 2.0 * 0.0004 + 0.1 * 1.0 * 0.025;
        assert!((cost - expected).abs() < 1e-15);
    }

    #[test]
    fn adjacent_cx_contributes_unit_distance() {
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1);
        let analysis = CircuitAnalysis::of(&c);
        let mut device = make_heavy_hex(Preset::Line(3));
        device.qubits.iter_mut().for_each(|q| q.mcm_error = 0.0);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let mut layout = Layout::empty(2, 3);
        layout.assign(0, 0).unwrap();
        layout.assign(1, 1).unwrap();
        let cost = layout_cost(&layout, &analysis, &device, &distances, &weights);
        assert!((cost - 0.45).abs() < 1e-15);
    }

    #[test]
    fn incremental_cost_is_exactly_cost_of_extension() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};

        let (_, analysis) = two_qubit_case();
        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let mut rng = StdRng::seed_from_u64(2024);
        for _ in 0..200 {
            let mut layout = Layout::empty(2, 7);
            let q_mapped = rng.gen_range(0..2);
            if rng.gen_bool(0.5) {
                layout.assign(q_mapped, rng.gen_range(0..7)).unwrap();
            }
            let q_new = (0..2).find(|&q| layout.phys(q).is_none()).unwrap();
            let p_new =
                (0..7).find(|&p| layout.logical_at(p).is_none()).unwrap() + rng.gen_range(0..3);
            let p_new = (0..7)
                .filter(|&p| layout.logical_at(p).is_none())
                .nth(p_new % 6)
                .unwrap();
            let inc = incremental_cost(
                &layout, q_new, p_new, &analysis, &device, &distances, &weights,
            )
            .unwrap();
            let mut extended = layout.clone();
            extended.assign(q_new, p_new).unwrap();
            let full = layout_cost(&extended, &analysis, &device, &distances, &weights);
            assert_eq!(inc, full, "incremental cost must equal the recomputed cost");
        }
    }

    #[test]
    fn incremental_cost_errors() {
        let (_, analysis) = two_qubit_case();
        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let mut layout = Layout::empty(2, 7);
        layout.assign(0, 1).unwrap();
        assert!(matches!(
            incremental_cost(&layout, 0, 2, &analysis, &device, &distances, &weights),
            Err(LayoutError::AlreadyMapped(0))
        ));
        assert!(matches!(
            incremental_cost(&layout, 1, 1, &analysis, &device, &distances, &weights),
            Err(LayoutError::OccupiedPhysical(1))
        ));
    }

    #[test]
    fn worse_mcm_qubit_gives_larger_increment() {
        let mut c = Circuit::new(1, 2);
        c.x(0).measure(0, 0).reset(0).measure(0, 1);
        let analysis = CircuitAnalysis::of(&c);
        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let layout = Layout::empty(1, 7);
        let best =
            incremental_cost(&layout, 0, 3, &analysis, &device, &distances, &weights).unwrap();
        let worst =
            incremental_cost(&layout, 0, 2, &analysis, &device, &distances, &weights).unwrap();
        assert!(
            worst > best,
            "placing the MCM qubit on the worst error must cost more"
        );
    }

    #[test]
    fn expansion_single_qubit_takes_the_seed() {
        let mut c = Circuit::new(1, 1);
        c.h(0).measure(0, 0);
        let analysis = CircuitAnalysis::of(&c);
        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let layout =
            expand_from_seed(4, &analysis, &device, &distances, &LayoutWeights::default()).unwrap();
        assert_eq!(layout.phys(0), Some(4));
        assert!(layout.is_total());
    }

    #[test]
    fn expansion_two_qubit_line_identity_from_end_seed() {
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1);
        let analysis = CircuitAnalysis::of(&c);
        let device = make_heavy_hex(Preset::Line(4));
        let distances = distance_matrix(&device).unwrap();
        let layout =
            expand_from_seed(0, &analysis, &device, &distances, &LayoutWeights::default()).unwrap();
        assert_eq!(layout.phys(0), Some(0));
        assert_eq!(layout.phys(1), Some(1));
    }

    #[test]
    fn expansion_chain_from_middle_seed_is_brute_force_optimal() {
        // CX chain on a line device: expansion from a middle seed keeps
        // every interacting pair adjacent, matching the exhaustive optimum.
        let mut c = Circuit::new(3, 0);
        c.cx(0, 1).cx(1, 2);
        let analysis = CircuitAnalysis::of(&c);
        let device = make_heavy_hex(Preset::Line(5));
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let layout = expand_from_seed(2, &analysis, &device, &distances, &weights).unwrap();
        let got = layout_cost(&layout, &analysis, &device, &distances, &weights);
        let best = brute_force_min_cost(&analysis, &device, &distances, &weights);
        assert!(
            (got - best).abs() < 1e-12,
            "expansion cost {got} vs optimal {best}"
        );
        // Order-preserving adjacent embedding.
        let (p0, p1, p2) = (
            layout.phys(0).unwrap(),
            layout.phys(1).unwrap(),
            layout.phys(2).unwrap(),
        );
        assert_eq!(distances.get(p0, p1), 1);
        assert_eq!(distances.get(p1, p2), 1);
    }

    /// Minimum layout cost over every total injective placement.
    pub(crate) fn brute_force_min_cost(
        analysis: &CircuitAnalysis,
        device: &DeviceModel,
        distances: &DistanceMatrix,
        weights: &LayoutWeights,
    ) -> f64 {
        fn recurse(
            assignment: &mut Vec<usize>,
            used: &mut Vec<bool>,
            best: &mut f64,
            analysis: &CircuitAnalysis,
            device: &DeviceModel,
            distances: &DistanceMatrix,
            weights: &LayoutWeights,
        ) {
            if assignment.len() == analysis.num_qubits {
                let mut layout = Layout::empty(analysis.num_qubits, device.num_qubits);
                for (q, &p) in assignment.iter().enumerate() {
                    layout.assign(q, p).unwrap();
                }
                let cost = layout_cost(&layout, analysis, device, distances, weights);
                if cost < *best {
                    *best = cost;
                }
                return;
            }
            for p in 0..device.num_qubits {
                if !used[p] {
                    used[p] = true;
                    assignment.push(p);
                    recurse(assignment, used, best, analysis, device, distances, weights);
                    assignment.pop();
                    used[p] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        recurse(
            &mut Vec::new(),
            &mut vec![false; device.num_qubits],
            &mut best,
            analysis,
            device,
            distances,
            weights,
        );
        best
    }

    #[test]
    fn expansion_bridges_disconnected_components() {
        // Ten logical qubits in five disjoint interacting pairs: every pair
        // after the first starts with no mapped interaction neighbor, so
        // bridging must finish the layout.
        let mut c = Circuit::new(10, 0);
        for i in 0..5 {
            c.cx(2 * i, 2 * i + 1);
        }
        let analysis = CircuitAnalysis::of(&c);
        let device = make_heavy_hex(Preset::Eagle127);
        let distances = distance_matrix(&device).unwrap();
        let layout =
            expand_from_seed(0, &analysis, &device, &distances, &LayoutWeights::default()).unwrap();
        assert!(layout.is_total());
        let mapped = layout.mapped_physical();
        let mut unique = mapped.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), 10, "layout stays injective");
    }

    #[test]
    fn variants_correct_swapped_pair_pathology() {
        // Intensive qubit parked on the bad physical qubit: the MCM-aware
        // variant strictly lowers the cost.
        let mut c = Circuit::new(2, 3);
        c.cx(0, 1)
            .measure(0, 0)
            .reset(0)
            .cx(0, 1)
            .measure(0, 1)
            .measure(1, 2);
        let analysis = CircuitAnalysis::of(&c);
        let device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();

        let mut bad = Layout::empty(2, 7);
        bad.assign(0, 2).unwrap(); // intensity 1 onto the worst MCM error
        bad.assign(1, 1).unwrap();
        let variants = generate_variants(&bad, &analysis, &device);
        let bad_cost = layout_cost(&bad, &analysis, &device, &distances, &weights);
        let improved = variants
            .iter()
            .map(|v| layout_cost(v, &analysis, &device, &distances, &weights))
            .fold(f64::INFINITY, f64::min);
        assert!(
            improved < bad_cost,
            "a reordering variant must strictly improve"
        );
    }

    #[test]
    fn variants_identity_on_ties_and_dedup() {
        let mut c = Circuit::new(2, 2);
        c.cx(0, 1).measure(0, 0).measure(1, 1);
        let analysis = CircuitAnalysis::of(&c);
        let mut device = make_heavy_hex(Preset::Line(3));
        device.qubits.iter_mut().for_each(|q| q.mcm_error = 0.02);
        // Zero MCM intensity everywhere and fully tied stats: both variants
        // collapse onto the candidate and are deduplicated.
        let mut candidate = Layout::empty(2, 3);
        candidate.assign(0, 1).unwrap();
        candidate.assign(1, 2).unwrap();
        let variants = generate_variants(&candidate, &analysis, &device);
        // Degrees differ on a line, so the connectivity variant may move
        // qubits; the MCM variant must be the identity here.
        assert_eq!(variants[0], candidate);
        assert!(variants.len() <= 3);
        let mcm_variant_present = variants.iter().skip(1).any(|v| v == &candidate);
        assert!(
            !mcm_variant_present,
            "duplicates of the candidate are removed"
        );
    }

    #[test]
    fn select_layout_two_qubit_device() {
        let mut c = Circuit::new(2, 2);
        c.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
        let mut device = make_heavy_hex(Preset::Line(2));
        device.qubits[0].readout_error = 0.05;
        device.qubits[1].readout_error = 0.01;
        let layout = select_layout(
            &c,
            &device,
            &SeedWeights::default(),
            &LayoutWeights::default(),
        )
        .unwrap();
        assert!(layout.is_total());
        // q0 carries two 1Q ops and one measure; both orientations route
        // identically, the cheaper readout assignment wins.
        let distances = distance_matrix(&device).unwrap();
        let analysis = CircuitAnalysis::of(&c);
        let weights = LayoutWeights::default();
        let cost = layout_cost(&layout, &analysis, &device, &distances, &weights);
        let best = brute_force_min_cost(&analysis, &device, &distances, &weights);
        assert!((cost - best).abs() < 1e-12);
    }

    #[test]
    fn select_layout_too_small_device() {
        let mut c = Circuit::new(3, 0);
        c.cx(0, 1).cx(1, 2);
        let device = make_heavy_hex(Preset::Line(2));
        assert!(matches!(
            select_layout(
                &c,
                &device,
                &SeedWeights::default(),
                &LayoutWeights::default()
            ),
            Err(LayoutError::DeviceTooSmall { .. })
        ));
    }

    #[test]
    fn normalization_invariance_of_selection() {
        // Devices differing only in sub-threshold MCM errors select the
        // same layout.
        let mut c = Circuit::new(2, 3);
        c.h(0)
            .cx(0, 1)
            .measure(0, 0)
            .reset(0)
            .cx(0, 1)
            .measure(0, 1)
            .measure(1, 2);
        let base = hex7();
        let mut tweaked = base.clone();
        for q in &mut tweaked.qubits {
            if q.mcm_error < 0.02 {
                q.mcm_error = (q.mcm_error * 0.5).max(0.001);
            }
        }
        let sw = SeedWeights::default();
        let lw = LayoutWeights::default();
        let a = select_layout(&c, &base, &sw, &lw).unwrap();
        let b = select_layout(&c, &tweaked, &sw, &lw).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalization_avoids_swap_costly_reordering() {
        // Hub p5 (degree 3, MCM 1.8%) vs leaf p6 (degree 1, MCM 0.1%), both
        // below threshold. Without normalization the tiny raw difference
        // drags the MCM-heavy qubit onto the leaf, where two of its three
        // partners sit two hops out and routing must insert SWAPs; with
        // normalization both rates flatten to tau and connectivity wins.
        let mut device = DeviceModel::uniform(
            "hub-leaf",
            7,
            vec![(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)],
        );
        for q in &mut device.qubits {
            q.mcm_error = 0.03;
            q.readout_error = 0.01;
        }
        device.qubits[5].mcm_error = 0.018;
        device.qubits[6].mcm_error = 0.001;
        device.e2q = vec![0.01; 6];

        let mut c = Circuit::new(4, 5);
        for _ in 0..3 {
            c.cx(0, 1).cx(0, 2).cx(0, 3);
        }
        for _ in 0..700 {
            c.measure(0, 0).reset(0);
        }
        for q in 0..4 {
            c.measure(q, 1 + q);
        }
        c.validate().unwrap();
        assert_eq!(mcm_intensity(&c).of(0), 700);

        let sw = SeedWeights::default();
        let normalized_pick = select_layout(&c, &device, &sw, &LayoutWeights::default()).unwrap();
        assert_eq!(
            normalized_pick.phys(0),
            Some(5),
            "normalization keeps the hub"
        );

        let raw = LayoutWeights {
            tau_mcm: 0.0,
            ..LayoutWeights::default()
        };
        let raw_pick = select_layout(&c, &device, &sw, &raw).unwrap();
        assert_eq!(
            raw_pick.phys(0),
            Some(6),
            "raw sub-threshold rates lure it to the leaf"
        );

        let config = crate::routing::RoutingConfig::default();
        let (routed_norm, _) =
            crate::routing::route(&c, &normalized_pick, &device, &config).unwrap();
        let (routed_raw, _) = crate::routing::route(&c, &raw_pick, &device, &config).unwrap();
        assert_eq!(crate::circuit::count_swaps(&routed_norm), 0);
        assert!(
            crate::circuit::count_swaps(&routed_raw) > 0,
            "the leaf placement must cost extra swaps"
        );
    }

    #[test]
    fn mcm_monotonicity_of_layout_cost() {
        // Raising one physical qubit's MCM error never lowers the cost of a
        // layout hosting an MCM-intensive qubit there.
        let (_, analysis) = two_qubit_case();
        let mut device = normalize_mcm(&hex7(), 0.02);
        let distances = distance_matrix(&device).unwrap();
        let weights = LayoutWeights::default();
        let mut layout = Layout::empty(2, 7);
        layout.assign(0, 4).unwrap();
        layout.assign(1, 5).unwrap();
        let before = layout_cost(&layout, &analysis, &device, &distances, &weights);
        device.qubits[4].mcm_error += 0.1;
        let after = layout_cost(&layout, &analysis, &device, &distances, &weights);
        assert!(after >= before);
    }

    #[test]
    fn selection_is_deterministic() {
        let mut c = Circuit::new(3, 3);
        c.h(0)
            .cx(0, 1)
            .cx(1, 2)
            .measure(0, 0)
            .measure(1, 1)
            .measure(2, 2);
        let device = crate::device::synth_error_map(
            Preset::SmallHex,
            5,
            &crate::device::SynthProfile::eagle(),
        )
        .unwrap();
        let sw = SeedWeights::default();
        let lw = LayoutWeights::default();
        let first = select_layout(&c, &device, &sw, &lw).unwrap();
        for _ in 0..5 {
            assert_eq!(select_layout(&c, &device, &sw, &lw).unwrap(), first);
        }
    }
}
