//! Hardware abstraction: coupling topology, per-qubit/per-edge calibration
//! (including mid-circuit-measurement error), hop distances, MCM error
//! normalization, and synthetic error-map generation.
//!
//! Calibration files are JSON with explicit units (`docs/calibration-schema.md`);
//! all times are nanoseconds, all errors are probabilities.

use std::collections::VecDeque;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("schema error in field '{field}': {reason}")]
    Schema { field: String, reason: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("coupling graph is disconnected")]
    DisconnectedDevice,
    #[error("unknown device preset '{0}'")]
    UnknownPreset(String),
    #[error("invalid synthesis profile: {0}")]
    InvalidProfile(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Operation durations for one qubit, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    pub gate_1q: u64,
    pub gate_2q: u64,
    pub measure: u64,
    pub reset: u64,
}

impl Durations {
    /// The MCM window is a measure followed by its reset.
    pub fn mcm_window(&self) -> u64 {
        self.measure + self.reset
    }
}

impl Default for Durations {
    fn default() -> Self {
        Durations {
            gate_1q: 32,
            gate_2q: 300,
            measure: 800,
            reset: 600,
        }
    }
}

/// Per-qubit calibration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub mcm_error: f64,
    pub e1q: f64,
    pub readout_error: f64,
    pub t1: f64,
    pub t2: f64,
    pub durations: Durations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub name: String,
    /// Profile timestamp, seconds since the Unix epoch (staleness metadata).
    pub profiled_at: u64,
    pub time_unit: String,
    pub num_qubits: usize,
    /// Unordered coupling edges, stored with the smaller index first.
    pub edges: Vec<(usize, usize)>,
    pub qubits: Vec<QubitCalibration>,
    /// Two-qubit gate error per coupling edge, aligned with `edges`.
    pub e2q: Vec<f64>,
}

impl DeviceModel {
    /// Uniform-calibration device over the given topology.
    pub fn uniform(name: &str, num_qubits: usize, edges: Vec<(usize, usize)>) -> Self {
        let edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let n_edges = edges.len();
        DeviceModel {
            name: name.to_string(),
            profiled_at: 0,
            time_unit: "ns".to_string(),
            num_qubits,
            edges,
            qubits: vec![
                QubitCalibration {
                    mcm_error: 0.0,
                    e1q: 0.0,
                    readout_error: 0.0,
                    t1: 200_000.0,
                    t2: 150_000.0,
                    durations: Durations::default(),
                };
                num_qubits
            ],
            e2q: vec![0.0; n_edges],
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.qubits.len() != self.num_qubits {
            return Err(DeviceError::Schema {
                field: "qubits".into(),
                reason: format!(
                    "expected {} entries, got {}",
                    self.num_qubits,
                    self.qubits.len()
                ),
            });
        }
        if self.e2q.len() != self.edges.len() {
            return Err(DeviceError::Schema {
                field: "e2q".into(),
                reason: format!(
                    "expected {} entries, got {}",
                    self.edges.len(),
                    self.e2q.len()
                ),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &self.edges {
            if a == b {
                return Err(DeviceError::InvariantViolation(format!(
                    "self-loop on qubit {a}"
                )));
            }
            if a >= self.num_qubits || b >= self.num_qubits {
                return Err(DeviceError::InvariantViolation(format!(
                    "edge ({a},{b}) out of range"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(DeviceError::InvariantViolation(format!(
                    "duplicate edge ({a},{b})"
                )));
            }
        }
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        for (i, q) in self.qubits.iter().enumerate() {
            if !prob(q.mcm_error) || !prob(q.e1q) || !prob(q.readout_error) {
                return Err(DeviceError::InvariantViolation(format!(
                    "qubit {i}: error rates must lie in [0,1]"
                )));
            }
            if q.t2 > 2.0 * q.t1 {
                return Err(DeviceError::InvariantViolation(format!(
                    "qubit {i}: T2 = {} exceeds 2*T1 = {}",
                    q.t2,
                    2.0 * q.t1
                )));
            }
            let d = q.durations;
            if d.gate_1q == 0 || d.gate_2q == 0 || d.measure == 0 || d.reset == 0 {
                return Err(DeviceError::InvariantViolation(format!(
                    "qubit {i}: durations must be positive"
                )));
            }
        }
        for (i, &e) in self.e2q.iter().enumerate() {
            if !prob(e) {
                return Err(DeviceError::InvariantViolation(format!(
                    "edge {i}: e2q must lie in [0,1]"
                )));
            }
        }
        Ok(())
    }

    pub fn degree(&self, p: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == p || b == p)
            .count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_qubits)
            .map(|p| self.degree(p))
            .max()
            .unwrap_or(0)
    }

    pub fn neighbors(&self, p: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == p {
                    Some(b)
                } else if b == p {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.contains(&key)
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().position(|&e| e == key)
    }

    /// Two-qubit error rate of the edge (a, b); 0 for uncoupled pairs.
    pub fn edge_e2q(&self, a: usize, b: usize) -> f64 {
        self.edge_index(a, b).map(|i| self.e2q[i]).unwrap_or(0.0)
    }

    /// Qubit-level two-qubit error: mean over incident edges.
    pub fn mean_e2q(&self, p: usize) -> f64 {
        let incident: Vec<f64> = self
            .edges
            .iter()
            .zip(&self.e2q)
            .filter(|(&(a, b), _)| a == p || b == p)
            .map(|(_, &e)| e)
            .collect();
        if incident.is_empty() {
            0.0
        } else {
            incident.iter().sum::<f64>() / incident.len() as f64
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DeviceModel, DeviceError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<DeviceModel, DeviceError> {
        let model: DeviceModel = serde_json::from_str(text).map_err(|e| DeviceError::Schema {
            field: "<document>".into(),
            reason: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DeviceError> {
        self.validate()?;
        let text = serde_json::to_string_pretty(self).expect("device model serializes");
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Threshold-normalize MCM errors: rates at or below `tau_mcm` are raised to
/// it, higher rates pass through. Other calibration fields are untouched.
pub fn normalize_mcm(model: &DeviceModel, tau_mcm: f64) -> DeviceModel {
    debug_assert!((0.0..=1.0).contains(&tau_mcm));
    let mut out = model.clone();
    for q in &mut out.qubits {
        q.mcm_error = q.mcm_error.max(tau_mcm);
    }
    out
}

/// All-pairs hop distances over the coupling graph.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub num_qubits: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.data[a * self.num_qubits + b]
    }

    pub fn diameter(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

/// BFS all-pairs hop distances. Errors if the graph is disconnected.
pub fn distance_matrix(model: &DeviceModel) -> Result<DistanceMatrix, DeviceError> {
    let n = model.num_qubits;
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &model.edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut data = vec![u32::MAX; n * n];
    for start in 0..n {
        let row = &mut data[start * n..(start + 1) * n];
        row[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if row[w] == u32::MAX {
                    row[w] = row[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if row.contains(&u32::MAX) {
            return Err(DeviceError::DisconnectedDevice);
        }
    }
    Ok(DistanceMatrix {
        num_qubits: n,
        data,
    })
}

/// Named coupling topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 127-qubit heavy-hex lattice matching the IBM Eagle coupling map.
    Eagle127,
    /// 12-qubit two-row heavy-hex cell for desk-scale tests.
    SmallHex,
    Line(usize),
    Grid(usize, usize),
}

impl std::str::FromStr for Preset {
    type Err = DeviceError;

    /// Accepts `eagle127`, `small-hex`, `line:N`, and `grid:RxC`.
    fn from_str(s: &str) -> Result<Self, DeviceError> {
        if s == "eagle127" {
            return Ok(Preset::Eagle127);
        }
        if s == "small-hex" {
            return Ok(Preset::SmallHex);
        }
        if let Some(n) = s.strip_prefix("line:") {
            if let Ok(n) = n.parse::<usize>() {
                if n >= 1 {
                    return Ok(Preset::Line(n));
                }
            }
        }
        if let Some(rc) = s.strip_prefix("grid:") {
            if let Some((r, c)) = rc.split_once('x') {
                if let (Ok(r), Ok(c)) = (r.parse::<usize>(), c.parse::<usize>()) {
                    if r >= 1 && c >= 1 {
                        return Ok(Preset::Grid(r, c));
                    }
                }
            }
        }
        Err(DeviceError::UnknownPreset(s.to_string()))
    }
}

/// Build the coupling topology for a preset, with uniform zero-error calibration.
pub fn make_heavy_hex(preset: Preset) -> DeviceModel {
    match preset {
        Preset::Eagle127 => eagle127(),
        Preset::SmallHex => small_hex(),
        Preset::Line(n) => {
            let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            DeviceModel::uniform(&format!("line{n}"), n, edges)
        }
        Preset::Grid(r, c) => {
            let mut edges = Vec::new();
            let at = |i: usize, j: usize| i * c + j;
            for i in 0..r {
                for j in 0..c {
                    if j + 1 < c {
                        edges.push((at(i, j), at(i, j + 1)));
                    }
                    if i + 1 < r {
                        edges.push((at(i, j), at(i + 1, j)));
                    }
                }
            }
            DeviceModel::uniform(&format!("grid{r}x{c}"), r * c, edges)
        }
    }
}

/// The Eagle heavy-hex lattice: seven qubit rows joined by bridge qubits.
/// Interior rows span columns 0..14; the top row covers columns 0..13 and
/// the bottom row columns 1..14. Four bridges per gap attach at alternating
/// columns {0,4,8,12} / {2,6,10,14}.
fn eagle127() -> DeviceModel {
    let mut edges = Vec::new();
    // (start index, length, column of the first qubit).
    let rows: [(usize, usize, usize); 7] = [
        (0, 14, 0),
        (18, 15, 0),
        (37, 15, 0),
        (56, 15, 0),
        (75, 15, 0),
        (94, 15, 0),
        (113, 14, 1),
    ];
    for &(start, len, _) in &rows {
        for i in 0..len - 1 {
            edges.push((start + i, start + i + 1));
        }
    }
    // Bridge qubits fill the index ranges between consecutive rows.
    let bridges: [usize; 6] = [14, 33, 52, 71, 90, 109];
    for (gap, &bridge_start) in bridges.iter().enumerate() {
        let (upper_start, _, upper_col) = rows[gap];
        let (lower_start, _, lower_col) = rows[gap + 1];
        let columns: [usize; 4] = if gap % 2 == 0 {
            [0, 4, 8, 12]
        } else {
            [2, 6, 10, 14]
        };
        for (k, &col) in columns.iter().enumerate() {
            let bridge = bridge_start + k;
            let upper = upper_start + col - upper_col;
            let lower = lower_start + col - lower_col;
            edges.push((upper, bridge));
            edges.push((bridge, lower));
        }
    }
    DeviceModel::uniform("eagle127", 127, edges)
}

/// Two five-qubit rows with two bridge qubits, 12 qubits total.
fn small_hex() -> DeviceModel {
    let edges = vec![
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 4),
        (7, 8),
        (8, 9),
        (9, 10),
        (10, 11),
        (0, 5),
        (5, 7),
        (4, 6),
        (6, 11),
    ];
    DeviceModel::uniform("small-hex", 12, edges)
}

/// Target statistics for synthetic per-qubit MCM error maps, modeled on
/// profiled superconducting devices: a log-normal body with a small fraction
/// of heavy-tail outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub mean_mcm: f64,
    pub max_mcm: f64,
    pub min_mcm: f64,
    /// Fraction of qubits drawn from the uniform upper tail [0.1, max_mcm].
    pub heavy_tail_fraction: f64,
    pub e1q_range: (f64, f64),
    pub e2q_range: (f64, f64),
    pub ro_range: (f64, f64),
    pub t1: f64,
    pub t2: f64,
    pub durations: Durations,
}

impl SynthProfile {
    /// Eagle-class profile: mean 3.42%, range 0.05%..42.58%.
    pub fn eagle() -> Self {
        SynthProfile {
            mean_mcm: 0.0342,
            max_mcm: 0.4258,
            min_mcm: 0.0005,
            heavy_tail_fraction: 0.05,
            e1q_range: (0.0001, 0.0008),
            e2q_range: (0.004, 0.02),
            ro_range: (0.005, 0.03),
            t1: 120_000.0,
            t2: 40_000.0,
            durations: Durations::default(),
        }
    }

    /// Heron-class profile: mean 1.19%, range 0%..14.04%.
    pub fn heron() -> Self {
        SynthProfile {
            mean_mcm: 0.0119,
            max_mcm: 0.1404,
            min_mcm: 0.0,
            heavy_tail_fraction: 0.03,
            e1q_range: (0.0001, 0.0005),
            e2q_range: (0.002, 0.01),
            ro_range: (0.004, 0.02),
            t1: 150_000.0,
            t2: 60_000.0,
            durations: Durations::default(),
        }
    }

    /// All error rates zero; coherence times kept finite.
    pub fn zero() -> Self {
        SynthProfile {
            mean_mcm: 0.0,
            max_mcm: 0.0,
            min_mcm: 0.0,
            heavy_tail_fraction: 0.0,
            e1q_range: (0.0, 0.0),
            e2q_range: (0.0, 0.0),
            ro_range: (0.0, 0.0),
            t1: 200_000.0,
            t2: 150_000.0,
            durations: Durations::default(),
        }
    }

    fn validate(&self) -> Result<(), DeviceError> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if !prob(self.mean_mcm) || !prob(self.max_mcm) || !prob(self.min_mcm) {
            return Err(DeviceError::InvalidProfile(
                "MCM statistics must lie in [0,1]".into(),
            ));
        }
        if self.min_mcm > self.max_mcm
            || self.mean_mcm > self.max_mcm
            || self.mean_mcm < self.min_mcm
        {
            return Err(DeviceError::InvalidProfile(
                "require min_mcm <= mean_mcm <= max_mcm".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.heavy_tail_fraction) {
            return Err(DeviceError::InvalidProfile(
                "heavy_tail_fraction must lie in [0,1]".into(),
            ));
        }
        for (lo, hi) in [self.e1q_range, self.e2q_range, self.ro_range] {
            if !(prob(lo) && prob(hi) && lo <= hi) {
                return Err(DeviceError::InvalidProfile(
                    "error ranges must be ordered in [0,1]".into(),
                ));
            }
        }
        if self.t1 <= 0.0 || self.t2 <= 0.0 || self.t2 > 2.0 * self.t1 {
            return Err(DeviceError::InvalidProfile("require 0 < T2 <= 2*T1".into()));
        }
        Ok(())
    }
}

/// Sample a calibrated device over a preset topology. Deterministic in
/// (topology, seed, profile). The body is log-normal, rescaled so the
/// empirical mean lands on `mean_mcm`, then clamped to [min_mcm, max_mcm];
/// a `heavy_tail_fraction` of qubits is redrawn from the uniform upper tail.
pub fn synth_error_map(
    preset: Preset,
    seed: u64,
    profile: &SynthProfile,
) -> Result<DeviceModel, DeviceError> {
    profile.validate()?;
    let mut model = make_heavy_hex(preset);
    let n = model.num_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.name = format!("{}-synth{}", model.name, seed);
    model.profiled_at = 1_700_000_000 + seed;

    let mut mcm: Vec<f64> = if profile.mean_mcm > 0.0 {
        let sigma: f64 = 0.8;
        let mu = profile.mean_mcm.ln() - sigma * sigma / 2.0;
        (0..n)
            .map(|_| {
                // Box-Muller normal sample feeding a log-normal.
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                (mu + sigma * z).exp()
            })
            .collect()
    } else {
        vec![0.0; n]
    };

    let n_tail = (profile.heavy_tail_fraction * n as f64).round() as usize;
    if n_tail > 0 && profile.max_mcm > 0.1 {
        let mut picked = std::collections::BTreeSet::new();
        while picked.len() < n_tail.min(n) {
            picked.insert(rng.gen_range(0..n));
        }
        for &q in &picked {
            mcm[q] = rng.gen_range(0.1..profile.max_mcm);
        }
    }

    // Rescale the body so the empirical mean matches the profile, then clamp.
    // Two passes absorb the shift the clamp introduces.
    for _ in 0..2 {
        let empirical = mcm.iter().sum::<f64>() / n.max(1) as f64;
        if empirical > 0.0 && profile.mean_mcm > 0.0 {
            let scale = profile.mean_mcm / empirical;
            for v in &mut mcm {
                *v *= scale;
            }
        }
        for v in &mut mcm {
            *v = v.clamp(profile.min_mcm, profile.max_mcm);
        }
    }

    for (q, cal) in model.qubits.iter_mut().enumerate() {
        cal.mcm_error = mcm[q];
        cal.e1q = sample_range(&mut rng, profile.e1q_range);
        cal.readout_error = sample_range(&mut rng, profile.ro_range);
        cal.t1 = profile.t1;
        cal.t2 = profile.t2;
        cal.durations = profile.durations;
    }
    for e in &mut model.e2q {
        *e = sample_range(&mut rng, profile.e2q_range);
    }
    model.validate()?;
    Ok(model)
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let mut model = make_heavy_hex(Preset::Line(3));
        model.qubits[0].mcm_error = 0.010;
        model.qubits[1].mcm_error = 0.05;
        model.qubits[2].mcm_error = 0.02;
        let normalized = normalize_mcm(&model, 0.02);
        assert_eq!(
            normalized.qubits[0].mcm_error, 0.02,
            "1.0% is raised to 2.0%"
        );
        assert_eq!(
            normalized.qubits[1].mcm_error, 0.05,
            "above-threshold rates pass through"
        );
        assert_eq!(normalized.qubits[2].mcm_error, 0.02);

        let identity = normalize_mcm(&model, 0.0);
        assert_eq!(identity, model, "tau = 0 is the identity");
    }

    #[test]
    fn normalize_is_idempotent_and_monotone() {
        let model = synth_error_map(Preset::SmallHex, 3, &SynthProfile::eagle()).unwrap();
        let once = normalize_mcm(&model, 0.02);
        let twice = normalize_mcm(&once, 0.02);
        assert_eq!(once, twice);
        for (before, after) in model.qubits.iter().zip(&once.qubits) {
            assert!(after.mcm_error >= before.mcm_error);
        }
    }

    #[test]
    fn distances_on_line() {
        let model = make_heavy_hex(Preset::Line(3));
        let d = distance_matrix(&model).unwrap();
        assert_eq!(d.get(0, 2), 2);
        assert_eq!(d.get(1, 1), 0);
    }

    #[test]
    fn disconnected_device_is_an_error() {
        let model = DeviceModel::uniform("split", 4, vec![(0, 1), (2, 3)]);
        assert!(matches!(
            distance_matrix(&model),
            Err(DeviceError::DisconnectedDevice)
        ));
    }

    /// Floyd-Warshall oracle, independent of the BFS implementation.
    fn floyd_warshall(model: &DeviceModel) -> Vec<Vec<u64>> {
        let n = model.num_qubits;
        let inf = u64::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
        }
        for &(a, b) in &model.edges {
            d[a][b] = 1;
            d[b][a] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn distances_match_floyd_warshall_on_generated_topologies() {
        for preset in [
            Preset::Eagle127,
            Preset::SmallHex,
            Preset::Line(7),
            Preset::Grid(3, 4),
        ] {
            let model = make_heavy_hex(preset);
            let d = distance_matrix(&model).unwrap();
            let oracle = floyd_warshall(&model);
            for a in 0..model.num_qubits {
                for b in 0..model.num_qubits {
                    assert_eq!(
                        u64::from(d.get(a, b)),
                        oracle[a][b],
                        "({a},{b}) on {}",
                        model.name
                    );
                }
            }
        }
    }

    #[test]
    fn preset_shapes() {
        let eagle = make_heavy_hex(Preset::Eagle127);
        assert_eq!(eagle.num_qubits, 127);
        assert_eq!(eagle.edges.len(), 144);
        eagle.validate().unwrap();
        distance_matrix(&eagle).unwrap();

        assert_eq!(make_heavy_hex(Preset::Line(2)).edges.len(), 1);
        assert_eq!(make_heavy_hex(Preset::Grid(3, 3)).edges.len(), 12);
        let hex = make_heavy_hex(Preset::SmallHex);
        assert_eq!(hex.num_qubits, 12);
        hex.validate().unwrap();
        distance_matrix(&hex).unwrap();
    }

    #[test]
    fn preset_parsing() {
        use std::str::FromStr;
        assert_eq!(Preset::from_str("eagle127").unwrap(), Preset::Eagle127);
        assert_eq!(Preset::from_str("line:5").unwrap(), Preset::Line(5));
        assert_eq!(Preset::from_str("grid:2x4").unwrap(), Preset::Grid(2, 4));
        assert!(matches!(
            Preset::from_str("torus:9"),
            Err(DeviceError::UnknownPreset(_))
        ));
    }

    #[test]
    fn synth_is_deterministic_and_hits_mean() {
        let profile = SynthProfile::eagle();
        let a = synth_error_map(Preset::Eagle127, 7, &profile).unwrap();
        let b = synth_error_map(Preset::Eagle127, 7, &profile).unwrap();
        assert_eq!(a, b, "same seed gives identical maps");

        for seed in 0..20 {
            let model = synth_error_map(Preset::Eagle127, seed, &profile).unwrap();
            let mean =
                model.qubits.iter().map(|q| q.mcm_error).sum::<f64>() / model.num_qubits as f64;
            assert!(
                (mean - profile.mean_mcm).abs() <= 0.2 * profile.mean_mcm,
                "seed {seed}: mean {mean} over 20% off target {}",
                profile.mean_mcm
            );
            let max = model.qubits.iter().map(|q| q.mcm_error).fold(0.0, f64::max);
            assert!(max <= profile.max_mcm);
        }
    }

    #[test]
    fn synth_zero_profile_is_all_zero() {
        let model = synth_error_map(Preset::Line(5), 1, &SynthProfile::zero()).unwrap();
        assert!(model
            .qubits
            .iter()
            .all(|q| q.mcm_error == 0.0 && q.e1q == 0.0));
        assert!(model.e2q.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn load_save_round_trip_and_schema_errors() {
        let dir = std::env::temp_dir().join("mera-device-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("eagle.json");
        let model = synth_error_map(Preset::Eagle127, 5, &SynthProfile::eagle()).unwrap();
        model.save(&path).unwrap();
        let back = DeviceModel::load(&path).unwrap();
        assert_eq!(back, model);

        let mut bad = model.clone();
        bad.qubits[3].mcm_error = 1.2;
        let json = serde_json::to_string(&bad).unwrap();
        assert!(matches!(
            DeviceModel::from_json(&json),
            Err(DeviceError::InvariantViolation(_))
        ));

        let json = serde_json::to_string(&model)
            .unwrap()
            .replace("\"edges\"", "\"wires\"");
        assert!(matches!(
            DeviceModel::from_json(&json),
            Err(DeviceError::Schema { .. })
        ));
    }

    #[test]
    fn invalid_profile_rejected() {
        let mut profile = SynthProfile::eagle();
        profile.mean_mcm = 0.9;
        assert!(matches!(
            synth_error_map(Preset::Line(4), 0, &profile),
            Err(DeviceError::InvalidProfile(_))
        ));
    }
}
