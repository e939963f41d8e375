//! Constructors for the concrete machines: the processes `A` and `B_n`, the
//! transducers `T_n` and `T̂_n`, the two clocks with their transducers, and a
//! few trivial channels.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::machine::{ProcessMachine, Transducer};

/// Perturbations `δ_jk` of the excited-state transition probabilities
/// `p_jk = (1 + δ_jk) / (n − 1)` for `j = 0..n` and `k = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAssignment {
    n: usize,
    cap: f64,
    // row j, column k - 1
    entries: Vec<Vec<f64>>,
}

impl DeltaAssignment {
    /// Checks `|δ_jk| ≤ cap`, zero row sums, and distinct entries within each
    /// row when `cap > 0`.
    pub fn new(cap: f64, entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        if n < 3 {
            return Err(Error::InvalidDelta(format!("need n >= 3, got {n}")));
        }
        if !(0.0..1.0).contains(&cap) {
            return Err(Error::InvalidDelta(format!("cap {cap} outside [0, 1)")));
        }
        for (j, row) in entries.iter().enumerate() {
            if row.len() != n - 1 {
                return Err(Error::InvalidDelta(format!("row {j} has {} entries, expected {}", row.len(), n - 1)));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || v.abs() > cap) {
                return Err(Error::InvalidDelta(format!("row {j}: |{v}| exceeds cap {cap}")));
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() > 1e-12 {
                return Err(Error::InvalidDelta(format!("row {j} sums to {sum}")));
            }
            if cap > 0.0 {
                for (a, x) in row.iter().enumerate() {
                    if row[..a].contains(x) {
                        return Err(Error::InvalidDelta(format!("row {j} repeats {x}")));
                    }
                }
            }
        }
        Ok(Self { n, cap, entries })
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 3, "need n >= 3");
        Self { n, cap: 0.0, entries: vec![vec![0.0; n - 1]; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// `δ_jk` for `k ≥ 1`.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        assert!(k >= 1, "excited index starts at 1");
        self.entries[j][k - 1]
    }

    /// `p_jk` for `k ≥ 1`.
    pub fn probability(&self, j: usize, k: usize) -> f64 {
        (1.0 + self.entry(j, k)) / (self.n - 1) as f64
    }

    /// `(p_j1, …, p_j(n−1))`.
    pub fn probability_row(&self, j: usize) -> Vec<f64> {
        (1..self.n).map(|k| self.probability(j, k)).collect()
    }
}

/// Deterministic perturbation pattern with cap `delta`.
///
/// Row `j` is a linear ramp over the `n − 1` columns, scaled by
/// `1 + j/(10n)` and renormalized so that the widest row just reaches
/// `delta`. Rows are therefore distinct from each other and have distinct
/// entries.
pub fn default_delta_assignment(n: usize, delta: f64) -> Result<DeltaAssignment> {
    if n < 3 {
        return Err(Error::InvalidDelta(format!("need n >= 3, got {n}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidDelta(format!("delta {delta} outside [0, 1)")));
    }
    let nf = n as f64;
    let widest = 1.0 + (nf - 1.0) / (10.0 * nf);
    let entries = (0..n)
        .map(|j| {
            let scale = (1.0 + j as f64 / (10.0 * nf)) / widest;
            let mut row: Vec<f64> = (0..n - 1).map(|m| delta * (2.0 * m as f64 / (nf - 2.0) - 1.0) * scale).collect();
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            row.iter_mut().for_each(|v| *v = (*v - mean).clamp(-delta, delta));
            row
        })
        .collect();
    DeltaAssignment::new(delta, entries)
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// The two-state process `A` with symbol probabilities `(1/3, 1/2, 1/6)`.
/// Emitting 0 resets to `r0`; emitting 1 or 2 leads to `r1`.
pub fn process_a() -> ProcessMachine {
    ProcessMachine::from_edges(
        labels("r", 2),
        Alphabet::numeric(3),
        [(1, 0, 0, 0.5), (0, 1, 1, 0.5), (1, 1, 1, 0.5), (0, 2, 1, 0.5)],
    )
    .expect("process A is well formed")
    .declare_unifilar()
}

/// The `n`-state process `B_n`. Emitting `k` always leads to `s_k`.
pub fn process_b(n: usize, delta: &DeltaAssignment) -> Result<ProcessMachine> {
    check_n(n, delta)?;
    let mut edges = Vec::new();
    for k in 1..n {
        let p = delta.probability(0, k);
        let w = if k == 2 { (1.0 + p) / 2.0 } else { p / 2.0 };
        edges.push((0, k, k, w));
    }
    for j in 1..n {
        edges.push((j, 0, 0, 0.5));
        for k in 1..n {
            edges.push((j, k, k, delta.probability(j, k) / 2.0));
        }
    }
    Ok(ProcessMachine::from_edges(labels("s", n), Alphabet::numeric(n), edges)?.declare_unifilar())
}

/// The transducer `T_n` taking `A` to `B_n`. Inputs 0 and 2 are copied;
/// input 1 from `σ_i` becomes output `k ≥ 1` with probability `p_ik`. Output
/// `y` always leads to `σ_y`.
pub fn transducer_t(n: usize, delta: &DeltaAssignment) -> Result<Transducer> {
    check_n(n, delta)?;
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, 0, 0, 0, 1.0));
        edges.push((i, 2, 2, 2, 1.0));
        for k in 1..n {
            edges.push((i, 1, k, k, delta.probability(i, k)));
        }
    }
    Ok(Transducer::from_edges(labels("σ", n), Alphabet::numeric(3), Alphabet::numeric(n), edges)?.declare_unifilar())
}

fn check_n(n: usize, delta: &DeltaAssignment) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidDelta(format!("need n >= 3, got {n}")));
    }
    if delta.n() != n {
        return Err(Error::InvalidDelta(format!("assignment is for n = {}, not {n}", delta.n())));
    }
    Ok(())
}

/// Free parameters of the two-state transducers taking `B_n` to `A`.
///
/// From `τ0`, input 0 yields output 0 (stay) with `stay_on_zero` and output 1
/// with `one_on_zero`, output 2 otherwise. Input `m ∉ {0, 2}` yields output 1
/// with `one_on_input[..]` (ordered `m = 1, 3, 4, …`). The input-2 entry is
/// fixed by requiring the output to be `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatParams {
    pub stay_on_zero: f64,
    pub one_on_zero: f64,
    pub one_on_input: Vec<f64>,
}

impl HatParams {
    /// The symmetric member: outputs 1 and 2 equally likely on every
    /// nonzero input.
    pub fn symmetric(n: usize) -> Self {
        Self { stay_on_zero: 1.0, one_on_zero: 0.0, one_on_input: vec![0.5; n.saturating_sub(2)] }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} = {v} outside [0, 1]")))
    }
}

/// Builds `T̂` from the ground-state row `(p_01, …, p_0(n−1))` of the input.
pub fn hat_transducer_with_ground_row(ground: &[f64], params: &HatParams) -> Result<Transducer> {
    let n = ground.len() + 1;
    if n < 3 {
        return Err(Error::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    if params.one_on_input.len() != n - 2 {
        return Err(Error::InvalidParameters(format!(
            "expected {} per-input parameters, got {}",
            n - 2,
            params.one_on_input.len()
        )));
    }
    unit("stay_on_zero", params.stay_on_zero)?;
    unit("one_on_zero", params.one_on_zero)?;
    let two_on_zero = 1.0 - params.stay_on_zero - params.one_on_zero;
    if two_on_zero < -1e-12 {
        return Err(Error::InvalidParameters("stay_on_zero + one_on_zero exceeds 1".into()));
    }
    let two_on_zero = two_on_zero.max(0.0);

    // one_on[m] for m = 1..n, with the input-2 value derived
    let mut one_on = vec![0.0; n];
    let mut others = params.one_on_input.iter();
    let mut mass = 0.0;
    for m in (1..n).filter(|&m| m != 2) {
        let a = *others.next().unwrap();
        unit(&format!("one_on_input[{m}]"), a)?;
        one_on[m] = a;
        mass += ground[m - 1] * a;
    }
    let derived = (1.0 - mass) / (1.0 + ground[1]);
    if !(-1e-12..=1.0 + 1e-12).contains(&derived) {
        return Err(Error::InvalidParameters(format!("derived input-2 entry {derived} outside [0, 1]")));
    }
    one_on[2] = derived.clamp(0.0, 1.0);

    let mut edges = vec![
        (0, 0, 0, 0, params.stay_on_zero),
        (0, 0, 1, 1, params.one_on_zero),
        (0, 0, 2, 1, two_on_zero),
        (1, 0, 0, 0, 1.0),
    ];
    for m in 1..n {
        edges.push((0, m, 1, 1, one_on[m]));
        edges.push((0, m, 2, 1, 1.0 - one_on[m]));
        edges.push((1, m, 1, 1, 1.0));
    }
    edges.retain(|e| e.4 != 0.0);
    Ok(Transducer::from_edges(labels("τ", 2), Alphabet::numeric(n), Alphabet::numeric(3), edges)?.declare_unifilar())
}

pub fn hat_transducer(n: usize, delta: &DeltaAssignment, params: &HatParams) -> Result<Transducer> {
    check_n(n, delta).map_err(|e| Error::InvalidParameters(e.to_string()))?;
    hat_transducer_with_ground_row(&delta.probability_row(0), params)
}

/// The symmetric member of the `T̂_n` family.
pub fn hat_transducer_symmetric(n: usize, delta: &DeltaAssignment) -> Result<Transducer> {
    hat_transducer(n, delta, &HatParams::symmetric(n))
}

/// The member of the `T̂_n` family whose two quantum causal states have the
/// largest overlap, and hence the smallest quantum memory.
///
/// With `stay_on_zero = 1` the overlap is `Π_m sqrt(a_m)` under the linear
/// constraint `Σ_m w_m a_m = 1`, where `a_m` is the output-1 probability on
/// input `m`. The maximiser is `a_m = min(1, λ / w_m)`.
pub fn hat_transducer_max_overlap(n: usize, delta: &DeltaAssignment) -> Result<Transducer> {
    check_n(n, delta).map_err(|e| Error::InvalidParameters(e.to_string()))?;
    let ground = delta.probability_row(0);
    let weights: Vec<f64> = (1..n).map(|m| if m == 2 { 1.0 + ground[1] } else { ground[m - 1] }).collect();
    let lambda = water_level(&weights);
    let one_on_input = (1..n).filter(|&m| m != 2).map(|m| (lambda / weights[m - 1]).min(1.0)).collect();
    let params = HatParams { stay_on_zero: 1.0, one_on_zero: 0.0, one_on_input };
    hat_transducer_with_ground_row(&ground, &params)
}

/// Solves `Σ min(w_i, λ) = 1` for `λ`, assuming `Σ w_i ≥ 1`.
fn water_level(weights: &[f64]) -> f64 {
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut below = 0.0;
    for (k, &w) in sorted.iter().enumerate() {
        let lambda = (1.0 - below) / (sorted.len() - k) as f64;
        if lambda <= w {
            return lambda;
        }
        below += w;
    }
    *sorted.last().unwrap()
}

/// The two clocks and the transducers between them.
#[derive(Debug, Clone)]
pub struct Clocks {
    /// `…0101…`
    pub alternating: ProcessMachine,
    /// `…0123…`
    pub period4: ProcessMachine,
    /// Alternating to period-4: `y = 2j + x`, `m_j ← m_((j + x) mod 2)`.
    pub forward: Transducer,
    /// Period-4 to alternating: `y = x mod 2`, no memory.
    pub backward: Transducer,
}

pub fn clocks() -> Clocks {
    let alternating =
        ProcessMachine::from_edges(labels("a", 2), Alphabet::numeric(2), [(0, 0, 1, 1.0), (1, 1, 0, 1.0)])
            .expect("alternating clock is well formed")
            .declare_unifilar();
    let period4 =
        ProcessMachine::from_edges(labels("b", 4), Alphabet::numeric(4), (0..4).map(|k| (k, k, (k + 1) % 4, 1.0)))
            .expect("period-4 clock is well formed")
            .declare_unifilar();
    let forward = Transducer::from_edges(
        labels("m", 2),
        Alphabet::numeric(2),
        Alphabet::numeric(4),
        (0..2).flat_map(|j| (0..2).map(move |x| (j, x, 2 * j + x, (j + x) % 2, 1.0))),
    )
    .expect("forward transducer is well formed")
    .declare_unifilar();
    let backward = Transducer::from_edges(
        vec!["m".into()],
        Alphabet::numeric(4),
        Alphabet::numeric(2),
        (0..4).map(|x| (0, x, x % 2, 0, 1.0)),
    )
    .expect("backward transducer is well formed")
    .declare_unifilar();
    Clocks { alternating, period4, forward, backward }
}

/// One state, output equals input.
pub fn identity_transducer(alphabet: Alphabet) -> Transducer {
    let edges: Vec<_> = (0..alphabet.len()).map(|x| (0, x, x, 0, 1.0)).collect();
    Transducer::from_edges(vec!["id".into()], alphabet.clone(), alphabet, edges)
        .expect("identity transducer is well formed")
        .declare_unifilar()
}

/// One state, every input is mapped to the single output `symbol`.
pub fn erasing_transducer(alphabet: Alphabet, symbol: &str) -> Transducer {
    let edges: Vec<_> = (0..alphabet.len()).map(|x| (0, x, 0, 0, 1.0)).collect();
    let out = Alphabet::new([symbol]).expect("single symbol");
    Transducer::from_edges(vec!["erase".into()], alphabet, out, edges)
        .expect("erasing transducer is well formed")
        .declare_unifilar()
}

/// Single-state process emitting symbols independently with `probs`.
pub fn iid_process(alphabet: Alphabet, probs: &[f64]) -> Result<ProcessMachine> {
    if probs.len() != alphabet.len() {
        return Err(Error::DimensionMismatch { expected: alphabet.len(), actual: probs.len() });
    }
    let edges: Vec<_> = probs.iter().enumerate().map(|(x, &p)| (0, x, 0, p)).collect();
    let m = ProcessMachine::from_edges(vec!["iid".into()], alphabet, edges)?.declare_unifilar();
    let report = m.validate();
    if !report.is_clean() {
        return Err(Error::MalformedMachine(report.to_string()));
    }
    Ok(m)
}
