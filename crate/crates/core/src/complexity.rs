//! Classical and quantum memory costs of transducers, and the bounds used to
//! compare a transformation with its reverse.
//!
//! The quantum causal state of transducer state `i` is
//! `|s_i⟩ = ⊗_x Σ_{y,k} sqrt(T^(y|x)_ik) |y⟩|k⟩`, so overlaps factor over
//! inputs and the stationary memory `ρ = Σ_i φ_i |s_i⟩⟨s_i|` shares its
//! nonzero spectrum with the Gram matrix `G_ij = sqrt(φ_i φ_j) ⟨s_i|s_j⟩`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::shannon_entropy;
use crate::compose::transducer_stationary;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::machine::{ProcessMachine, StateDistribution, Transducer};
use crate::zoo;

/// Eigenvalues in `[−NEGATIVE_CLAMP, 0)` are treated as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;
/// Largest accepted eigen-residual `‖Gv − λv‖`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Statistical complexity: entropy of the stationary memory distribution of
/// `t` driven by `p`.
pub fn classical_complexity(t: &Transducer, p: &ProcessMachine) -> Result<f64> {
    Ok(transducer_stationary(t, p)?.entropy())
}

/// Closed form of the statistical complexity of `T_n` driven by `A` with
/// unperturbed probabilities.
pub fn classical_complexity_a_to_b_closed_form(n: usize) -> f64 {
    assert!(n >= 3, "need n >= 3");
    let (pr0, pr1, pr2) = (1.0 / 3.0, 0.5, 1.0 / 6.0);
    let q = pr1 / (n - 1) as f64;
    let plogp = |p: f64| if p > 0.0 { p * p.log2() } else { 0.0 };
    -plogp(pr0) - (n - 2) as f64 * plogp(q) - plogp(q + pr2)
}

type Factor = Vec<((usize, usize), f64)>;

/// Amplitudes of the quantum causal states, one sparse factor per
/// `(state, input)`.
#[derive(Debug, Clone)]
pub struct QuantumCausalStates {
    states: usize,
    inputs: usize,
    // factors[i][x]: ((y, k), amplitude) with nonzero amplitude
    factors: Vec<Vec<Factor>>,
}

impl QuantumCausalStates {
    pub fn new(t: &Transducer) -> Self {
        let (n, kx, ky) = (t.num_states(), t.input_alphabet().len(), t.output_alphabet().len());
        let factors = (0..n)
            .map(|i| {
                (0..kx)
                    .map(|x| {
                        let mut f = Vec::new();
                        for y in 0..ky {
                            for (k, &p) in t.matrix(x, y).row(i).iter().enumerate() {
                                if p > 0.0 {
                                    f.push(((y, k), p.sqrt()));
                                }
                            }
                        }
                        f
                    })
                    .collect()
            })
            .collect();
        Self { states: n, inputs: kx, factors }
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs
    }

    /// Nonzero components `((y, k), amplitude)` of `|s_i^x⟩`.
    pub fn factor(&self, i: usize, x: usize) -> &[((usize, usize), f64)] {
        &self.factors[i][x]
    }

    /// `‖|s_i^x⟩‖²`.
    pub fn factor_norm_sq(&self, i: usize, x: usize) -> f64 {
        self.factors[i][x].iter().map(|(_, a)| a * a).sum()
    }

    /// `⟨s_i|s_j⟩ = Π_x Σ_{y,k} sqrt(T^(y|x)_ik T^(y|x)_jk)`.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        (0..self.inputs)
            .map(|x| {
                let fj = &self.factors[j][x];
                self.factors[i][x]
                    .iter()
                    .filter_map(|(key, a)| fj.iter().find(|(k2, _)| k2 == key).map(|(_, b)| a * b))
                    .sum::<f64>()
            })
            .product()
    }
}

/// Symmetric, unit-trace matrix of weighted overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(Matrix);

impl GramMatrix {
    /// Wraps a square matrix after checking symmetry and unit trace.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.rows(), actual: m.cols() });
        }
        if m.max_abs_diff(&m.transpose()) > 1e-12 {
            return Err(Error::InvalidParameters("Gram matrix is not symmetric".into()));
        }
        let tr = m.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameters(format!("Gram matrix has trace {tr}")));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Eigenvalues in descending order with small negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::new(&self.0)?;
        let residual = eig.max_residual(&self.0);
        if residual > RESIDUAL_TOL {
            return Err(Error::NoConvergence);
        }
        eig.values
            .iter()
            .map(|&l| match l {
                l if l >= 0.0 => Ok(l),
                l if l >= -NEGATIVE_CLAMP => Ok(0.0),
                l => Err(Error::NotPsd(l)),
            })
            .collect()
    }
}

pub fn gram_matrix(t: &Transducer, phi: &StateDistribution) -> Result<GramMatrix> {
    let n = t.num_states();
    if phi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: phi.len() });
    }
    let qs = QuantumCausalStates::new(t);
    let w = phi.probs();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = w[i];
        for j in 0..i {
            let v = (w[i] * w[j]).sqrt() * qs.overlap(i, j);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    GramMatrix::new(g)
}

/// `−Σ λ log₂ λ` over the spectrum of `g`.
pub fn von_neumann_entropy(g: &GramMatrix) -> Result<f64> {
    Ok(shannon_entropy(&g.eigenvalues()?))
}

/// Quantum complexity of `t` driven by `p`. Fails if it exceeds the
/// classical complexity, which would indicate a broken encoding.
pub fn quantum_complexity(t: &Transducer, p: &ProcessMachine) -> Result<f64> {
    let phi = transducer_stationary(t, p)?;
    let q = von_neumann_entropy(&gram_matrix(t, &phi)?)?;
    let c = phi.entropy();
    if q > c + 1e-9 {
        return Err(Error::QuantumExceedsClassical { quantum: q, classical: c });
    }
    Ok(q)
}

/// Direct construction of the memory density matrix in the full amplitude
/// space. Exponential in the number of inputs; meant for cross-checks.
pub mod explicit {
    use super::*;

    /// `|s_i⟩` as a sparse map from multi-index (one `(y, k)` slot per input,
    /// encoded `y·|S| + k`) to amplitude.
    pub fn causal_state_vector(t: &Transducer, i: usize) -> BTreeMap<Vec<usize>, f64> {
        let qs = QuantumCausalStates::new(t);
        let n = t.num_states();
        let mut v: BTreeMap<Vec<usize>, f64> = BTreeMap::from([(Vec::new(), 1.0)]);
        for x in 0..qs.num_inputs() {
            let mut next = BTreeMap::new();
            for (idx, a) in &v {
                for &((y, k), b) in qs.factor(i, x) {
                    let mut key = idx.clone();
                    key.push(y * n + k);
                    next.insert(key, a * b);
                }
            }
            v = next;
        }
        v
    }

    /// `Σ_i φ_i |s_i⟩⟨s_i|` restricted to the union of supports, with the
    /// basis labels in sorted order.
    pub fn density_matrix(t: &Transducer, phi: &StateDistribution) -> (Vec<Vec<usize>>, Matrix) {
        let vectors: Vec<_> = (0..t.num_states()).map(|i| causal_state_vector(t, i)).collect();
        let mut basis: Vec<Vec<usize>> = vectors.iter().flat_map(|v| v.keys().cloned()).collect();
        basis.sort();
        basis.dedup();
        let index: BTreeMap<&Vec<usize>, usize> = basis.iter().enumerate().map(|(a, b)| (b, a)).collect();
        let mut rho = Matrix::zeros(basis.len(), basis.len());
        for (v, &w) in vectors.iter().zip(phi.probs()) {
            let entries: Vec<(usize, f64)> = v.iter().map(|(k, a)| (index[k], *a)).collect();
            for &(r, a) in &entries {
                for &(c, b) in &entries {
                    rho[(r, c)] += w * a * b;
                }
            }
        }
        (basis, rho)
    }

    /// Von Neumann entropy of the explicitly assembled memory state.
    pub fn memory_entropy(t: &Transducer, phi: &StateDistribution) -> Result<f64> {
        let (_, rho) = density_matrix(t, phi);
        von_neumann_entropy(&GramMatrix::new(rho)?)
    }
}

/// Minimum over input words of length at most `depth` of the Bhattacharyya
/// coefficient between the joint (output word, end state) distributions
/// reached from states `i` and `j`.
pub fn max_fidelity_bound(t: &Transducer, i: usize, j: usize, depth: usize) -> f64 {
    type Dist = BTreeMap<(Vec<usize>, usize), f64>;
    fn step(t: &Transducer, d: &Dist, x: usize) -> Dist {
        let mut out = Dist::new();
        for ((word, s), p) in d {
            for y in 0..t.output_alphabet().len() {
                for (k, &q) in t.matrix(x, y).row(*s).iter().enumerate() {
                    if q > 0.0 {
                        let mut w = word.clone();
                        w.push(y);
                        *out.entry((w, k)).or_insert(0.0) += p * q;
                    }
                }
            }
        }
        out
    }
    fn coefficient(a: &Dist, b: &Dist) -> f64 {
        a.iter().filter_map(|(key, p)| b.get(key).map(|q| (p * q).sqrt())).sum()
    }
    fn search(t: &Transducer, a: Dist, b: Dist, remaining: usize, best: &mut f64) {
        if remaining == 0 {
            return;
        }
        for x in 0..t.input_alphabet().len() {
            let (na, nb) = (step(t, &a, x), step(t, &b, x));
            *best = best.min(coefficient(&na, &nb));
            search(t, na, nb, remaining - 1, best);
        }
    }
    let start = |s: usize| Dist::from([((Vec::new(), s), 1.0)]);
    let mut best = 1.0_f64;
    search(t, start(i), start(j), depth, &mut best);
    best.min(1.0)
}

/// Entropy of the two-state memory with weights `phi` and overlap `f`:
/// eigenvalues `(1 ± sqrt((φ₁−φ₂)² + 4φ₁φ₂F²)) / 2`.
pub fn two_state_entropy_lower_bound(phi: [f64; 2], f: f64) -> f64 {
    let [a, b] = phi;
    let r = ((a - b).powi(2) + 4.0 * a * b * f * f).sqrt();
    shannon_entropy(&[(1.0 + r) / 2.0, ((1.0 - r) / 2.0).max(0.0)])
}

/// Upper bound on the quantum memory of `T_n` at perturbation size `δ`,
/// from the trace distance to the unperturbed pure memory state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AudenaertBound {
    pub f_min: f64,
    pub t_max: f64,
    pub bound_bits: f64,
}

pub fn audenaert_upper_bound(n: usize, delta: f64) -> Result<AudenaertBound> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidDelta(format!("delta {delta} outside [0, 1)")));
    }
    let f_min = 0.5 + 0.5 * (1.0 - delta * delta).sqrt();
    let t_max = (1.0 - f_min).max(0.0).sqrt();
    let limit = (n - 1) as f64 / n as f64;
    if t_max > limit {
        return Err(Error::OutOfMonotoneRange { t_max, limit });
    }
    let bound_bits = t_max * ((n - 1) as f64).log2() + shannon_entropy(&[t_max, 1.0 - t_max]);
    Ok(AudenaertBound { f_min, t_max, bound_bits })
}

/// Classical and quantum asymmetry between `A` and `B_n`, in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryReport {
    pub n: usize,
    pub delta: f64,
    #[serde(rename = "C_AtoB")]
    pub c_a_to_b: f64,
    #[serde(rename = "C_BtoA")]
    pub c_b_to_a: f64,
    #[serde(rename = "Q_AtoB_upper")]
    pub q_a_to_b_upper: f64,
    #[serde(rename = "Q_lower")]
    pub q_lower: f64,
    #[serde(rename = "Q_BtoA_upper")]
    pub q_b_to_a_upper: f64,
    #[serde(rename = "Delta_C")]
    pub delta_c: f64,
    #[serde(rename = "Delta_Q_lo")]
    pub delta_q_lo: f64,
    #[serde(rename = "Delta_Q_hi")]
    pub delta_q_hi: f64,
}

impl AsymmetryReport {
    pub const CSV_HEADER: &'static str =
        "n,delta,C_AtoB,C_BtoA,Q_AtoB_upper,Q_lower,Q_BtoA_upper,Delta_C,Delta_Q_lo,Delta_Q_hi";

    /// One CSV row, numbers at 12 significant digits, no line terminator.
    pub fn csv_row(&self) -> String {
        let mut s = self.n.to_string();
        for v in [
            self.delta,
            self.c_a_to_b,
            self.c_b_to_a,
            self.q_a_to_b_upper,
            self.q_lower,
            self.q_b_to_a_upper,
            self.delta_c,
            self.delta_q_lo,
            self.delta_q_hi,
        ] {
            let _ = write!(s, ",{}", format_significant(v, 12));
        }
        s
    }
}

/// Formats `v` with `digits` significant digits, trimming trailing zeros.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&magnitude) {
        let s = format!("{:.*e}", digits - 1, v);
        let (mantissa, exp) = s.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Perturbation sizes up to which the reversal is asserted.
pub const REVERSAL_DELTA: f64 = 1e-2;

/// Evaluates both directions between `A` and `B_n` with the default
/// perturbation pattern of size `delta`.
///
/// The quantum interval is `[−Q_upper(B→A), Q_upper(A→B) − Q_lower(B→A)]`,
/// where `Q_lower(B→A)` is the two-state entropy at the largest overlap the
/// fidelity constraint allows and `Q_upper(B→A)` is the quantum complexity
/// of the maximal-overlap member of the `T̂_n` family. For
/// `delta ≤ REVERSAL_DELTA`, a nonpositive `Δ_C` or nonnegative upper end of
/// the quantum interval is reported as an error.
pub fn causal_asymmetry(n: usize, delta: f64) -> Result<AsymmetryReport> {
    let d = zoo::default_delta_assignment(n, delta)?;
    let a = zoo::process_a();
    let b = zoo::process_b(n, &d)?;
    let t = zoo::transducer_t(n, &d)?;
    let hat = zoo::hat_transducer_symmetric(n, &d)?;
    let hat_opt = zoo::hat_transducer_max_overlap(n, &d)?;

    let c_a_to_b = classical_complexity(&t, &a)?;
    let phi_hat = transducer_stationary(&hat, &b)?;
    let c_b_to_a = phi_hat.entropy();
    let q_a_to_b_upper = audenaert_upper_bound(n, delta)?.bound_bits;
    let f = max_fidelity_bound(&hat, 0, 1, 1);
    let q_lower = two_state_entropy_lower_bound([phi_hat.probs()[0], phi_hat.probs()[1]], f);
    let q_b_to_a_upper = quantum_complexity(&hat_opt, &b)?;

    let report = AsymmetryReport {
        n,
        delta,
        c_a_to_b,
        c_b_to_a,
        q_a_to_b_upper,
        q_lower,
        q_b_to_a_upper,
        delta_c: c_a_to_b - c_b_to_a,
        delta_q_lo: -q_b_to_a_upper,
        delta_q_hi: q_a_to_b_upper - q_lower,
    };
    if delta <= REVERSAL_DELTA {
        if report.delta_c <= 0.0 {
            return Err(Error::ReversalViolated(format!("n = {n}: Delta_C = {}", report.delta_c)));
        }
        if report.delta_q_hi >= 0.0 {
            return Err(Error::ReversalViolated(format!("n = {n}: Delta_Q_hi = {}", report.delta_q_hi)));
        }
    }
    Ok(report)
}

/// Classical costs between the alternating and period-4 clocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClockAsymmetry {
    pub c_a_to_b: f64,
    pub c_b_to_a: f64,
    pub delta_c: f64,
}

pub fn clock_asymmetry() -> Result<ClockAsymmetry> {
    let c = zoo::clocks();
    let c_a_to_b = classical_complexity(&c.forward, &c.alternating)?;
    let c_b_to_a = classical_complexity(&c.backward, &c.period4)?;
    Ok(ClockAsymmetry { c_a_to_b, c_b_to_a, delta_c: c_a_to_b - c_b_to_a })
}
