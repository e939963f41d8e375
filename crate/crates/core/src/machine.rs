//! Process machines, transducers, and their validation.

use std::fmt;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Tolerance on every probability-conservation check.
pub const ROW_SUM_TOL: f64 = 1e-9;

fn check_states(states: &[String]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::MalformedMachine("machine has no states".into()));
    }
    for (i, s) in states.iter().enumerate() {
        if states[..i].contains(s) {
            return Err(Error::MalformedMachine(format!("duplicate state `{s}`")));
        }
    }
    Ok(())
}

fn check_matrix(m: &Matrix, n: usize) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::MalformedMachine(format!("expected {n}x{n} matrix, got {}x{}", m.rows(), m.cols())));
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::MalformedMachine("non-finite transition probability".into()));
    }
    Ok(())
}

/// Edge-emitting stochastic machine: `T^(x)[i][j]` is the probability of
/// emitting `x` and moving from state `i` to state `j`.
///
/// Construction only checks shapes; probabilistic invariants are reported by
/// [`ProcessMachine::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMachine {
    states: Vec<String>,
    alphabet: Alphabet,
    matrices: Vec<Matrix>,
    unifilar: bool,
}

impl ProcessMachine {
    pub fn new(states: Vec<String>, alphabet: Alphabet, matrices: Vec<Matrix>) -> Result<Self> {
        check_states(&states)?;
        if matrices.len() != alphabet.len() {
            return Err(Error::MalformedMachine(format!("{} symbols but {} matrices", alphabet.len(), matrices.len())));
        }
        for m in &matrices {
            check_matrix(m, states.len())?;
        }
        Ok(Self { states, alphabet, matrices, unifilar: false })
    }

    /// Builds a machine from `(from, symbol, to, prob)` edges; repeated edges
    /// accumulate.
    pub fn from_edges<I>(states: Vec<String>, alphabet: Alphabet, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, f64)>,
    {
        let n = states.len();
        let mut matrices = vec![Matrix::zeros(n, n); alphabet.len()];
        for (from, x, to, p) in edges {
            if from >= n || to >= n || x >= alphabet.len() {
                return Err(Error::MalformedMachine(format!("edge ({from}, {x}, {to}) out of range")));
            }
            matrices[x][(from, to)] += p;
        }
        Self::new(states, alphabet, matrices)
    }

    /// Marks the machine as claiming unifilarity; [`validate`](Self::validate)
    /// then checks the claim.
    pub fn declare_unifilar(mut self) -> Self {
        self.unifilar = true;
        self
    }

    pub fn claims_unifilar(&self) -> bool {
        self.unifilar
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn matrix(&self, symbol: usize) -> &Matrix {
        &self.matrices[symbol]
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    /// `M = Σ_x T^(x)`.
    pub fn transition_matrix(&self) -> Matrix {
        let n = self.num_states();
        let mut m = Matrix::zeros(n, n);
        for t in &self.matrices {
            m.add_assign(t);
        }
        m
    }

    /// At most one successor per `(state, symbol)`.
    pub fn is_unifilar(&self) -> bool {
        self.matrices.iter().all(|t| (0..t.rows()).all(|i| t.row(i).iter().filter(|&&p| p > 0.0).count() <= 1))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (x, t) in self.matrices.iter().enumerate() {
            negative_entries(t, &self.states, None, x, self.alphabet.label(x), &mut violations);
        }
        for i in 0..self.num_states() {
            let sum: f64 = self.matrices.iter().map(|t| t.row_sum(i)).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                violations.push(Violation::RowSum { state: i, state_label: self.states[i].clone(), input: None, sum });
            }
        }
        if self.unifilar {
            for (x, t) in self.matrices.iter().enumerate() {
                nonunifilar_rows(t, &self.states, None, x, self.alphabet.label(x), &mut violations);
            }
        }
        ValidationReport { violations }
    }

    /// Keeps only the listed states (in the given order), dropping every edge
    /// that touches a removed state.
    pub fn restrict(&self, keep: &[usize]) -> Result<ProcessMachine> {
        let states = keep.iter().map(|&i| self.states[i].clone()).collect();
        let matrices = self.matrices.iter().map(|t| t.select(keep, keep)).collect();
        let mut m = ProcessMachine::new(states, self.alphabet.clone(), matrices)?;
        m.unifilar = self.unifilar;
        Ok(m)
    }

    pub(crate) fn with_unifilar_flag(mut self, flag: bool) -> Self {
        self.unifilar = flag;
        self
    }
}

/// Input-conditioned machine: `T^(y|x)[i][j]` is the probability that, in
/// state `i` and receiving `x`, the machine emits `y` and moves to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transducer {
    states: Vec<String>,
    input_alphabet: Alphabet,
    output_alphabet: Alphabet,
    /// Indexed `[input][output]`.
    matrices: Vec<Vec<Matrix>>,
    unifilar: bool,
}

impl Transducer {
    pub fn new(
        states: Vec<String>,
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        matrices: Vec<Vec<Matrix>>,
    ) -> Result<Self> {
        check_states(&states)?;
        if matrices.len() != input_alphabet.len() || matrices.iter().any(|row| row.len() != output_alphabet.len()) {
            return Err(Error::MalformedMachine("transducer tensor does not match its alphabets".into()));
        }
        for m in matrices.iter().flatten() {
            check_matrix(m, states.len())?;
        }
        Ok(Self { states, input_alphabet, output_alphabet, matrices, unifilar: false })
    }

    /// Builds a transducer from `(from, input, output, to, prob)` edges.
    pub fn from_edges<I>(
        states: Vec<String>,
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        edges: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, usize, f64)>,
    {
        let n = states.len();
        let mut matrices = vec![vec![Matrix::zeros(n, n); output_alphabet.len()]; input_alphabet.len()];
        for (from, x, y, to, p) in edges {
            if from >= n || to >= n || x >= input_alphabet.len() || y >= output_alphabet.len() {
                return Err(Error::MalformedMachine(format!("edge ({from}, {x}, {y}, {to}) out of range")));
            }
            matrices[x][y][(from, to)] += p;
        }
        Self::new(states, input_alphabet, output_alphabet, matrices)
    }

    pub fn declare_unifilar(mut self) -> Self {
        self.unifilar = true;
        self
    }

    pub fn claims_unifilar(&self) -> bool {
        self.unifilar
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output_alphabet
    }

    /// `T^(y|x)`.
    pub fn matrix(&self, input: usize, output: usize) -> &Matrix {
        &self.matrices[input][output]
    }

    pub fn is_unifilar(&self) -> bool {
        self.matrices
            .iter()
            .flatten()
            .all(|t| (0..t.rows()).all(|i| t.row(i).iter().filter(|&&p| p > 0.0).count() <= 1))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (x, row) in self.matrices.iter().enumerate() {
            for (y, t) in row.iter().enumerate() {
                let label = format!("{}|{}", self.output_alphabet.label(y), self.input_alphabet.label(x));
                negative_entries(t, &self.states, Some(x), y, &label, &mut violations);
            }
        }
        for x in 0..self.input_alphabet.len() {
            for i in 0..self.num_states() {
                let sum: f64 = self.matrices[x].iter().map(|t| t.row_sum(i)).sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    violations.push(Violation::RowSum {
                        state: i,
                        state_label: self.states[i].clone(),
                        input: Some(x),
                        sum,
                    });
                }
            }
        }
        if self.unifilar {
            for (x, row) in self.matrices.iter().enumerate() {
                for (y, t) in row.iter().enumerate() {
                    let label = format!("{}|{}", self.output_alphabet.label(y), self.input_alphabet.label(x));
                    nonunifilar_rows(t, &self.states, Some(x), y, &label, &mut violations);
                }
            }
        }
        ValidationReport { violations }
    }
}

fn negative_entries(
    t: &Matrix,
    states: &[String],
    input: Option<usize>,
    symbol: usize,
    symbol_label: &str,
    out: &mut Vec<Violation>,
) {
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            if t[(i, j)] < 0.0 {
                out.push(Violation::NegativeEntry {
                    from: i,
                    to: j,
                    input,
                    symbol,
                    label: format!("{} -[{}]-> {}", states[i], symbol_label, states[j]),
                    value: t[(i, j)],
                });
            }
        }
    }
}

fn nonunifilar_rows(
    t: &Matrix,
    states: &[String],
    input: Option<usize>,
    symbol: usize,
    symbol_label: &str,
    out: &mut Vec<Violation>,
) {
    for i in 0..t.rows() {
        let successors = t.row(i).iter().filter(|&&p| p > 0.0).count();
        if successors > 1 {
            out.push(Violation::NotUnifilar {
                state: i,
                input,
                symbol,
                label: format!("{} on {}", states[i], symbol_label),
                successors,
            });
        }
    }
}

/// One broken invariant. Indices refer to the machine's state and symbol
/// order; `input` is set for transducers only.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeEntry { from: usize, to: usize, input: Option<usize>, symbol: usize, label: String, value: f64 },
    RowSum { state: usize, state_label: String, input: Option<usize>, sum: f64 },
    NotUnifilar { state: usize, input: Option<usize>, symbol: usize, label: String, successors: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeEntry { label, value, .. } => {
                write!(f, "negative probability {value} on {label}")
            }
            Violation::RowSum { state_label, input: None, sum, .. } => {
                write!(f, "row sum of state {state_label} is {sum}, expected 1")
            }
            Violation::RowSum { state_label, input: Some(x), sum, .. } => {
                write!(f, "row sum of state {state_label} on input #{x} is {sum}, expected 1")
            }
            Violation::NotUnifilar { label, successors, .. } => {
                write!(f, "{successors} successors for {label} in a unifilar machine")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        Ok(())
    }
}

/// Probability vector over machine states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution(Vec<f64>);

impl StateDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameters("empty distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameters("distribution has a negative entry".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidParameters(format!("distribution sums to {sum}")));
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        crate::analysis::shannon_entropy(&self.0)
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self(probs)
    }
}
