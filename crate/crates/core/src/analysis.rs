//! Stationary behaviour of process machines: recurrent classes, stationary
//! distributions, symbol and word probabilities, entropies.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::machine::{ProcessMachine, StateDistribution};

/// Chains with at most this many recurrent states are solved directly.
pub const DIRECT_SOLVE_LIMIT: usize = 64;
const POWER_TOL: f64 = 1e-14;
const POWER_MAX_ITER: usize = 1_000_000;

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// Closed strongly connected components of the positive-support graph of a
/// square matrix. Each class is sorted; classes are ordered by their smallest
/// state.
pub fn closed_classes(m: &Matrix) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] > 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let sccs = tarjan_scc(&g);
    for (c, scc) in sccs.iter().enumerate() {
        for node in scc {
            component[node.index()] = c;
        }
    }
    let mut closed: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, scc)| {
            scc.iter().all(|node| {
                let i = node.index();
                (0..n).all(|j| m[(i, j)] <= 0.0 || component[j] == *c)
            })
        })
        .map(|(_, scc)| {
            let mut states: Vec<usize> = scc.iter().map(|node| node.index()).collect();
            states.sort_unstable();
            states
        })
        .collect();
    closed.sort_by_key(|c| c[0]);
    closed
}

/// Stationary vector of a stochastic matrix with a unique closed class,
/// zero on transient states.
pub fn stationary_vector(m: &Matrix) -> Result<Vec<f64>> {
    let classes = closed_classes(m);
    if classes.len() != 1 {
        return Err(Error::MultipleRecurrentClasses(classes.len()));
    }
    let class = &classes[0];
    let sub = m.select(class, class);
    let local = if class.len() <= DIRECT_SOLVE_LIMIT {
        direct_stationary(&sub).unwrap_or_else(|| power_stationary(&sub))
    } else {
        power_stationary(&sub)
    };
    let mut full = vec![0.0; m.rows()];
    for (&i, p) in class.iter().zip(local) {
        full[i] = p;
    }
    Ok(full)
}

/// Solves `(Mᵀ − I) π = 0` with the last equation replaced by `Σ π = 1`.
fn direct_stationary(m: &Matrix) -> Option<Vec<f64>> {
    let n = m.rows();
    let mut a = m.transpose();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = linalg::solve(&a, &b)?;
    Some(normalized(pi))
}

/// Iterates the lazy chain `π ← (π + πM)/2`, which has the same fixed point
/// as `M` and converges for periodic chains too.
fn power_stationary(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..POWER_MAX_ITER {
        let step = m.left_mul(&pi);
        let next: Vec<f64> = pi.iter().zip(&step).map(|(a, b)| 0.5 * (a + b)).collect();
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if change < POWER_TOL {
            break;
        }
    }
    normalized(pi)
}

fn normalized(mut pi: Vec<f64>) -> Vec<f64> {
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= sum);
    pi
}

impl ProcessMachine {
    /// Closed recurrent classes of the marginal transition matrix.
    pub fn recurrent_classes(&self) -> Vec<Vec<usize>> {
        closed_classes(&self.transition_matrix())
    }

    /// The unique `π` with `πM = π`, supported on the recurrent class.
    pub fn stationary_distribution(&self) -> Result<StateDistribution> {
        stationary_vector(&self.transition_matrix()).map(StateDistribution::from_raw)
    }

    /// `Pr(x) = Σ_ij π_i T^(x)_ij`, in alphabet order.
    pub fn symbol_probabilities(&self) -> Result<Vec<f64>> {
        let pi = self.stationary_distribution()?;
        Ok(self.matrices().iter().map(|t| t.left_mul(pi.probs()).iter().sum()).collect())
    }

    /// Probability of a word of symbol labels, starting from `start` or from
    /// the stationary distribution.
    pub fn word_probability(&self, word: &[&str], start: Option<&StateDistribution>) -> Result<f64> {
        let indices = word
            .iter()
            .map(|s| self.alphabet().index_of(s).ok_or_else(|| Error::UnknownSymbol((*s).to_string())))
            .collect::<Result<Vec<_>>>()?;
        let start = match start {
            Some(s) => {
                if s.len() != self.num_states() {
                    return Err(Error::DimensionMismatch { expected: self.num_states(), actual: s.len() });
                }
                s.clone()
            }
            None => self.stationary_distribution()?,
        };
        Ok(self.word_probability_from(&indices, start.probs()))
    }

    /// `start · Π_t T^(w_t) · 1` for a word of symbol indices.
    pub fn word_probability_from(&self, word: &[usize], start: &[f64]) -> f64 {
        let mut v = start.to_vec();
        for &x in word {
            v = self.matrix(x).left_mul(&v);
        }
        v.iter().sum()
    }

    /// Probabilities of every word of length `len` under the stationary
    /// start, indexed in base-`|alphabet|` with the first symbol most
    /// significant.
    pub fn block_distribution(&self, len: usize) -> Result<Vec<f64>> {
        let pi = self.stationary_distribution()?;
        let k = self.alphabet().len();
        let mut out = Vec::with_capacity(k.pow(len as u32));
        fn rec(m: &ProcessMachine, v: &[f64], left: usize, out: &mut Vec<f64>) {
            if left == 0 {
                out.push(v.iter().sum());
                return;
            }
            for x in 0..m.alphabet().len() {
                let next = m.matrix(x).left_mul(v);
                rec(m, &next, left - 1, out);
            }
        }
        rec(self, pi.probs(), len, &mut out);
        Ok(out)
    }
}
