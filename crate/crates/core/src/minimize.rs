//! Transient removal, state merging, and finite-depth process comparison.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::machine::ProcessMachine;

/// Default tolerance for merging states.
pub const MERGE_TOL: f64 = 1e-9;

/// Budget on the number of words a post-merge self-check may enumerate.
const CHECK_WORD_BUDGET: usize = 1 << 16;

/// Disjoint blocks of state indices covering every state. Blocks are ordered
/// by their smallest member and each block is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn from_assignment(assignment: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut seen: Vec<Option<usize>> = vec![None; assignment.len()];
        for (state, &label) in assignment.iter().enumerate() {
            match seen[label] {
                Some(b) => blocks[b].push(state),
                None => {
                    seen[label] = Some(blocks.len());
                    blocks.push(vec![state]);
                }
            }
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index of every state.
    pub fn assignment(&self) -> Vec<usize> {
        let n = self.blocks.iter().map(Vec::len).sum();
        let mut out = vec![0; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &s in block {
                out[s] = b;
            }
        }
        out
    }
}

/// Restricts `m` to its unique recurrent class.
pub fn remove_transients(m: &ProcessMachine) -> Result<ProcessMachine> {
    let classes = m.recurrent_classes();
    if classes.len() != 1 {
        return Err(Error::MultipleRecurrentClasses(classes.len()));
    }
    let mut keep = classes.into_iter().next().unwrap();
    keep.sort_unstable();
    if keep.len() == m.num_states() {
        return Ok(m.clone());
    }
    m.restrict(&keep)
}

/// Greedy clustering: each vector joins the first earlier cluster whose
/// representative lies within `tol` in max-norm. Returns cluster labels.
fn cluster(vectors: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut reps: Vec<usize> = Vec::new();
    let mut labels = Vec::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        let found = reps.iter().position(|&r| max_norm(&vectors[r], v) <= tol);
        labels.push(found.unwrap_or_else(|| {
            reps.push(i);
            reps.len() - 1
        }));
    }
    labels
}

fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Per-(symbol, block) outgoing mass of `state`.
fn signature(m: &ProcessMachine, state: usize, assignment: &[usize], blocks: usize) -> Vec<f64> {
    let k = m.alphabet().len();
    let mut sig = vec![0.0; k * blocks];
    for x in 0..k {
        for (j, &p) in m.matrix(x).row(state).iter().enumerate() {
            sig[x * blocks + assignment[j]] += p;
        }
    }
    sig
}

/// Coarsest partition, up to `tol`, in which states of a block send the same
/// mass to every block on every symbol (probabilistic bisimulation). Starts
/// from the length-1 emission distributions and refines to stability.
pub fn equivalence_partition(m: &ProcessMachine, tol: f64) -> Partition {
    let n = m.num_states();
    let k = m.alphabet().len();
    let emissions: Vec<Vec<f64>> = (0..n).map(|i| (0..k).map(|x| m.matrix(x).row_sum(i)).collect()).collect();
    let mut partition = Partition::from_assignment(&cluster(&emissions, tol));
    loop {
        let assignment = partition.assignment();
        let mut next = vec![0; n];
        let mut offset = 0;
        for block in partition.blocks() {
            let sigs: Vec<Vec<f64>> = block.iter().map(|&s| signature(m, s, &assignment, partition.len())).collect();
            let labels = cluster(&sigs, tol);
            for (&s, &l) in block.iter().zip(&labels) {
                next[s] = offset + l;
            }
            offset += labels.iter().max().map_or(0, |l| l + 1);
        }
        let refined = Partition::from_assignment(&next);
        if refined.len() == partition.len() {
            return refined;
        }
        partition = refined;
    }
}

/// Quotient of `m` by `partition`. Block rows are taken from the first member
/// after checking that every member agrees within `tol`.
pub fn quotient(m: &ProcessMachine, partition: &Partition, tol: f64) -> Result<ProcessMachine> {
    let assignment = partition.assignment();
    let nb = partition.len();
    let k = m.alphabet().len();
    let mut matrices = vec![Matrix::zeros(nb, nb); k];
    for (b, block) in partition.blocks().iter().enumerate() {
        let first = signature(m, block[0], &assignment, nb);
        for &s in &block[1..] {
            let gap = max_norm(&first, &signature(m, s, &assignment, nb));
            if gap > tol {
                return Err(Error::NotWellDefinedQuotient(format!(
                    "states {} and {} differ by {gap:e}",
                    m.states()[block[0]],
                    m.states()[s]
                )));
            }
        }
        for x in 0..k {
            for c in 0..nb {
                matrices[x][(b, c)] = first[x * nb + c];
            }
        }
    }
    let states = partition
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&s| m.states()[s].as_str()).collect::<Vec<_>>().join("+"))
        .collect();
    let q = ProcessMachine::new(states, m.alphabet().clone(), matrices)?;
    let unifilar = q.is_unifilar();
    Ok(q.with_unifilar_flag(unifilar))
}

/// Merges equivalent states of a transient-free machine and verifies that
/// the quotient agrees with `m` on all words up to length `depth` within
/// `10·tol`. The check depth is lowered if needed to keep the enumeration
/// within a fixed word budget.
pub fn merge_equivalent_states(m: &ProcessMachine, depth: usize, tol: f64) -> Result<ProcessMachine> {
    if depth == 0 {
        return Err(Error::InvalidParameters("depth must be at least 1".into()));
    }
    let partition = equivalence_partition(m, tol);
    if partition.len() == m.num_states() {
        return Ok(m.clone());
    }
    let q = quotient(m, &partition, tol)?;
    let check = affordable_depth(m.alphabet().len(), depth);
    if !processes_equal(m, &q, check, 10.0 * tol)? {
        return Err(Error::NotWellDefinedQuotient(format!(
            "quotient differs from the original on words up to length {check}"
        )));
    }
    Ok(q)
}

fn affordable_depth(symbols: usize, depth: usize) -> usize {
    let mut total = 1usize;
    let mut level = 1usize;
    for d in 1..=depth {
        level = level.saturating_mul(symbols);
        total = total.saturating_add(level);
        if total > CHECK_WORD_BUDGET {
            return (d - 1).max(1);
        }
    }
    depth
}

/// Removes transients, then merges equivalent states with the default
/// tolerance and a check depth equal to the number of recurrent states.
pub fn minimize(m: &ProcessMachine) -> Result<ProcessMachine> {
    minimize_with(m, None, MERGE_TOL)
}

pub fn minimize_with(m: &ProcessMachine, depth: Option<usize>, tol: f64) -> Result<ProcessMachine> {
    let recurrent = remove_transients(m)?;
    let depth = depth.unwrap_or(recurrent.num_states()).max(1);
    merge_equivalent_states(&recurrent, depth, tol)
}

/// Whether `p1` and `p2`, each started from its stationary distribution,
/// assign probabilities within `tol` to every word of length at most `depth`.
/// Symbols are matched by label.
pub fn processes_equal(p1: &ProcessMachine, p2: &ProcessMachine, depth: usize, tol: f64) -> Result<bool> {
    let map = p1.alphabet().mapping_to(p2.alphabet())?;
    let pi1 = p1.stationary_distribution()?;
    let pi2 = p2.stationary_distribution()?;
    Ok(words_agree(p1, p2, &map, pi1.probs().to_vec(), pi2.probs().to_vec(), depth, tol))
}

fn words_agree(
    p1: &ProcessMachine,
    p2: &ProcessMachine,
    map: &[usize],
    v1: Vec<f64>,
    v2: Vec<f64>,
    remaining: usize,
    tol: f64,
) -> bool {
    if remaining == 0 {
        return true;
    }
    for (x, &y) in map.iter().enumerate() {
        let w1 = p1.matrix(x).left_mul(&v1);
        let w2 = p2.matrix(y).left_mul(&v2);
        let (s1, s2): (f64, f64) = (w1.iter().sum(), w2.iter().sum());
        if (s1 - s2).abs() > tol {
            return false;
        }
        // every extension has probability at most the prefix's
        if s1.max(s2) <= tol {
            continue;
        }
        if !words_agree(p1, p2, map, w1, w2, remaining - 1, tol) {
            return false;
        }
    }
    true
}

const ISO_TOL: f64 = 1e-9;

/// A bijection `σ` from the states of `p1` to those of `p2` with
/// `T1^(x)_ij = T2^(x)_σ(i)σ(j)` within 1e-9 for every symbol, matched by
/// label. Returns the lexicographically smallest one, or `None`.
///
/// Intended for small machines (around ten states).
pub fn machines_isomorphic(p1: &ProcessMachine, p2: &ProcessMachine) -> Option<Vec<usize>> {
    let n = p1.num_states();
    if n != p2.num_states() {
        return None;
    }
    let map = p1.alphabet().mapping_to(p2.alphabet()).ok()?;
    let sig1: Vec<Vec<f64>> = (0..n).map(|i| state_signature(p1, i, &map, false)).collect();
    let sig2: Vec<Vec<f64>> = (0..n).map(|i| state_signature(p2, i, &map, true)).collect();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n).filter(|&j| sig1[i].len() == sig2[j].len() && max_norm(&sig1[i], &sig2[j]) <= ISO_TOL).collect()
        })
        .collect();
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    extend(p1, p2, &map, &candidates, &mut perm, &mut used).then_some(perm)
}

/// Sorted outgoing `(symbol, probability)` multiset, flattened. Symbols are
/// expressed in `p1`'s order.
fn state_signature(m: &ProcessMachine, state: usize, map: &[usize], second: bool) -> Vec<f64> {
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for (x, &y) in map.iter().enumerate() {
        let sym = if second { y } else { x };
        for &p in m.matrix(sym).row(state) {
            if p.abs() > ISO_TOL {
                entries.push((x, p));
            }
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    entries.into_iter().flat_map(|(x, p)| [x as f64, p]).collect()
}

fn extend(
    p1: &ProcessMachine,
    p2: &ProcessMachine,
    map: &[usize],
    candidates: &[Vec<usize>],
    perm: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let i = perm.len();
    if i == candidates.len() {
        return true;
    }
    for &j in &candidates[i] {
        if used[j] {
            continue;
        }
        let consistent = (0..=i).all(|a| {
            let ja = if a == i { j } else { perm[a] };
            map.iter().enumerate().all(|(x, &y)| {
                (p1.matrix(x)[(i, a)] - p2.matrix(y)[(j, ja)]).abs() <= ISO_TOL
                    && (p1.matrix(x)[(a, i)] - p2.matrix(y)[(ja, j)]).abs() <= ISO_TOL
            })
        });
        if !consistent {
            continue;
        }
        perm.push(j);
        used[j] = true;
        if extend(p1, p2, map, candidates, perm, used) {
            return true;
        }
        perm.pop();
        used[j] = false;
    }
    false
}
