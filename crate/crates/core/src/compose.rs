//! Driving a transducer with an input process.
//!
//! The joint machine lives on `transducer states × process states`, with the
//! transducer index varying slowest, and emits pair symbols `(x, y)` labelled
//! `"x,y"`:
//!
//! ```text
//! J^(x,y) = T^(y|x) ⊗ P^(x)
//! ```

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::machine::{ProcessMachine, StateDistribution, Transducer};

#[derive(Debug, Clone, PartialEq)]
pub struct JointMachine {
    machine: ProcessMachine,
    transducer_states: usize,
    process_states: usize,
    inputs: Alphabet,
    outputs: Alphabet,
}

impl JointMachine {
    /// The joint process over pair symbols.
    pub fn machine(&self) -> &ProcessMachine {
        &self.machine
    }

    pub fn transducer_states(&self) -> usize {
        self.transducer_states
    }

    pub fn process_states(&self) -> usize {
        self.process_states
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.outputs
    }

    /// Index of the pair symbol `(x, y)`.
    pub fn pair_symbol(&self, input: usize, output: usize) -> usize {
        input * self.outputs.len() + output
    }

    /// Index of the joint state `(transducer state, process state)`.
    pub fn pair_state(&self, transducer_state: usize, process_state: usize) -> usize {
        transducer_state * self.process_states + process_state
    }

    /// `Ã^(y) = Σ_x J^(x,y)`: a (generally non-minimal) presentation of the
    /// output process.
    pub fn marginalize_output(&self) -> ProcessMachine {
        let n = self.machine.num_states();
        let matrices = (0..self.outputs.len())
            .map(|y| {
                let mut m = Matrix::zeros(n, n);
                for x in 0..self.inputs.len() {
                    m.add_assign(self.machine.matrix(self.pair_symbol(x, y)));
                }
                m
            })
            .collect();
        ProcessMachine::new(self.machine.states().to_vec(), self.outputs.clone(), matrices)
            .expect("marginal of a well-formed joint machine is well formed")
    }

    /// `Σ_y J^(x,y)`: the input process lifted onto the joint state space.
    pub fn marginalize_input(&self) -> ProcessMachine {
        let n = self.machine.num_states();
        let matrices = (0..self.inputs.len())
            .map(|x| {
                let mut m = Matrix::zeros(n, n);
                for y in 0..self.outputs.len() {
                    m.add_assign(self.machine.matrix(self.pair_symbol(x, y)));
                }
                m
            })
            .collect();
        ProcessMachine::new(self.machine.states().to_vec(), self.inputs.clone(), matrices)
            .expect("marginal of a well-formed joint machine is well formed")
    }

    /// Sums a joint distribution over the process factor.
    pub fn transducer_marginal(&self, joint: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.transducer_states];
        for (idx, p) in joint.iter().enumerate() {
            out[idx / self.process_states] += p;
        }
        out
    }
}

/// Drives `t` with `p`. The transducer's input alphabet must equal the
/// process alphabet, including symbol order.
pub fn drive(t: &Transducer, p: &ProcessMachine) -> Result<JointMachine> {
    if t.input_alphabet() != p.alphabet() {
        return Err(Error::AlphabetMismatch(format!(
            "transducer input {} vs process {}",
            t.input_alphabet(),
            p.alphabet()
        )));
    }
    let inputs = t.input_alphabet().clone();
    let outputs = t.output_alphabet().clone();
    let mut matrices = Vec::with_capacity(inputs.len() * outputs.len());
    let mut symbols = Vec::with_capacity(inputs.len() * outputs.len());
    for x in 0..inputs.len() {
        for y in 0..outputs.len() {
            matrices.push(t.matrix(x, y).kron(p.matrix(x)));
            symbols.push(format!("{},{}", inputs.label(x), outputs.label(y)));
        }
    }
    let states = t.states().iter().flat_map(|a| p.states().iter().map(move |b| format!("{a}/{b}"))).collect();
    let machine = ProcessMachine::new(states, Alphabet::new(symbols)?, matrices)?;
    Ok(JointMachine { machine, transducer_states: t.num_states(), process_states: p.num_states(), inputs, outputs })
}

/// Stationary memory distribution of `t` when driven by `p`: the transducer
/// marginal of the joint stationary distribution.
pub fn transducer_stationary(t: &Transducer, p: &ProcessMachine) -> Result<StateDistribution> {
    let joint = drive(t, p)?;
    let pi = joint.machine().stationary_distribution()?;
    Ok(StateDistribution::from_raw(joint.transducer_marginal(pi.probs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{self, DeltaAssignment, HatParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The displayed 6-state output matrices for the general two-state
    /// transducer family driven by B_3, written out entry by entry. Rows 3
    /// and 6 of the `y = 1, 2` matrices use `p_2`.
    fn displayed_output(t: &Transducer, p: [f64; 3]) -> [Matrix; 3] {
        let e = |x: usize, y: usize, i: usize, j: usize| t.matrix(x, y)[(i, j)];
        let [p0, p1, p2] = p;
        let mut out = [Matrix::zeros(6, 6), Matrix::zeros(6, 6), Matrix::zeros(6, 6)];
        for y in 0..3 {
            // destination block: output 0 lands in tau0, outputs 1 and 2 in tau1
            let to = if y == 0 { 0 } else { 1 };
            for from in 0..2 {
                let r = 3 * from;
                let c = 3 * to;
                out[y][(r, c + 1)] = e(1, y, from, to) * p0;
                out[y][(r, c + 2)] = e(2, y, from, to) * (2.0 - p0);
                out[y][(r + 1, c)] = e(0, y, from, to);
                out[y][(r + 1, c + 1)] = e(1, y, from, to) * p1;
                out[y][(r + 1, c + 2)] = e(2, y, from, to) * (1.0 - p1);
                out[y][(r + 2, c)] = e(0, y, from, to);
                out[y][(r + 2, c + 1)] = e(1, y, from, to) * p2;
                out[y][(r + 2, c + 2)] = e(2, y, from, to) * (1.0 - p2);
            }
            for v in 0..36 {
                let (i, j) = (v / 6, v % 6);
                out[y][(i, j)] *= 0.5;
            }
        }
        out
    }

    #[test]
    fn hat_t3_output_matches_displayed_matrices() {
        let delta = DeltaAssignment::zero(3);
        let t = zoo::hat_transducer_symmetric(3, &delta).unwrap();
        let b = zoo::process_b(3, &delta).unwrap();
        let out = drive(&t, &b).unwrap().marginalize_output();
        let want = displayed_output(&t, [0.5, 0.5, 0.5]);
        for y in 0..3 {
            assert!(out.matrix(y).max_abs_diff(&want[y]) < 1e-12, "output {y}");
        }
    }

    #[test]
    fn perturbed_b3_output_matches_displayed_matrices() {
        let delta = zoo::default_delta_assignment(3, 0.05).unwrap();
        let b = zoo::process_b(3, &delta).unwrap();
        let p = [delta.probability(0, 1), delta.probability(1, 1), delta.probability(2, 1)];
        let params = HatParams { stay_on_zero: 0.7, one_on_zero: 0.2, one_on_input: vec![0.4] };
        let t = zoo::hat_transducer(3, &delta, &params).unwrap();
        let out = drive(&t, &b).unwrap().marginalize_output();
        let want = displayed_output(&t, p);
        for y in 0..3 {
            assert!(out.matrix(y).max_abs_diff(&want[y]) < 1e-12, "output {y}");
        }
        // row 2 of Ã^(0): (t00_11, t01_11 p1, t02_11 (1 - p1), 0, 0, 0) / 2
        let row = out.matrix(0).row(1);
        assert!((row[0] - 0.7 / 2.0).abs() < 1e-15);
        assert!(row[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_transducer_reproduces_input() {
        let a = zoo::process_a();
        let id = zoo::identity_transducer(a.alphabet().clone());
        let joint = drive(&id, &a).unwrap();
        assert!(joint.machine().validate().is_clean());
        let out = joint.marginalize_output();
        for x in 0..3 {
            assert_eq!(out.matrix(x), a.matrix(x));
        }
        let phi = transducer_stationary(&id, &a).unwrap();
        assert_eq!(phi.probs(), &[1.0]);
    }

    #[test]
    fn erasing_transducer_gives_delta_process() {
        let b = zoo::process_b(4, &zoo::default_delta_assignment(4, 0.01).unwrap()).unwrap();
        let erase = zoo::erasing_transducer(b.alphabet().clone(), "0");
        let out = drive(&erase, &b).unwrap().marginalize_output();
        assert_eq!(out.alphabet().len(), 1);
        let m = crate::minimize::minimize(&out).unwrap();
        assert_eq!(m.num_states(), 1);
        assert_eq!(m.matrix(0)[(0, 0)], 1.0);
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let t = zoo::clocks().backward;
        assert!(matches!(drive(&t, &zoo::process_a()), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn tn_on_a_stationary_matches_closed_form() {
        let t = zoo::transducer_t(3, &DeltaAssignment::zero(3)).unwrap();
        let phi = transducer_stationary(&t, &zoo::process_a()).unwrap();
        for (got, want) in phi.probs().iter().zip([1.0 / 3.0, 0.25, 5.0 / 12.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_tn_on_bn_stationary_is_one_third_two_thirds() {
        for n in 3..=20 {
            let delta = zoo::default_delta_assignment(n, 0.01).unwrap();
            let t = zoo::hat_transducer_symmetric(n, &delta).unwrap();
            let b = zoo::process_b(n, &delta).unwrap();
            let phi = transducer_stationary(&t, &b).unwrap();
            assert!((phi.probs()[0] - 1.0 / 3.0).abs() < 1e-12, "n = {n}");
            assert!((phi.probs()[1] - 2.0 / 3.0).abs() < 1e-12, "n = {n}");
            assert!((phi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clock_joint_has_four_states() {
        let c = zoo::clocks();
        let joint = drive(&c.backward, &c.period4).unwrap();
        assert_eq!(joint.machine().num_states(), 4);
        assert!(joint.machine().validate().is_clean());
    }

    fn random_transducer(rng: &mut ChaCha8Rng, n: usize, inputs: usize, outputs: usize) -> Transducer {
        let mut edges = Vec::new();
        for i in 0..n {
            for x in 0..inputs {
                let mut row: Vec<(usize, usize, f64)> = (0..rng.random_range(1..=3))
                    .map(|_| (rng.random_range(0..outputs), rng.random_range(0..n), rng.random::<f64>() + 0.05))
                    .collect();
                let total: f64 = row.iter().map(|e| e.2).sum();
                row.iter_mut().for_each(|e| e.2 /= total);
                edges.extend(row.into_iter().map(|(y, j, p)| (i, x, y, j, p)));
            }
        }
        Transducer::from_edges(
            (0..n).map(|i| format!("t{i}")).collect(),
            Alphabet::numeric(inputs),
            Alphabet::numeric(outputs),
            edges,
        )
        .unwrap()
    }

    fn random_process(rng: &mut ChaCha8Rng, n: usize, k: usize) -> ProcessMachine {
        let mut edges = Vec::new();
        for i in 0..n {
            let mut row = vec![(rng.random_range(0..k), (i + 1) % n, rng.random::<f64>() + 0.1)];
            row.push((rng.random_range(0..k), rng.random_range(0..n), rng.random::<f64>()));
            let total: f64 = row.iter().map(|e| e.2).sum();
            edges.extend(row.into_iter().map(|(x, j, w)| (i, x, j, w / total)));
        }
        ProcessMachine::from_edges((0..n).map(|i| format!("q{i}")).collect(), Alphabet::numeric(k), edges).unwrap()
    }

    /// Enumerates all words over `k` symbols of length exactly `len`.
    fn words(k: usize, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out.into_iter().flat_map(|w| (0..k).map(move |x| [w.clone(), vec![x]].concat())).collect();
        }
        out
    }

    #[test]
    fn output_marginal_is_consistent_with_joint_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut cases: Vec<(Transducer, ProcessMachine)> = Vec::new();
        let delta = zoo::default_delta_assignment(3, 0.01).unwrap();
        cases.push((zoo::transducer_t(3, &delta).unwrap(), zoo::process_a()));
        cases.push((zoo::hat_transducer_symmetric(3, &delta).unwrap(), zoo::process_b(3, &delta).unwrap()));
        for _ in 0..20 {
            let (n, m) = (rng.random_range(1..=4), rng.random_range(1..=4));
            let t = random_transducer(&mut rng, n, 2, 2);
            let p = random_process(&mut rng, m, 2);
            cases.push((t, p));
        }
        for (t, p) in cases {
            let joint = drive(&t, &p).unwrap();
            assert!(joint.machine().validate().is_clean());
            let jm = joint.machine();
            let Ok(pi) = jm.stationary_distribution() else { continue };
            let out = joint.marginalize_output();
            let (kx, ky) = (joint.input_alphabet().len(), joint.output_alphabet().len());
            for len in 0..=4 {
                for w in words(ky, len) {
                    let direct = out.word_probability_from(&w, pi.probs());
                    let summed: f64 = words(kx, len)
                        .iter()
                        .map(|u| {
                            let pair: Vec<usize> = u.iter().zip(&w).map(|(&x, &y)| joint.pair_symbol(x, y)).collect();
                            jm.word_probability_from(&pair, pi.probs())
                        })
                        .sum();
                    assert!((direct - summed).abs() < 1e-9);
                }
            }
        }
    }
}
