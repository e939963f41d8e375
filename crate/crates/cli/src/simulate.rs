//! Seeded Monte-Carlo sampling and comparison with exact block statistics.
//!
//! The generator is xoshiro256++ seeded through SplitMix64 from a 64-bit
//! seed. Uniforms are `(next_u64 >> 11) · 2⁻⁵³`; each step picks the first
//! transition, in `(symbol, target)` order, whose cumulative probability
//! exceeds the uniform.

use cmech_core::{drive, ProcessMachine, Transducer};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::CliError;

pub const MAX_BLOCK: usize = 6;

/// What to sample: a process, or a transducer driven by a process.
#[derive(Debug, Clone)]
pub enum Source {
    Process(ProcessMachine),
    Driven { transducer: Transducer, input: ProcessMachine },
}

impl Source {
    /// Output alphabet labels.
    pub fn symbols(&self) -> &[String] {
        match self {
            Source::Process(m) => m.alphabet().symbols(),
            Source::Driven { transducer, .. } => transducer.output_alphabet().symbols(),
        }
    }

    /// An exact presentation of the sampled output process.
    pub fn exact(&self) -> Result<ProcessMachine, CliError> {
        match self {
            Source::Process(m) => Ok(m.clone()),
            Source::Driven { transducer, input } => Ok(drive(transducer, input)?.marginalize_output()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub samples: usize,
    pub block: usize,
    pub seed: u64,
    pub tol: f64,
}

impl SimConfig {
    /// Requires `block ≤ 6` and at least `10·|alphabet|^block` samples.
    pub fn check(&self, alphabet: usize) -> Result<(), CliError> {
        if self.block == 0 || self.block > MAX_BLOCK {
            return Err(CliError::Usage(format!("--block must be in 1..={MAX_BLOCK}")));
        }
        let needed = (alphabet as u128).pow(self.block as u32) * 10;
        if (self.samples as u128) < needed {
            return Err(CliError::Usage(format!("--samples must be at least 10·{alphabet}^{} = {needed}", self.block)));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(CliError::Usage("--tol must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRow {
    pub block: String,
    pub empirical: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub samples: usize,
    pub block: usize,
    pub seed: u64,
    pub symbols: Vec<String>,
    pub frequencies: Vec<f64>,
    pub blocks: Vec<BlockRow>,
    pub tv: f64,
    pub tol: f64,
    pub pass: bool,
}

struct Uniform(Xoshiro256PlusPlus);

impl Uniform {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Outgoing transitions `(label, target, cumulative probability)`.
type Table = Vec<(usize, usize, f64)>;

fn pick(table: &Table, u: f64) -> (usize, usize) {
    let hit = table.iter().find(|e| u < e.2).or(table.last()).expect("state has outgoing transitions");
    (hit.0, hit.1)
}

fn cumulative(entries: impl Iterator<Item = (usize, usize, f64)>) -> Table {
    let mut acc = 0.0;
    entries
        .filter(|e| e.2 > 0.0)
        .map(|(a, b, p)| {
            acc += p;
            (a, b, acc)
        })
        .collect()
}

fn process_tables(m: &ProcessMachine) -> Vec<Table> {
    (0..m.num_states())
        .map(|i| {
            cumulative(
                (0..m.alphabet().len())
                    .flat_map(|x| m.matrix(x).row(i).iter().enumerate().map(move |(j, &p)| (x, j, p))),
            )
        })
        .collect()
}

fn draw(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Samples `len` output symbols (indices into the output alphabet), starting
/// from a stationary state.
pub fn sample(source: &Source, len: usize, seed: u64) -> Result<Vec<usize>, CliError> {
    let mut rng = Uniform::new(seed);
    let mut out = Vec::with_capacity(len);
    match source {
        Source::Process(m) => {
            let tables = process_tables(m);
            let mut s = draw(m.stationary_distribution()?.probs(), rng.next());
            for _ in 0..len {
                let (x, next) = pick(&tables[s], rng.next());
                out.push(x);
                s = next;
            }
        }
        Source::Driven { transducer: t, input } => {
            let joint = drive(t, input)?;
            let start = draw(joint.machine().stationary_distribution()?.probs(), rng.next());
            let (mut ts, mut ps) = (start / input.num_states(), start % input.num_states());
            let input_tables = process_tables(input);
            let ky = t.output_alphabet().len();
            let t_tables: Vec<Vec<Table>> =
                (0..t.num_states())
                    .map(|i| {
                        (0..t.input_alphabet().len())
                            .map(|x| {
                                cumulative((0..ky).flat_map(|y| {
                                    t.matrix(x, y).row(i).iter().enumerate().map(move |(k, &p)| (y, k, p))
                                }))
                            })
                            .collect()
                    })
                    .collect();
            for _ in 0..len {
                let (x, next_p) = pick(&input_tables[ps], rng.next());
                let (y, next_t) = pick(&t_tables[ts][x], rng.next());
                out.push(y);
                ps = next_p;
                ts = next_t;
            }
        }
    }
    Ok(out)
}

fn block_label(index: usize, len: usize, symbols: &[String]) -> String {
    let k = symbols.len();
    let mut parts = vec![""; len];
    let mut rest = index;
    for slot in parts.iter_mut().rev() {
        *slot = &symbols[rest % k];
        rest /= k;
    }
    if symbols.iter().all(|s| s.chars().count() == 1) {
        parts.concat()
    } else {
        parts.join(" ")
    }
}

/// Samples `source` and compares sliding length-`block` windows with the
/// exact block distribution of `reference` (default: the source's own
/// output process). Symbols are matched by label.
pub fn simulate(source: &Source, reference: Option<&ProcessMachine>, cfg: &SimConfig) -> Result<SimReport, CliError> {
    let exact_machine = match reference {
        Some(r) => r.clone(),
        None => source.exact()?,
    };
    let symbols = exact_machine.alphabet().symbols().to_vec();
    // output index -> reference index
    let map: Vec<usize> = source
        .symbols()
        .iter()
        .map(|s| {
            exact_machine
                .alphabet()
                .index_of(s)
                .ok_or_else(|| CliError::Usage(format!("reference has no symbol `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    if map.len() != symbols.len() {
        return Err(CliError::Usage("reference alphabet differs from the sampled output".into()));
    }
    let k = symbols.len();
    cfg.check(k)?;

    let stream: Vec<usize> = sample(source, cfg.samples, cfg.seed)?.into_iter().map(|y| map[y]).collect();
    let mut freq = vec![0usize; k];
    for &y in &stream {
        freq[y] += 1;
    }
    let n_blocks = k.pow(cfg.block as u32);
    let mut counts = vec![0usize; n_blocks];
    for w in stream.windows(cfg.block) {
        counts[w.iter().fold(0, |acc, &y| acc * k + y)] += 1;
    }
    let windows = (stream.len() + 1 - cfg.block) as f64;
    let exact = exact_machine.block_distribution(cfg.block)?;
    let blocks: Vec<BlockRow> = (0..n_blocks)
        .map(|b| BlockRow {
            block: block_label(b, cfg.block, &symbols),
            empirical: counts[b] as f64 / windows,
            exact: exact[b],
        })
        .collect();
    let tv = 0.5 * blocks.iter().map(|r| (r.empirical - r.exact).abs()).sum::<f64>();
    Ok(SimReport {
        samples: cfg.samples,
        block: cfg.block,
        seed: cfg.seed,
        symbols,
        frequencies: freq.iter().map(|&c| c as f64 / stream.len() as f64).collect(),
        blocks,
        tv,
        tol: cfg.tol,
        pass: tv <= cfg.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmech_core::{zoo, Alphabet};

    #[test]
    fn uniforms_lie_in_unit_interval() {
        let mut u = Uniform::new(7);
        for _ in 0..10_000 {
            let v = u.next();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let s = Source::Process(zoo::process_a());
        assert_eq!(sample(&s, 1000, 3).unwrap(), sample(&s, 1000, 3).unwrap());
        assert_ne!(sample(&s, 1000, 3).unwrap(), sample(&s, 1000, 4).unwrap());
    }

    #[test]
    fn delta_process_has_zero_distance() {
        let m = zoo::iid_process(Alphabet::new(["z"]).unwrap(), &[1.0]).unwrap();
        let cfg = SimConfig { samples: 1000, block: 3, seed: 1, tol: 0.0 };
        let r = simulate(&Source::Process(m), None, &cfg).unwrap();
        assert_eq!(r.tv, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn a_never_emits_double_zero() {
        let s = sample(&Source::Process(zoo::process_a()), 10_000, 9).unwrap();
        assert!(s.windows(2).all(|w| w != [0, 0]));
        assert!(s.windows(2).all(|w| w != [2, 2]));
    }

    #[test]
    fn config_limits() {
        let cfg = SimConfig { samples: 269, block: 3, seed: 1, tol: 1.0 };
        assert!(cfg.check(3).is_err());
        assert!(SimConfig { samples: 270, ..cfg }.check(3).is_ok());
        assert!(SimConfig { block: 7, samples: usize::MAX, ..cfg }.check(2).is_err());
    }

    #[test]
    fn block_labels() {
        let s: Vec<String> = ["0", "1", "2"].map(String::from).to_vec();
        assert_eq!(block_label(5, 3, &s), "012");
        let s: Vec<String> = ["0,0", "1,0"].map(String::from).to_vec();
        assert_eq!(block_label(1, 2, &s), "0,0 1,0");
    }
}
