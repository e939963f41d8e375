//! Command-line front end for `cmech-core`.
//!
//! Exit codes: 0 success, 1 domain failure (invalid machine, tolerance
//! exceeded, violated inequality), 2 usage or parse error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use cmech_core::complexity::{self, AsymmetryReport};
use cmech_core::json::{to_json, Machine};
use cmech_core::minimize::{minimize_with, MERGE_TOL};
use cmech_core::{drive, Error, ProcessMachine, Transducer};
use rayon::prelude::*;
use serde::Serialize;

pub mod presets;
pub mod simulate;

use simulate::{SimConfig, Source};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(Error::Document(_) | Error::MalformedMachine(_) | Error::UnknownSymbol(_)) => 2,
            CliError::Core(Error::InvalidDelta(_) | Error::InvalidParameters(_)) => 2,
            CliError::Domain(_) | CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cmech", version, about = "Compose, minimize and measure stochastic machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Family {
    /// Size of the B_n family used by presets.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Perturbation cap used by presets.
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a machine's invariants.
    Validate {
        machine: String,
        #[command(flatten)]
        family: Family,
    },
    /// Write a preset as JSON.
    Export {
        preset: String,
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        out: Option<String>,
    },
    /// Drive a transducer with a process and write the joint machine.
    Drive {
        transducer: String,
        process: String,
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        out: Option<String>,
    },
    /// Remove transients and merge equivalent states.
    Minimize {
        process: String,
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = MERGE_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Drive, marginalize to the output, minimize, and report memory costs.
    Pipeline {
        transducer: String,
        process: String,
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = MERGE_TOL)]
        tol: f64,
        /// Also write the minimized output machine here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Classical and quantum memory of a transducer driven by a process.
    Complexity {
        transducer: String,
        process: String,
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Asymmetry table over a range of n.
    Sweep {
        /// Inclusive range, e.g. `3..20`, or a single value.
        #[arg(long, default_value = "3..20")]
        n: String,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sample a machine and compare block frequencies with exact values.
    Simulate {
        machine: String,
        /// Input process when `machine` is a transducer.
        #[arg(long)]
        input: Option<String>,
        /// Process whose exact blocks are the target (default: the sampled one).
        #[arg(long)]
        reference: Option<String>,
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        block: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5e-3)]
        tol: f64,
        #[arg(long, default_value = "text")]
        format: String,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(text: &str, out: Option<&str>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn want_process(m: Machine, what: &str) -> Result<ProcessMachine, CliError> {
    match m {
        Machine::Process(p) => Ok(p),
        Machine::Transducer(_) => Err(CliError::Usage(format!("{what} must be a process"))),
    }
}

fn want_transducer(m: Machine, what: &str) -> Result<Transducer, CliError> {
    match m {
        Machine::Transducer(t) => Ok(t),
        Machine::Process(_) => Err(CliError::Usage(format!("{what} must be a transducer"))),
    }
}

/// Loads a (transducer, process) pair; `identity` and `erase` take the
/// process alphabet.
fn load_pair(transducer: &str, process: &str, f: &Family) -> Result<(Transducer, ProcessMachine), CliError> {
    let p = want_process(presets::resolve(process, f.n, f.delta, None)?, "process")?;
    let t = want_transducer(presets::resolve(transducer, f.n, f.delta, Some(p.alphabet()))?, "transducer")?;
    require_valid(&Machine::Process(p.clone()))?;
    require_valid(&Machine::Transducer(t.clone()))?;
    Ok((t, p))
}

fn require_valid(m: &Machine) -> Result<(), CliError> {
    let report = m.validate();
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Domain(format!("invalid {}:\n{report}", m.kind())))
    }
}

fn check_format(format: &str, allowed: &[&str]) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--format must be one of {}", allowed.join(", "))))
    }
}

#[derive(Serialize)]
struct Costs {
    states: usize,
    #[serde(rename = "C")]
    classical: f64,
    #[serde(rename = "Q")]
    quantum: f64,
    phi: Vec<f64>,
}

fn costs(t: &Transducer, p: &ProcessMachine) -> Result<Costs, CliError> {
    let phi = cmech_core::transducer_stationary(t, p)?;
    Ok(Costs {
        states: t.num_states(),
        classical: phi.entropy(),
        quantum: complexity::quantum_complexity(t, p)?,
        phi: phi.probs().to_vec(),
    })
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Validate { machine, family } => {
            let m = presets::resolve(&machine, family.n, family.delta, None)?;
            let report = m.validate();
            writeln!(stdout, "{report}")?;
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::Export { preset, family, out } => {
            let m = presets::preset(&preset, family.n, family.delta, None)?.ok_or_else(|| {
                CliError::Usage(format!("unknown preset `{preset}`; known: {}", presets::PRESETS.join(", ")))
            })?;
            emit(&to_json(&m), out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Drive { transducer, process, family, out } => {
            let (t, p) = load_pair(&transducer, &process, &family)?;
            let joint = drive(&t, &p)?;
            emit(&to_json(&Machine::Process(joint.machine().clone())), out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Minimize { process, family, depth, tol, out } => {
            let p = want_process(presets::resolve(&process, family.n, family.delta, None)?, "input")?;
            require_valid(&Machine::Process(p.clone()))?;
            let m = minimize_with(&p, depth, tol)?;
            emit(&to_json(&Machine::Process(m)), out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Pipeline { transducer, process, family, depth, tol, out } => {
            let (t, p) = load_pair(&transducer, &process, &family)?;
            let output = minimize_with(&drive(&t, &p)?.marginalize_output(), depth, tol)?;
            let doc = to_json(&Machine::Process(output.clone()));
            if let Some(path) = &out {
                std::fs::write(path, &doc)?;
            }
            let summary = serde_json::json!({
                "output_states": output.num_states(),
                "output": serde_json::from_str::<serde_json::Value>(&doc).expect("valid document"),
                "transducer": costs(&t, &p)?,
            });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&summary).expect("serializable"))?;
            Ok(0)
        }
        Command::Complexity { transducer, process, family, format } => {
            check_format(&format, &["text", "json"])?;
            let (t, p) = load_pair(&transducer, &process, &family)?;
            let c = costs(&t, &p)?;
            if format == "json" {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&c).expect("serializable"))?;
            } else {
                writeln!(stdout, "states {}", c.states)?;
                let phi: Vec<String> = c.phi.iter().map(|v| complexity::format_significant(*v, 12)).collect();
                writeln!(stdout, "phi {}", phi.join(" "))?;
                writeln!(stdout, "C {}", complexity::format_significant(c.classical, 12))?;
                writeln!(stdout, "Q {}", complexity::format_significant(c.quantum, 12))?;
            }
            Ok(0)
        }
        Command::Sweep { n, delta, format, out } => {
            check_format(&format, &["csv", "json"])?;
            let (lo, hi) = parse_range(&n)?;
            let config = SweepConfig::new(lo, hi, delta)?;
            let rows = sweep(&config)?;
            emit(&render_sweep(&rows, &format), out.as_deref(), stdout)?;
            if let Some(w) = rows.windows(2).find(|w| w[1].delta_c <= w[0].delta_c) {
                if delta <= complexity::REVERSAL_DELTA {
                    return Err(CliError::Domain(format!(
                        "Delta_C does not increase from n = {} to n = {}",
                        w[0].n, w[1].n
                    )));
                }
            }
            Ok(0)
        }
        Command::Simulate { machine, input, reference, family, samples, block, seed, tol, format } => {
            check_format(&format, &["text", "json"])?;
            let source = match (presets::resolve(&machine, family.n, family.delta, None), &input) {
                (Ok(Machine::Process(p)), None) => Source::Process(p),
                (Ok(Machine::Process(_)), Some(_)) => {
                    return Err(CliError::Usage("--input is only used with a transducer".into()))
                }
                (Ok(Machine::Transducer(_)), None) => return Err(CliError::Usage("a transducer needs --input".into())),
                (result, Some(input_arg)) => {
                    // identity/erase adopt the input alphabet
                    let p = want_process(presets::resolve(input_arg, family.n, family.delta, None)?, "--input")?;
                    let t = match result {
                        Ok(Machine::Transducer(t)) => t,
                        _ => want_transducer(
                            presets::resolve(&machine, family.n, family.delta, Some(p.alphabet()))?,
                            "machine",
                        )?,
                    };
                    Source::Driven { transducer: t, input: p }
                }
                (Err(e), None) => return Err(e),
            };
            match &source {
                Source::Process(p) => require_valid(&Machine::Process(p.clone()))?,
                Source::Driven { transducer, input } => {
                    require_valid(&Machine::Process(input.clone()))?;
                    require_valid(&Machine::Transducer(transducer.clone()))?;
                }
            }
            let reference = match reference {
                Some(r) => Some(want_process(presets::resolve(&r, family.n, family.delta, None)?, "--reference")?),
                None => None,
            };
            let cfg = SimConfig { samples, block, seed, tol };
            let report = simulate::simulate(&source, reference.as_ref(), &cfg)?;
            if format == "json" {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
            } else {
                write_sim_text(&report, stdout)?;
            }
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

fn write_sim_text(r: &simulate::SimReport, out: &mut dyn Write) -> std::io::Result<()> {
    let f = |v: f64| complexity::format_significant(v, 12);
    writeln!(out, "samples {}\nblock {}\nseed {}", r.samples, r.block, r.seed)?;
    for (s, p) in r.symbols.iter().zip(&r.frequencies) {
        writeln!(out, "symbol {s} {}", f(*p))?;
    }
    for b in &r.blocks {
        writeln!(out, "block {} {} {}", b.block, f(b.empirical), f(b.exact))?;
    }
    writeln!(out, "tv {}\ntol {}\n{}", f(r.tv), f(r.tol), if r.pass { "pass" } else { "fail" })
}

/// Inclusive range of `n` and the perturbation cap for a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub delta: f64,
}

impl SweepConfig {
    /// Requires `3 ≤ n_min ≤ n_max ≤ 64` and `0 ≤ delta < 1`.
    pub fn new(n_min: usize, n_max: usize, delta: f64) -> Result<Self, CliError> {
        if !(3 <= n_min && n_min <= n_max && n_max <= 64) {
            return Err(CliError::Usage(format!("need 3 <= n_min <= n_max <= 64, got {n_min}..{n_max}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(CliError::Usage(format!("delta {delta} outside [0, 1)")));
        }
        Ok(Self { n_min, n_max, delta })
    }
}

/// `a..b` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<(usize, usize), CliError> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad range `{s}`")));
    match s.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let v = parse(s)?;
            Ok((v, v))
        }
    }
}

/// One report per `n`, computed in parallel and returned in `n` order.
pub fn sweep(config: &SweepConfig) -> Result<Vec<AsymmetryReport>, CliError> {
    (config.n_min..=config.n_max)
        .into_par_iter()
        .map(|n| complexity::causal_asymmetry(n, config.delta).map_err(CliError::from))
        .collect()
}

pub fn render_sweep(rows: &[AsymmetryReport], format: &str) -> String {
    if format == "json" {
        let mut s = serde_json::to_string_pretty(rows).expect("serializable");
        s.push('\n');
        return s;
    }
    let mut s = String::from(AsymmetryReport::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}
