//! Named machines and machine-argument resolution.

use std::path::Path;

use cmech_core::json::{from_json, Machine};
use cmech_core::{zoo, Alphabet};

use crate::CliError;

/// Preset names accepted wherever a machine is expected.
pub const PRESETS: &[&str] =
    &["A", "Bn", "Tn", "hatTn", "hatTn-opt", "fig1-A", "fig1-B", "fig1-T", "fig1-mod2", "identity", "erase"];

/// Builds preset `name` for family size `n` and perturbation `delta`.
/// `identity` and `erase` act on `alphabet`, or on `{0, …, n−1}` if none is
/// given. Returns `Ok(None)` for unknown names.
pub fn preset(name: &str, n: usize, delta: f64, alphabet: Option<&Alphabet>) -> Result<Option<Machine>, CliError> {
    let family = || zoo::default_delta_assignment(n, delta).map_err(CliError::usage);
    let alphabet = || alphabet.cloned().unwrap_or_else(|| Alphabet::numeric(n.max(1)));
    let m: Machine = match name {
        "A" => zoo::process_a().into(),
        "Bn" => zoo::process_b(n, &family()?)?.into(),
        "Tn" => zoo::transducer_t(n, &family()?)?.into(),
        "hatTn" => zoo::hat_transducer_symmetric(n, &family()?)?.into(),
        "hatTn-opt" => zoo::hat_transducer_max_overlap(n, &family()?)?.into(),
        "fig1-A" => zoo::clocks().alternating.into(),
        "fig1-B" => zoo::clocks().period4.into(),
        "fig1-T" => zoo::clocks().forward.into(),
        "fig1-mod2" => zoo::clocks().backward.into(),
        "identity" => zoo::identity_transducer(alphabet()).into(),
        "erase" => {
            let a = alphabet();
            let first = a.label(0).to_string();
            zoo::erasing_transducer(a, &first).into()
        }
        _ => return Ok(None),
    };
    Ok(Some(m))
}

/// A preset if `arg` names one, otherwise the JSON document at path `arg`.
pub fn resolve(arg: &str, n: usize, delta: f64, alphabet: Option<&Alphabet>) -> Result<Machine, CliError> {
    if let Some(m) = preset(arg, n, delta, alphabet)? {
        return Ok(m);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("`{arg}` is neither a preset nor a readable file: {e}")))?;
    Ok(from_json(&text)?)
}
