//! JSON machine documents.
//!
//! ```json
//! { "kind": "transducer", "states": ["q"], "input_alphabet": ["0", "1"],
//!   "output_alphabet": ["0"],
//!   "transitions": [ { "from": "q", "to": "q", "input": "0", "output": "0", "prob": 1.0 } ] }
//! ```
//!
//! Processes use `"alphabet"` and omit `"input"`. Labels may be strings or
//! numbers. Omitted transitions are zero. Output is deterministic: labels in
//! machine order, transitions sorted by `(from, input, output, to)`.

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::machine::{ProcessMachine, Transducer};

#[derive(Debug, Clone, PartialEq)]
pub enum Machine {
    Process(ProcessMachine),
    Transducer(Transducer),
}

impl From<ProcessMachine> for Machine {
    fn from(m: ProcessMachine) -> Self {
        Machine::Process(m)
    }
}

impl From<Transducer> for Machine {
    fn from(t: Transducer) -> Self {
        Machine::Transducer(t)
    }
}

impl Machine {
    pub fn kind(&self) -> &'static str {
        match self {
            Machine::Process(_) => "process",
            Machine::Transducer(_) => "transducer",
        }
    }

    pub fn num_states(&self) -> usize {
        match self {
            Machine::Process(m) => m.num_states(),
            Machine::Transducer(t) => t.num_states(),
        }
    }

    pub fn validate(&self) -> crate::ValidationReport {
        match self {
            Machine::Process(m) => m.validate(),
            Machine::Transducer(t) => t.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Edge {
    from: Label,
    to: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<Label>,
    output: Label,
    prob: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    kind: String,
    states: Vec<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_alphabet: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_alphabet: Option<Vec<Label>>,
    transitions: Vec<Edge>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    unifilar: bool,
}

fn texts(labels: &[String]) -> Vec<Label> {
    labels.iter().cloned().map(Label::Text).collect()
}

/// Pretty-printed document with a trailing newline.
pub fn to_json(machine: &Machine) -> String {
    let doc = match machine {
        Machine::Process(m) => {
            let mut transitions = Vec::new();
            for i in 0..m.num_states() {
                for x in 0..m.alphabet().len() {
                    for (j, &p) in m.matrix(x).row(i).iter().enumerate() {
                        if p != 0.0 {
                            transitions.push(Edge {
                                from: Label::Text(m.states()[i].clone()),
                                to: Label::Text(m.states()[j].clone()),
                                input: None,
                                output: Label::Text(m.alphabet().label(x).into()),
                                prob: p,
                            });
                        }
                    }
                }
            }
            Document {
                kind: "process".into(),
                states: texts(m.states()),
                input_alphabet: None,
                alphabet: Some(texts(m.alphabet().symbols())),
                output_alphabet: None,
                transitions,
                unifilar: m.claims_unifilar(),
            }
        }
        Machine::Transducer(t) => {
            let mut transitions = Vec::new();
            for i in 0..t.num_states() {
                for x in 0..t.input_alphabet().len() {
                    for y in 0..t.output_alphabet().len() {
                        for (j, &p) in t.matrix(x, y).row(i).iter().enumerate() {
                            if p != 0.0 {
                                transitions.push(Edge {
                                    from: Label::Text(t.states()[i].clone()),
                                    to: Label::Text(t.states()[j].clone()),
                                    input: Some(Label::Text(t.input_alphabet().label(x).into())),
                                    output: Label::Text(t.output_alphabet().label(y).into()),
                                    prob: p,
                                });
                            }
                        }
                    }
                }
            }
            Document {
                kind: "transducer".into(),
                states: texts(t.states()),
                input_alphabet: Some(texts(t.input_alphabet().symbols())),
                alphabet: None,
                output_alphabet: Some(texts(t.output_alphabet().symbols())),
                transitions,
                unifilar: t.claims_unifilar(),
            }
        }
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("documents always serialize");
    s.push('\n');
    s
}

/// Parses a document. Syntax errors and structural problems (unknown labels,
/// duplicate transitions, missing fields) are errors; probability values are
/// left for `validate` to judge.
pub fn from_json(text: &str) -> Result<Machine> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    let states: Vec<String> = doc.states.into_iter().map(Label::into_string).collect();
    let state_index = |label: Label| -> Result<usize> {
        let s = label.into_string();
        states.iter().position(|x| *x == s).ok_or_else(|| Error::MalformedMachine(format!("unknown state `{s}`")))
    };
    let alphabet = |labels: Option<Vec<Label>>, name: &str| -> Result<Alphabet> {
        let labels = labels.ok_or_else(|| Error::Document(format!("missing `{name}`")))?;
        Alphabet::new(labels.into_iter().map(Label::into_string))
    };
    let symbol = |a: &Alphabet, label: Label| -> Result<usize> {
        let s = label.into_string();
        a.index_of(&s).ok_or(Error::UnknownSymbol(s))
    };
    let finite = |p: f64| -> Result<f64> {
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::MalformedMachine(format!("non-finite probability {p}")))
        }
    };
    let mut seen = std::collections::HashSet::new();
    match doc.kind.as_str() {
        "process" => {
            if doc.input_alphabet.is_some() {
                return Err(Error::Document("process documents take no `input_alphabet`".into()));
            }
            let a = match (doc.alphabet, doc.output_alphabet) {
                (Some(a), None) | (None, Some(a)) => alphabet(Some(a), "alphabet")?,
                (None, None) => return Err(Error::Document("missing `alphabet`".into())),
                (Some(_), Some(_)) => {
                    return Err(Error::Document("give `alphabet` or `output_alphabet`, not both".into()))
                }
            };
            let mut edges = Vec::new();
            for e in doc.transitions {
                if e.input.is_some() {
                    return Err(Error::Document("process transitions take no `input`".into()));
                }
                let edge = (state_index(e.from)?, symbol(&a, e.output)?, state_index(e.to)?, finite(e.prob)?);
                if !seen.insert((edge.0, 0, edge.1, edge.2)) {
                    return Err(Error::Document(format!("duplicate transition {edge:?}")));
                }
                edges.push(edge);
            }
            let m = ProcessMachine::from_edges(states.clone(), a, edges)?;
            Ok(Machine::Process(if doc.unifilar { m.declare_unifilar() } else { m }))
        }
        "transducer" => {
            if doc.alphabet.is_some() {
                return Err(Error::Document("transducers use `output_alphabet`".into()));
            }
            let ia = alphabet(doc.input_alphabet, "input_alphabet")?;
            let oa = alphabet(doc.output_alphabet, "output_alphabet")?;
            let mut edges = Vec::new();
            for e in doc.transitions {
                let input = e.input.ok_or_else(|| Error::Document("transition without `input`".into()))?;
                let edge = (
                    state_index(e.from)?,
                    symbol(&ia, input)?,
                    symbol(&oa, e.output)?,
                    state_index(e.to)?,
                    finite(e.prob)?,
                );
                if !seen.insert((edge.0, edge.1, edge.2, edge.3)) {
                    return Err(Error::Document(format!("duplicate transition {edge:?}")));
                }
                edges.push(edge);
            }
            let t = Transducer::from_edges(states.clone(), ia, oa, edges)?;
            Ok(Machine::Transducer(if doc.unifilar { t.declare_unifilar() } else { t }))
        }
        other => Err(Error::Document(format!("unknown kind `{other}`"))),
    }
}
