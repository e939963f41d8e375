use std::fmt;

use crate::error::{Error, Result};

/// Ordered set of distinct symbol labels. The order is fixed at construction
/// and defines the symbol indices used by every matrix tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::MalformedMachine("alphabet is empty".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::MalformedMachine(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Self { symbols })
    }

    /// The alphabet `{"0", "1", …, "n-1"}`.
    pub fn numeric(n: usize) -> Self {
        assert!(n > 0, "alphabet must be non-empty");
        Self { symbols: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// Same labels regardless of order.
    pub fn same_symbols(&self, other: &Alphabet) -> bool {
        self.len() == other.len() && self.symbols.iter().all(|s| other.index_of(s).is_some())
    }

    /// For each symbol of `self`, its index in `other`.
    pub fn mapping_to(&self, other: &Alphabet) -> Result<Vec<usize>> {
        if !self.same_symbols(other) {
            return Err(Error::AlphabetMismatch(format!("{self} vs {other}")));
        }
        Ok(self.symbols.iter().map(|s| other.index_of(s).unwrap()).collect())
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(", "))
    }
}
