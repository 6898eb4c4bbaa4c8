use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named finite alphabet. Symbol order is part of the identity: tensors are
/// indexed by symbol position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        symbols: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidAlphabet("empty variable name".into()));
        }
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet(format!("`{name}` has no symbols")));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!(
                    "`{name}` repeats symbol `{s}`"
                )));
            }
        }
        Ok(Self { name, symbols })
    }

    /// Alphabet with symbols `"0"`, `"1"`, ... `"size-1"`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Result<Self> {
        Self::new(name, (0..size).map(|i| i.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn position(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            symbols: self.symbols.clone(),
        }
    }
}
