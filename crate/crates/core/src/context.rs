//! Level-annotated variable contexts and the operations the metatheory
//! talks about: restriction, floating and displacement.

use std::fmt;

use thiserror::Error;

use crate::levels::Level;
use crate::term::{Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub name: Name,
    pub level: Level,
    pub ty: Term,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<Entry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("cannot float level {from} down to {to}")]
pub struct FloatError {
    pub from: Level,
    pub to: Level,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn from_entries(entries: Vec<Entry>) -> Self {
        Context { entries }
    }

    pub fn push(&mut self, name: impl Into<Name>, level: Level, ty: Term) {
        self.entries.push(Entry { name: name.into(), level, ty });
    }

    pub fn with(mut self, name: &str, level: u32, ty: Term) -> Self {
        self.push(name, Level(level), ty);
        self
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, x: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| &*e.name == x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn max_level(&self) -> Level {
        self.entries.iter().map(|e| e.level).max().unwrap_or_default()
    }

    /// Keep only the entries at level `k` or below.
    pub fn restrict(&self, k: Level) -> Context {
        Context { entries: self.entries.iter().filter(|e| e.level <= k).cloned().collect() }
    }

    /// Move every entry at exactly level `j` up to `k`, leaving types alone.
    pub fn float(&self, j: Level, k: Level) -> Result<Context, FloatError> {
        if j > k {
            return Err(FloatError { from: j, to: k });
        }
        let entries =
            self.entries.iter().map(|e| Entry { level: if e.level == j { k } else { e.level }, ..e.clone() }).collect();
        Ok(Context { entries })
    }

    /// Raise every entry's level by `i` and displace its type by `i`.
    pub fn displace(&self, i: Level) -> Context {
        let entries = self
            .entries
            .iter()
            .map(|e| Entry { name: e.name.clone(), level: e.level + i, ty: e.ty.displace(i.0) })
            .collect();
        Context { entries }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| format!("{} :^{} {}", e.name, e.level, e.ty)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
