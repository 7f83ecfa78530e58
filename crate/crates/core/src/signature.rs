//! Global signatures: definitions and stratified datatype declarations.
//!
//! Entries hold [`LevelExpr`]s so a declaration can sit in the signature
//! while its own levels are still being solved; once frozen every level is
//! concrete.

use std::collections::HashMap;

use crate::levels::{Assignment, Level, LevelExpr};
use crate::term::{Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    pub level: LevelExpr,
    pub ty: Term,
    /// `None` while the body is being checked: the definition is opaque to
    /// its own body.
    pub body: Option<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Fixed(LevelExpr),
    Floating,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Name,
    pub kind: ParamKind,
    pub ty: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: Name,
    pub level: LevelExpr,
    /// Argument telescope; types may mention the datatype's parameters and
    /// earlier fixed arguments.
    pub args: Vec<Param>,
    /// Indices of the constructor's result type.
    pub indices: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecl {
    pub name: Name,
    pub level: LevelExpr,
    pub params: Vec<Param>,
    /// Index types, each floating (the index type is `I1 -> ... -> Type`).
    pub indices: Vec<Term>,
    pub ctors: Vec<CtorDecl>,
}

impl DataDecl {
    pub fn ctor(&self, c: &str) -> Option<&CtorDecl> {
        self.ctors.iter().find(|k| &*k.name == c)
    }

    pub fn index_type(&self) -> Term {
        self.indices.iter().rev().fold(Term::star(), |acc, i| Term::arrow(i.clone(), acc))
    }

    /// Number of arguments a full application of the type takes.
    pub fn arity(&self) -> usize {
        self.params.len() + self.indices.len()
    }

    pub fn zonk(&self, asg: &Assignment) -> DataDecl {
        let zp = |p: &Param| Param {
            name: p.name.clone(),
            kind: match p.kind {
                ParamKind::Fixed(j) => ParamKind::Fixed(j.zonk(asg)),
                ParamKind::Floating => ParamKind::Floating,
            },
            ty: p.ty.zonk(asg),
        };
        DataDecl {
            name: self.name.clone(),
            level: self.level.zonk(asg),
            params: self.params.iter().map(zp).collect(),
            indices: self.indices.iter().map(|t| t.zonk(asg)).collect(),
            ctors: self
                .ctors
                .iter()
                .map(|c| CtorDecl {
                    name: c.name.clone(),
                    level: c.level.zonk(asg),
                    args: c.args.iter().map(zp).collect(),
                    indices: c.indices.iter().map(|t| t.zonk(asg)).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigEntry {
    Def(Definition),
    Data(DataDecl),
}

impl SigEntry {
    pub fn name(&self) -> &Name {
        match self {
            SigEntry::Def(d) => &d.name,
            SigEntry::Data(d) => &d.name,
        }
    }

    /// Concrete level of a frozen entry.
    pub fn level(&self) -> Option<Level> {
        match self {
            SigEntry::Def(d) => d.level.as_concrete(),
            SigEntry::Data(d) => d.level.as_concrete(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Global<'a> {
    Def(&'a Definition),
    Data(&'a DataDecl),
    Ctor(&'a DataDecl, &'a CtorDecl),
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    entries: Vec<SigEntry>,
    by_name: HashMap<Name, usize>,
    ctors: HashMap<Name, (usize, usize)>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn entries(&self) -> &[SigEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, n: &str) -> bool {
        self.by_name.contains_key(n) || self.ctors.contains_key(n)
    }

    pub fn lookup(&self, n: &str) -> Option<Global<'_>> {
        if let Some(&i) = self.by_name.get(n) {
            return Some(match &self.entries[i] {
                SigEntry::Def(d) => Global::Def(d),
                SigEntry::Data(d) => Global::Data(d),
            });
        }
        let &(i, j) = self.ctors.get(n)?;
        match &self.entries[i] {
            SigEntry::Data(d) => Some(Global::Ctor(d, &d.ctors[j])),
            SigEntry::Def(_) => None,
        }
    }

    pub fn def(&self, n: &str) -> Option<&Definition> {
        match self.lookup(n)? {
            Global::Def(d) => Some(d),
            _ => None,
        }
    }

    pub fn data(&self, n: &str) -> Option<&DataDecl> {
        match self.lookup(n)? {
            Global::Data(d) => Some(d),
            _ => None,
        }
    }

    pub fn push(&mut self, e: SigEntry) {
        let i = self.entries.len();
        self.index(i, &e);
        self.entries.push(e);
    }

    pub fn pop(&mut self) -> Option<SigEntry> {
        let e = self.entries.pop()?;
        self.unindex(&e);
        Some(e)
    }

    /// Replace the most recent entry (used to freeze a pending declaration).
    pub fn replace_last(&mut self, e: SigEntry) {
        self.pop();
        self.push(e);
    }

    fn index(&mut self, i: usize, e: &SigEntry) {
        self.by_name.insert(e.name().clone(), i);
        if let SigEntry::Data(d) = e {
            for (j, c) in d.ctors.iter().enumerate() {
                self.ctors.insert(c.name.clone(), (i, j));
            }
        }
    }

    fn unindex(&mut self, e: &SigEntry) {
        self.by_name.remove(e.name());
        if let SigEntry::Data(d) = e {
            for c in &d.ctors {
                self.ctors.remove(&c.name);
            }
        }
    }
}
