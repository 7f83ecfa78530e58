//! Bidirectional checking of core terms at a level.
//!
//! `infer` and `check` follow the stratified rules: a Π domain sits strictly
//! below the level of the whole type, a floating arrow's domain sits at the
//! same level, variables and constants may be used at any level at or above
//! their own, and `Type : Type` at every level. Levels that were omitted in
//! the source are metas; every rule records the constraints it needs, and
//! the constraints are solved once per top-level declaration.

use std::collections::HashMap;

use crate::context::Context;
use crate::diagnostic::{Diagnostic, ErrorCode, Span};
use crate::eval::{Evaluator, LevelSink, DEFAULT_FUEL};
use crate::levels::{solve_levels, Assignment, Constraint, Level, LevelExpr, MetaId, Provenance};
use crate::signature::{Global, Signature};
use crate::term::{fresh_name, Name, Term, TermKind};

pub type TResult<T> = Result<T, Diagnostic>;

/// Mutable state of one declaration's elaboration.
#[derive(Debug)]
pub struct ElabState {
    next_meta: u32,
    pub constraints: Vec<Constraint>,
    pub spans: HashMap<usize, Span>,
    pub file: String,
    pub no_infer: bool,
    pub fuel: usize,
}

impl Default for ElabState {
    fn default() -> Self {
        ElabState::new("<input>", false, DEFAULT_FUEL)
    }
}

impl ElabState {
    pub fn new(file: &str, no_infer: bool, fuel: usize) -> Self {
        ElabState {
            next_meta: 0,
            constraints: Vec::new(),
            spans: HashMap::new(),
            file: file.to_string(),
            no_infer,
            fuel,
        }
    }

    pub fn fresh_meta(&mut self) -> LevelExpr {
        let m = MetaId(self.next_meta);
        self.next_meta += 1;
        LevelExpr::meta(m)
    }

    pub fn metas(&self) -> impl Iterator<Item = MetaId> {
        (0..self.next_meta).map(MetaId)
    }

    pub fn record_span(&mut self, t: &Term, span: Span) {
        self.spans.insert(t.id(), span);
    }

    pub fn render(&self, c: &Constraint) -> Vec<String> {
        c.render(&self.file)
    }

    /// Solve the collected constraints, turning failure into a diagnostic
    /// that lists the violating cycle.
    pub fn solve(&self) -> TResult<Assignment> {
        solve_levels(&self.constraints, self.metas()).map_err(|u| {
            let span = u.cycle.iter().rev().find_map(|c| c.origin.span);
            let notes = u.cycle.iter().flat_map(|c| self.render(c)).collect();
            Diagnostic::new(ErrorCode::LevelUnsat, "level constraints are unsatisfiable")
                .at(span)
                .with_provenance(notes)
        })
    }
}

/// A local variable: name, level, and type.
#[derive(Clone, Debug)]
pub struct Local {
    pub name: Name,
    pub level: LevelExpr,
    pub ty: Term,
}

pub type Locals = Vec<Local>;

pub fn lookup_local<'c>(cx: &'c [Local], x: &str) -> Option<&'c Local> {
    cx.iter().rev().find(|l| &*l.name == x)
}

pub fn locals_of(ctx: &Context) -> Locals {
    ctx.entries().iter().map(|e| Local { name: e.name.clone(), level: e.level.into(), ty: e.ty.clone() }).collect()
}

/// Wraps the constraint list so conversion's equalities carry the span of
/// the term being checked.
struct SpanSink<'x> {
    cs: &'x mut Vec<Constraint>,
    span: Option<Span>,
}

impl LevelSink for SpanSink<'_> {
    fn emit_eq(&mut self, a: LevelExpr, b: LevelExpr, rule: &'static str) {
        self.cs.push(Constraint::eq(a, b, Provenance::new(rule, self.span)));
    }
    fn mark(&self) -> usize {
        self.cs.len()
    }
    fn rollback(&mut self, mark: usize) {
        self.cs.truncate(mark);
    }
}

pub struct Checker<'a> {
    pub(crate) sig: &'a Signature,
    pub(crate) st: &'a mut ElabState,
    pub(crate) ev: Evaluator<'a>,
    pub(crate) span: Option<Span>,
}

impl<'a> Checker<'a> {
    pub fn new(sig: &'a Signature, st: &'a mut ElabState) -> Self {
        let fuel = st.fuel;
        Checker { sig, st, ev: Evaluator::new(sig, fuel), span: None }
    }

    pub(crate) fn err(&self, code: ErrorCode, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(code, msg).at(self.span)
    }

    fn emit(&mut self, c: Constraint) -> TResult<()> {
        if let (Some(l), Some(r)) = (c.lhs.as_concrete(), c.rhs.as_concrete()) {
            let ok = match c.rel {
                crate::levels::Relation::Le => l <= r,
                crate::levels::Relation::Lt => l < r,
                crate::levels::Relation::Eq => l == r,
            };
            if !ok {
                let notes = self.st.render(&c);
                return Err(self
                    .err(ErrorCode::LevelUnsat, format!("level constraint cannot hold: {}", notes[0]))
                    .with_provenance(notes));
            }
        }
        self.st.constraints.push(c);
        Ok(())
    }

    pub(crate) fn emit_le(&mut self, a: LevelExpr, b: LevelExpr, rule: &'static str) -> TResult<()> {
        self.emit(Constraint::le(a, b, Provenance::new(rule, self.span)))
    }

    pub(crate) fn emit_lt(&mut self, a: LevelExpr, b: LevelExpr, rule: &'static str) -> TResult<()> {
        self.emit(Constraint::lt(a, b, Provenance::new(rule, self.span)))
    }

    pub(crate) fn emit_eq(&mut self, a: LevelExpr, b: LevelExpr, rule: &'static str) -> TResult<()> {
        self.emit(Constraint::eq(a, b, Provenance::new(rule, self.span)))
    }

    pub(crate) fn plus(&self, a: LevelExpr, b: LevelExpr) -> TResult<LevelExpr> {
        a.plus(b).ok_or_else(|| self.err(ErrorCode::CannotInfer, format!("cannot add two unknown levels {a} and {b}")))
    }

    pub(crate) fn displace(&self, t: &Term, by: LevelExpr) -> TResult<Term> {
        t.displace_by(by)
            .ok_or_else(|| self.err(ErrorCode::CannotInfer, format!("cannot displace `{t}` by the unknown level {by}")))
    }

    pub fn whnf(&self, t: &Term) -> TResult<Term> {
        self.ev.whnf(t).map_err(|e| Diagnostic::from(e).at(self.span))
    }

    pub fn equate(&mut self, a: &Term, b: &Term) -> TResult<bool> {
        let mut sink = SpanSink { cs: &mut self.st.constraints, span: self.span };
        self.ev.equate(a, b, &mut sink).map_err(|e| Diagnostic::from(e).at(self.span))
    }

    pub(crate) fn mismatch(&self, expected: &Term, found: &Term) -> Diagnostic {
        let e = self.whnf(expected).unwrap_or_else(|_| expected.clone());
        let f = self.whnf(found).unwrap_or_else(|_| found.clone());
        self.err(ErrorCode::Mismatch, format!("type mismatch: expected `{e}`, found `{f}`"))
    }

    fn enter(&mut self, t: &Term) -> Option<Span> {
        let saved = self.span;
        if let Some(sp) = self.st.spans.get(&t.id()) {
            self.span = Some(*sp);
        }
        saved
    }

    /// A name for a new local that does not clash with any in scope.
    pub(crate) fn fresh_local(cx: &[Local], base: &Name) -> Name {
        fresh_name(base, |c| cx.iter().any(|l| &*l.name == c))
    }

    /// Rename binder `x` of `body` away from the context if needed.
    pub(crate) fn open(cx: &[Local], x: &Name, body: &Term) -> (Name, Term) {
        let x2 = Self::fresh_local(cx, x);
        if &x2 == x {
            (x2, body.clone())
        } else {
            let b = body.subst(x, &Term::var(x2.clone()));
            (x2, b)
        }
    }

    pub fn infer(&mut self, cx: &mut Locals, k: LevelExpr, t: &Term) -> TResult<Term> {
        let saved = self.enter(t);
        let r = self.infer_(cx, k, t);
        self.span = saved;
        r
    }

    pub fn check(&mut self, cx: &mut Locals, k: LevelExpr, t: &Term, expected: &Term) -> TResult<()> {
        let saved = self.enter(t);
        let r = self.check_(cx, k, t, expected);
        self.span = saved;
        r
    }

    pub fn check_type(&mut self, cx: &mut Locals, k: LevelExpr, t: &Term) -> TResult<()> {
        self.check(cx, k, t, &Term::star())
    }

    fn infer_(&mut self, cx: &mut Locals, k: LevelExpr, t: &Term) -> TResult<Term> {
        match t.kind() {
            TermKind::Star | TermKind::Bottom => Ok(Term::star()),
            TermKind::Var(x) => {
                let Some(l) = lookup_local(cx, x) else {
                    return Err(self.err(ErrorCode::Unbound, format!("unbound variable `{x}`")));
                };
                let (j, ty) = (l.level, l.ty.clone());
                self.emit_le(j, k, "DT-Var")?;
                Ok(ty)
            }
            TermKind::Const(c, i) => match self.sig.lookup(c) {
                Some(Global::Def(d)) => {
                    let (dl, dty) = (d.level, d.ty.clone());
                    let at = self.plus(dl, *i)?;
                    self.emit_le(at, k, "DT-Const")?;
                    self.displace(&dty, *i)
                }
                Some(Global::Data(_)) => self.infer_data_spine(cx, k, c, *i, &[]),
                Some(Global::Ctor(..)) => {
                    Err(self.err(ErrorCode::CannotInfer, format!("constructor `{c}` must be applied")))
                }
                None => Err(self.err(ErrorCode::Unbound, format!("unbound constant `{c}`"))),
            },
            TermKind::Pi(j, a, x, b) => {
                self.emit_lt(*j, k, "DT-Pi")?;
                self.check_type(cx, *j, a)?;
                let (x2, b2) = Self::open(cx, x, b);
                cx.push(Local { name: x2, level: *j, ty: a.clone() });
                let r = self.check_type(cx, k, &b2);
                cx.pop();
                r?;
                Ok(Term::star())
            }
            TermKind::Arrow(a, b) => {
                self.check_type(cx, k, a)?;
                self.check_type(cx, k, b)?;
                Ok(Term::star())
            }
            TermKind::App(f, a) => {
                let (head, args) = t.spine();
                if let TermKind::Const(c, i) = head.kind() {
                    if self.sig.data(c).is_some() {
                        return self.infer_data_spine(cx, k, c, *i, &args);
                    }
                }
                let fty = self.infer(cx, k, f)?;
                let fw = self.whnf(&fty)?;
                match fw.kind() {
                    TermKind::Pi(j, dom, y, cod) => {
                        self.check(cx, *j, a, dom)?;
                        Ok(cod.subst(y, a))
                    }
                    TermKind::Arrow(dom, cod) => {
                        self.check(cx, k, a, dom)?;
                        Ok(cod.clone())
                    }
                    _ => Err(self.err(
                        ErrorCode::NotFunction,
                        format!("`{f}` is applied but its type `{fw}` is not a function type"),
                    )),
                }
            }
            TermKind::Ann(a, ty) => {
                self.check_type(cx, k, ty)?;
                self.check(cx, k, a, ty)?;
                Ok(ty.clone())
            }
            TermKind::CtorApp(c, i, args) => self.infer_ctor(cx, k, c, *i, args),
            TermKind::Lam(..) | TermKind::Absurd(_) | TermKind::Case(..) => {
                Err(self.err(ErrorCode::CannotInfer, format!("cannot infer a type for `{t}`; add a type ascription")))
            }
        }
    }

    fn check_(&mut self, cx: &mut Locals, k: LevelExpr, t: &Term, expected: &Term) -> TResult<()> {
        match t.kind() {
            TermKind::Lam(x, body) => {
                let ew = self.whnf(expected)?;
                match ew.kind() {
                    TermKind::Pi(j, dom, y, cod) => {
                        self.emit_lt(*j, k, "DT-AbsTy")?;
                        let (x2, body2) = Self::open(cx, x, body);
                        let cod2 = cod.subst(y, &Term::var(x2.clone()));
                        cx.push(Local { name: x2, level: *j, ty: dom.clone() });
                        let r = self.check(cx, k, &body2, &cod2);
                        cx.pop();
                        r
                    }
                    TermKind::Arrow(dom, cod) => {
                        let (x2, body2) = Self::open(cx, x, body);
                        cx.push(Local { name: x2, level: k, ty: dom.clone() });
                        let r = self.check(cx, k, &body2, cod);
                        cx.pop();
                        r
                    }
                    _ => Err(self.err(
                        ErrorCode::Mismatch,
                        format!("type mismatch: a function was given where `{ew}` was expected"),
                    )),
                }
            }
            TermKind::Absurd(b) => self.check(cx, k, b, &Term::bottom()),
            TermKind::Case(s, brs) => self.check_case(cx, k, s, brs, expected),
            TermKind::CtorApp(c, i, args) => self.check_ctor(cx, k, c, *i, args, expected),
            _ => {
                let found = self.infer(cx, k, t)?;
                if self.equate(&found, expected)? {
                    Ok(())
                } else {
                    Err(self.mismatch(expected, &found))
                }
            }
        }
    }
}

/// Check `Δ; Γ ⊢ t :^k A`, solving the constraints it generates.
pub fn check_judgement(sig: &Signature, ctx: &Context, t: &Term, k: Level, ty: &Term) -> TResult<()> {
    check_judgement_with(sig, ctx, t, k, ty, DEFAULT_FUEL)
}

pub fn check_judgement_with(sig: &Signature, ctx: &Context, t: &Term, k: Level, ty: &Term, fuel: usize) -> TResult<()> {
    let mut st = ElabState::new("<judgement>", false, fuel);
    {
        let mut ch = Checker::new(sig, &mut st);
        let mut cx = locals_of(ctx);
        ch.check(&mut cx, k.into(), t, ty)?;
    }
    st.solve().map(|_| ())
}

/// Infer the type of `t` at level `k`, returning it with solved levels.
pub fn infer_judgement(sig: &Signature, ctx: &Context, t: &Term, k: Level) -> TResult<Term> {
    let mut st = ElabState::new("<judgement>", false, DEFAULT_FUEL);
    let ty = {
        let mut ch = Checker::new(sig, &mut st);
        let mut cx = locals_of(ctx);
        ch.infer(&mut cx, k.into(), t)?
    };
    let asg = st.solve()?;
    Ok(ty.zonk(&asg))
}

/// Every entry's type is a type at the entry's level, under the entries
/// before it, and names are distinct.
pub fn check_context(sig: &Signature, ctx: &Context) -> TResult<()> {
    let mut st = ElabState::new("<context>", false, DEFAULT_FUEL);
    {
        let mut ch = Checker::new(sig, &mut st);
        let mut cx = Locals::new();
        for e in ctx.entries() {
            if lookup_local(&cx, &e.name).is_some() {
                return Err(Diagnostic::new(ErrorCode::Mismatch, format!("duplicate context entry `{}`", e.name)));
            }
            ch.check_type(&mut cx, e.level.into(), &e.ty)?;
            cx.push(Local { name: e.name.clone(), level: e.level.into(), ty: e.ty.clone() });
        }
    }
    st.solve().map(|_| ())
}
