//! Call-by-name weak-head reduction (β, δ with displacement, ι for case),
//! full normalization, and algorithmic conversion.

use std::cell::Cell;

use thiserror::Error;

use crate::diagnostic::{Diagnostic, ErrorCode};
use crate::levels::{Constraint, LevelExpr, Provenance};
use crate::signature::{Global, Signature};
use crate::term::{fresh_name, Term, TermKind};

/// Default bound on head reduction steps per query.
pub const DEFAULT_FUEL: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("reduction is stuck: {0}")]
    Stuck(String),
    #[error("ran out of fuel after {0} reduction steps")]
    Fuel(usize),
}

impl From<EvalError> for Diagnostic {
    fn from(e: EvalError) -> Self {
        let code = match e {
            EvalError::Stuck(_) => ErrorCode::Stuck,
            EvalError::Fuel(_) => ErrorCode::Fuel,
        };
        Diagnostic::new(code, e.to_string())
    }
}

type R<T> = Result<T, EvalError>;

/// Receives the level equalities that conversion needs. Supports rollback
/// so a speculative comparison can be undone.
pub trait LevelSink {
    fn emit_eq(&mut self, a: LevelExpr, b: LevelExpr, rule: &'static str);
    fn mark(&self) -> usize;
    fn rollback(&mut self, mark: usize);
}

impl LevelSink for Vec<Constraint> {
    fn emit_eq(&mut self, a: LevelExpr, b: LevelExpr, rule: &'static str) {
        self.push(Constraint::eq(a, b, Provenance::new(rule, None)));
    }
    fn mark(&self) -> usize {
        self.len()
    }
    fn rollback(&mut self, mark: usize) {
        self.truncate(mark);
    }
}

pub struct Evaluator<'s> {
    sig: &'s Signature,
    fuel: usize,
    left: Cell<usize>,
}

/// True for the closed normal forms: type formers, abstractions, saturated
/// constructors, and (partial) applications of datatypes.
pub fn is_value(sig: &Signature, t: &Term) -> bool {
    match t.kind() {
        TermKind::Star
        | TermKind::Bottom
        | TermKind::Pi(..)
        | TermKind::Arrow(..)
        | TermKind::Lam(..)
        | TermKind::CtorApp(..) => true,
        TermKind::Const(..) | TermKind::App(..) => {
            let (h, args) = t.spine();
            match h.kind() {
                TermKind::Const(c, _) => sig.data(c).is_some_and(|d| args.len() <= d.arity()),
                _ => false,
            }
        }
        _ => false,
    }
}

/// Whether a head in weak-head normal form may legitimately be applied.
fn applicable(sig: &Signature, h: &Term) -> bool {
    match h.kind() {
        TermKind::Var(_) | TermKind::App(..) | TermKind::Case(..) | TermKind::Absurd(_) => true,
        TermKind::Const(c, _) => sig.lookup(c).is_some(),
        _ => false,
    }
}

impl<'s> Evaluator<'s> {
    pub fn new(sig: &'s Signature, fuel: usize) -> Self {
        Evaluator { sig, fuel, left: Cell::new(fuel) }
    }

    pub fn signature(&self) -> &'s Signature {
        self.sig
    }

    fn reset(&self) {
        self.left.set(self.fuel);
    }

    fn tick(&self) -> R<()> {
        let n = self.left.get();
        if n == 0 {
            return Err(EvalError::Fuel(self.fuel));
        }
        self.left.set(n - 1);
        Ok(())
    }

    /// Steps taken since the last reset.
    pub fn steps_used(&self) -> usize {
        self.fuel - self.left.get()
    }

    pub fn whnf(&self, t: &Term) -> R<Term> {
        self.reset();
        self.whnf_(t, true)
    }

    /// One call-by-name head step, or `None` if there is no head redex.
    pub fn step(&self, t: &Term) -> R<Option<Term>> {
        self.one_step(t)
    }

    fn one_step(&self, t: &Term) -> R<Option<Term>> {
        match t.kind() {
            TermKind::Ann(a, _) => Ok(Some(a.clone())),
            TermKind::App(f, a) => match f.kind() {
                TermKind::Lam(x, b) => Ok(Some(b.subst(x, a))),
                _ => Ok(self.one_step(f)?.map(|f2| Term::app(f2, a.clone()))),
            },
            TermKind::Const(c, i) => match self.sig.def(c) {
                Some(d) => Ok(d.body.as_ref().and_then(|b| b.displace_by(*i))),
                None => Ok(None),
            },
            TermKind::Case(s, brs) => match s.kind() {
                TermKind::CtorApp(c, _, args) => {
                    let br = brs
                        .iter()
                        .find(|b| b.ctor == *c)
                        .ok_or_else(|| EvalError::Stuck(format!("no branch for constructor `{c}`")))?;
                    let pairs: Vec<_> = br.binders.iter().cloned().zip(args.iter().cloned()).collect();
                    Ok(Some(br.body.subst_all(&pairs)))
                }
                _ => Ok(self.one_step(s)?.map(|s2| Term::case(s2, brs.clone()))),
            },
            TermKind::Absurd(b) => Ok(self.one_step(b)?.map(Term::absurd)),
            _ => Ok(None),
        }
    }

    fn whnf_(&self, t: &Term, delta: bool) -> R<Term> {
        let mut t = t.clone();
        loop {
            match t.kind() {
                TermKind::Ann(a, _) => {
                    let a = a.clone();
                    t = a;
                }
                TermKind::App(..) => {
                    let (head, args) = t.spine();
                    let h = self.whnf_(&head, delta)?;
                    match h.kind() {
                        TermKind::Lam(x, b) => {
                            self.tick()?;
                            t = Term::apps(b.subst(x, &args[0]), args[1..].iter().cloned());
                        }
                        _ if applicable(self.sig, &h) => return Ok(Term::apps(h, args)),
                        _ => {
                            return Err(EvalError::Stuck(format!("`{h}` cannot be applied")));
                        }
                    }
                }
                TermKind::Const(c, i) if delta => match self.sig.def(c).and_then(|d| d.body.as_ref()) {
                    Some(body) => match body.displace_by(*i) {
                        Some(b) => {
                            self.tick()?;
                            t = b;
                        }
                        None => return Ok(t),
                    },
                    None => return Ok(t),
                },
                TermKind::Case(s, brs) => {
                    let s2 = self.whnf_(s, true)?;
                    match s2.kind() {
                        TermKind::CtorApp(c, _, args) => {
                            let br = brs
                                .iter()
                                .find(|b| b.ctor == *c)
                                .ok_or_else(|| EvalError::Stuck(format!("case has no branch for constructor `{c}`")))?;
                            if br.binders.len() != args.len() {
                                return Err(EvalError::Stuck(format!(
                                    "branch `{c}` binds the wrong number of arguments"
                                )));
                            }
                            self.tick()?;
                            let pairs: Vec<_> = br.binders.iter().cloned().zip(args.iter().cloned()).collect();
                            t = br.body.subst_all(&pairs);
                        }
                        _ if is_value(self.sig, &s2) => {
                            return Err(EvalError::Stuck(format!("case on non-constructor value `{s2}`")));
                        }
                        _ => return Ok(Term::case(s2, brs.clone())),
                    }
                }
                TermKind::Absurd(b) => {
                    let b2 = self.whnf_(b, true)?;
                    if is_value(self.sig, &b2) {
                        return Err(EvalError::Stuck(format!("absurd applied to value `{b2}`")));
                    }
                    return Ok(Term::absurd(b2));
                }
                _ => return Ok(t),
            }
        }
    }

    pub fn normalize(&self, t: &Term) -> R<Term> {
        self.reset();
        self.nf(t)
    }

    fn nf(&self, t: &Term) -> R<Term> {
        let w = self.whnf_(t, true)?;
        Ok(match w.kind() {
            TermKind::Pi(j, a, x, b) => Term::pi(*j, self.nf(a)?, x.clone(), self.nf(b)?),
            TermKind::Arrow(a, b) => Term::arrow(self.nf(a)?, self.nf(b)?),
            TermKind::Lam(x, b) => Term::lam(x.clone(), self.nf(b)?),
            TermKind::App(..) => {
                let (h, args) = w.spine();
                let h = match h.kind() {
                    TermKind::Var(_) | TermKind::Const(..) => h.clone(),
                    _ => self.nf(&h)?,
                };
                let args = args.iter().map(|a| self.nf(a)).collect::<R<Vec<_>>>()?;
                Term::apps(h, args)
            }
            TermKind::CtorApp(c, i, args) => {
                Term::ctor(c.clone(), *i, args.iter().map(|a| self.nf(a)).collect::<R<Vec<_>>>()?)
            }
            TermKind::Case(s, brs) => {
                let s = self.nf(s)?;
                let brs = brs
                    .iter()
                    .map(|br| Ok(crate::term::Branch { body: self.nf(&br.body)?, ..br.clone() }))
                    .collect::<R<Vec<_>>>()?;
                Term::case(s, brs)
            }
            TermKind::Absurd(b) => Term::absurd(self.nf(b)?),
            _ => w,
        })
    }

    /// Definitional equality, emitting level equalities for metas that
    /// must agree.
    pub fn equate(&self, a: &Term, b: &Term, sink: &mut dyn LevelSink) -> R<bool> {
        self.reset();
        self.conv(a, b, sink)
    }

    /// `Some` when the head of `t` is a definition that δ can unfold.
    fn unfoldable(&self, t: &Term) -> Option<(crate::term::Name, LevelExpr)> {
        let (h, _) = t.spine();
        match h.kind() {
            TermKind::Const(c, i) => match self.sig.lookup(c) {
                Some(Global::Def(d)) if d.body.is_some() => Some((c.clone(), *i)),
                _ => None,
            },
            _ => None,
        }
    }

    fn unfold(&self, t: &Term) -> R<Term> {
        let (h, args) = t.spine();
        let TermKind::Const(c, i) = h.kind() else { return Ok(t.clone()) };
        let body = self.sig.def(c).and_then(|d| d.body.as_ref()).expect("unfoldable head");
        let Some(body) = body.displace_by(*i) else { return Ok(t.clone()) };
        self.tick()?;
        self.whnf_(&Term::apps(body, args), false)
    }

    fn conv(&self, a: &Term, b: &Term, sink: &mut dyn LevelSink) -> R<bool> {
        if a.ptr_eq(b) || a.alpha_eq(b) {
            return Ok(true);
        }
        let mut a = self.whnf_(a, false)?;
        let mut b = self.whnf_(b, false)?;
        loop {
            match (self.unfoldable(&a), self.unfoldable(&b)) {
                (Some((c1, i1)), Some((c2, i2))) => {
                    if c1 == c2 && i1 == i2 {
                        let (_, xs) = a.spine();
                        let (_, ys) = b.spine();
                        if xs.len() == ys.len() {
                            let m = sink.mark();
                            if self.conv_all(&xs, &ys, sink)? {
                                return Ok(true);
                            }
                            sink.rollback(m);
                        }
                    }
                    let a2 = self.unfold(&a)?;
                    let b2 = self.unfold(&b)?;
                    if a2.ptr_eq(&a) && b2.ptr_eq(&b) {
                        return self.conv_whnf(&a, &b, sink);
                    }
                    a = a2;
                    b = b2;
                }
                (Some(_), None) => {
                    let a2 = self.unfold(&a)?;
                    if a2.ptr_eq(&a) {
                        return self.conv_whnf(&a, &b, sink);
                    }
                    a = a2;
                }
                (None, Some(_)) => {
                    let b2 = self.unfold(&b)?;
                    if b2.ptr_eq(&b) {
                        return self.conv_whnf(&a, &b, sink);
                    }
                    b = b2;
                }
                (None, None) => return self.conv_whnf(&a, &b, sink),
            }
            if a.alpha_eq(&b) {
                return Ok(true);
            }
        }
    }

    fn conv_all(&self, xs: &[Term], ys: &[Term], sink: &mut dyn LevelSink) -> R<bool> {
        for (x, y) in xs.iter().zip(ys) {
            if !self.conv(x, y, sink)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn level_eq(&self, i: LevelExpr, j: LevelExpr, rule: &'static str, sink: &mut dyn LevelSink) -> bool {
        if i == j {
            return true;
        }
        if !i.has_meta() && !j.has_meta() {
            return false;
        }
        sink.emit_eq(i, j, rule);
        true
    }

    fn conv_under(
        &self,
        xs: &[crate::term::Name],
        a: &Term,
        ys: &[crate::term::Name],
        b: &Term,
        sink: &mut dyn LevelSink,
    ) -> R<bool> {
        if xs == ys {
            return self.conv(a, b, sink);
        }
        let fa = a.free_vars();
        let fb = b.free_vars();
        let mut pa = Vec::new();
        let mut pb = Vec::new();
        let mut chosen: Vec<crate::term::Name> = Vec::new();
        for (x, y) in xs.iter().zip(ys) {
            let z = fresh_name(x, |c| fa.contains(c) || fb.contains(c) || chosen.iter().any(|n| &**n == c));
            chosen.push(z.clone());
            pa.push((x.clone(), Term::var(z.clone())));
            pb.push((y.clone(), Term::var(z)));
        }
        self.conv(&a.subst_all(&pa), &b.subst_all(&pb), sink)
    }

    fn conv_whnf(&self, a: &Term, b: &Term, sink: &mut dyn LevelSink) -> R<bool> {
        use TermKind as K;
        Ok(match (a.kind(), b.kind()) {
            (K::Star, K::Star) | (K::Bottom, K::Bottom) => true,
            (K::Pi(j1, a1, x1, b1), K::Pi(j2, a2, x2, b2)) => {
                self.level_eq(*j1, *j2, "DE-Pi", sink)
                    && self.conv(a1, a2, sink)?
                    && self.conv_under(std::slice::from_ref(x1), b1, std::slice::from_ref(x2), b2, sink)?
            }
            (K::Arrow(a1, b1), K::Arrow(a2, b2)) => self.conv(a1, a2, sink)? && self.conv(b1, b2, sink)?,
            (K::Lam(x1, b1), K::Lam(x2, b2)) => {
                self.conv_under(std::slice::from_ref(x1), b1, std::slice::from_ref(x2), b2, sink)?
            }
            (K::Absurd(x), K::Absurd(y)) => self.conv(x, y, sink)?,
            (K::CtorApp(c, i, xs), K::CtorApp(d, j, ys)) => {
                c == d
                    && xs.len() == ys.len()
                    && self.level_eq(*i, *j, "DE-Ctor", sink)
                    && self.conv_all(xs, ys, sink)?
            }
            (K::Case(s1, bs1), K::Case(s2, bs2)) => {
                if !self.conv(s1, s2, sink)? || bs1.len() != bs2.len() {
                    return Ok(false);
                }
                for p in bs1 {
                    let Some(q) = bs2.iter().find(|q| q.ctor == p.ctor) else { return Ok(false) };
                    if p.binders.len() != q.binders.len()
                        || !self.conv_under(&p.binders, &p.body, &q.binders, &q.body, sink)?
                    {
                        return Ok(false);
                    }
                }
                true
            }
            (K::Var(_) | K::Const(..) | K::App(..), K::Var(_) | K::Const(..) | K::App(..)) => {
                let (h1, xs) = a.spine();
                let (h2, ys) = b.spine();
                if xs.len() != ys.len() {
                    return Ok(false);
                }
                let heads = match (h1.kind(), h2.kind()) {
                    (K::Var(x), K::Var(y)) => x == y,
                    (K::Const(c, i), K::Const(d, j)) => c == d && self.level_eq(*i, *j, "DE-Const", sink),
                    (K::Case(..), K::Case(..)) | (K::Absurd(_), K::Absurd(_)) => self.conv_whnf(&h1, &h2, sink)?,
                    _ => false,
                };
                heads && self.conv_all(&xs, &ys, sink)?
            }
            _ => false,
        })
    }
}

/// Weak-head normal form with the default fuel.
pub fn whnf(sig: &Signature, t: &Term) -> Result<Term, EvalError> {
    Evaluator::new(sig, DEFAULT_FUEL).whnf(t)
}

pub fn normalize(sig: &Signature, t: &Term, fuel: usize) -> Result<Term, EvalError> {
    Evaluator::new(sig, fuel).normalize(t)
}

/// Joinability of two terms; running out of fuel counts as "not equal".
pub fn equate(sig: &Signature, a: &Term, b: &Term, sink: &mut dyn LevelSink) -> bool {
    Evaluator::new(sig, DEFAULT_FUEL).equate(a, b, sink).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::LevelExpr as L;
    use crate::signature::{Definition, SigEntry};

    fn def(sig: &mut Signature, n: &str, level: u32, ty: Term, body: Term) {
        sig.push(SigEntry::Def(Definition { name: n.into(), level: L::lit(level), ty, body: Some(body) }));
    }

    fn prelude() -> Signature {
        let mut sig = Signature::new();
        // neg = \X. X -> Void
        def(
            &mut sig,
            "neg",
            0,
            Term::arrow(Term::star(), Term::star()),
            Term::lam("X", Term::arrow(Term::var("X"), Term::bottom())),
        );
        sig
    }

    #[test]
    fn beta_step() {
        let sig = Signature::new();
        let t = Term::app(Term::lam("x", Term::var("x")), Term::star());
        assert_eq!(whnf(&sig, &t).unwrap(), Term::star());
    }

    #[test]
    fn delta_with_displacement_then_beta() {
        let sig = prelude();
        let a = Term::var("A");
        let t = Term::app(Term::cnst("neg", L::lit(1)), a.clone());
        assert_eq!(whnf(&sig, &t).unwrap(), Term::arrow(a, Term::bottom()));
    }

    #[test]
    fn delta_displaces_the_body() {
        let mut sig = Signature::new();
        let pi0 = Term::pi(L::lit(0), Term::star(), "X", Term::var("X"));
        def(&mut sig, "P", 1, Term::star(), pi0.clone());
        assert_eq!(whnf(&sig, &Term::cnst("P", L::lit(2))).unwrap(), pi0.displace(2));
    }

    #[test]
    fn normalize_under_binders() {
        let sig = Signature::new();
        assert_eq!(normalize(&sig, &Term::star(), 10).unwrap(), Term::star());
        let dom = Term::app(Term::lam("X", Term::var("X")), Term::star());
        let t = Term::pi(L::lit(0), dom, "y", Term::var("y"));
        assert_eq!(normalize(&sig, &t, 10).unwrap(), Term::pi(L::lit(0), Term::star(), "y", Term::var("y")));
    }

    #[test]
    fn fuel_runs_out_on_loops() {
        let mut sig = Signature::new();
        def(&mut sig, "loop", 0, Term::star(), Term::cnst("loop", L::lit(0)));
        let e = Evaluator::new(&sig, 50).whnf(&Term::cnst("loop", L::lit(0))).unwrap_err();
        assert_eq!(e, EvalError::Fuel(50));
    }

    #[test]
    fn applying_a_type_is_stuck() {
        let sig = Signature::new();
        let e = whnf(&sig, &Term::app(Term::star(), Term::star())).unwrap_err();
        assert!(matches!(e, EvalError::Stuck(_)));
    }

    #[test]
    fn equate_examples() {
        let sig = Signature::new();
        let mut cs: Vec<Constraint> = Vec::new();
        assert!(equate(&sig, &Term::star(), &Term::star(), &mut cs));
        assert!(!equate(&sig, &Term::star(), &Term::bottom(), &mut cs));
        let beta = Term::app(Term::lam("x", Term::var("x")), Term::bottom());
        assert!(equate(&sig, &beta, &Term::bottom(), &mut cs));
        assert!(cs.is_empty());
    }

    #[test]
    fn pi_levels_must_agree() {
        let sig = Signature::new();
        let mut cs: Vec<Constraint> = Vec::new();
        let p = |j| Term::pi(L::lit(j), Term::star(), "X", Term::var("X"));
        assert!(!equate(&sig, &p(1), &p(2), &mut cs));
        let m = L::meta(crate::levels::MetaId(0));
        let pm = Term::pi(m, Term::star(), "X", Term::var("X"));
        assert!(equate(&sig, &pm, &p(2), &mut cs));
        assert_eq!(cs.len(), 1);
    }

    #[test]
    fn pi_is_not_arrow() {
        let sig = Signature::new();
        let mut cs: Vec<Constraint> = Vec::new();
        let pi = Term::pi(L::lit(0), Term::star(), "x", Term::star());
        let ar = Term::arrow(Term::star(), Term::star());
        assert!(!equate(&sig, &pi, &ar, &mut cs));
    }

    #[test]
    fn constants_unfold_on_mismatch() {
        let sig = prelude();
        let mut cs: Vec<Constraint> = Vec::new();
        let a = Term::app(Term::cnst("neg", L::lit(0)), Term::star());
        let b = Term::arrow(Term::star(), Term::bottom());
        assert!(equate(&sig, &a, &b, &mut cs));
        let c = Term::app(Term::cnst("neg", L::lit(3)), Term::star());
        assert!(equate(&sig, &a, &c, &mut cs));
    }

    #[test]
    fn speculative_constraints_roll_back() {
        let mut sig = Signature::new();
        // K = \A B. A, so K x y == K x z even though y != z.
        def(&mut sig, "K", 0, Term::star(), Term::lam("A", Term::lam("B", Term::var("A"))));
        let m = L::meta(crate::levels::MetaId(0));
        let k = |b: Term| Term::apps(Term::cnst("K", L::lit(0)), [Term::star(), b]);
        let mut cs: Vec<Constraint> = Vec::new();
        let y = Term::pi(m, Term::star(), "x", Term::bottom());
        assert!(equate(&sig, &k(y), &k(Term::bottom()), &mut cs));
        assert!(cs.is_empty());
    }

    #[test]
    fn idid_applied_reduces_to_identity() {
        let mut sig = Signature::new();
        let idty = |j: u32| Term::pi(L::lit(j), Term::star(), "X", Term::arrow(Term::var("X"), Term::var("X")));
        // idid1 = \id. id ((X :^0 Type) -> X -> X) (\X. id X)
        let body = Term::lam(
            "id",
            Term::apps(Term::var("id"), [idty(0), Term::lam("X", Term::app(Term::var("id"), Term::var("X")))]),
        );
        def(&mut sig, "idid1", 2, Term::arrow(idty(1), idty(0)), body);
        let idlam = Term::lam("X", Term::lam("x", Term::var("x")));
        let t = Term::app(Term::cnst("idid1", L::lit(0)), idlam.clone());
        assert_eq!(normalize(&sig, &t, 1000).unwrap(), idlam);
        assert!(matches!(whnf(&sig, &t).unwrap().kind(), TermKind::Lam(..)));
    }
}
