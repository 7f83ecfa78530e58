//! Core terms and the structural operations on them: displacement,
//! capture-avoiding substitution and α-equivalence.
//!
//! Binders are named. Substitution renames a binder whenever it would capture
//! a free variable of the substituted term, and `PartialEq` on [`Term`] is
//! α-equivalence, so no operation can observe binder names.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::levels::{Assignment, LevelExpr};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone)]
pub struct Term(Arc<TermKind>);

#[derive(Clone, Debug)]
pub enum TermKind {
    Star,
    Var(Name),
    Const(Name, LevelExpr),
    Pi(LevelExpr, Term, Name, Term),
    Arrow(Term, Term),
    Lam(Name, Term),
    App(Term, Term),
    Bottom,
    Absurd(Term),
    Ann(Term, Term),
    CtorApp(Name, LevelExpr, Vec<Term>),
    Case(Term, Vec<Branch>),
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub ctor: Name,
    pub binders: Vec<Name>,
    pub body: Term,
}

impl Deref for Term {
    type Target = TermKind;
    fn deref(&self) -> &TermKind {
        &self.0
    }
}

impl From<TermKind> for Term {
    fn from(k: TermKind) -> Self {
        Term(Arc::new(k))
    }
}

impl Term {
    pub fn star() -> Term {
        TermKind::Star.into()
    }
    pub fn bottom() -> Term {
        TermKind::Bottom.into()
    }
    pub fn var(x: impl Into<Name>) -> Term {
        TermKind::Var(x.into()).into()
    }
    pub fn cnst(c: impl Into<Name>, i: impl Into<LevelExpr>) -> Term {
        TermKind::Const(c.into(), i.into()).into()
    }
    pub fn pi(j: impl Into<LevelExpr>, dom: Term, x: impl Into<Name>, cod: Term) -> Term {
        TermKind::Pi(j.into(), dom, x.into(), cod).into()
    }
    pub fn arrow(dom: Term, cod: Term) -> Term {
        TermKind::Arrow(dom, cod).into()
    }
    pub fn lam(x: impl Into<Name>, body: Term) -> Term {
        TermKind::Lam(x.into(), body).into()
    }
    pub fn app(f: Term, a: Term) -> Term {
        TermKind::App(f, a).into()
    }
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }
    pub fn absurd(t: Term) -> Term {
        TermKind::Absurd(t).into()
    }
    pub fn ann(t: Term, ty: Term) -> Term {
        TermKind::Ann(t, ty).into()
    }
    pub fn ctor(c: impl Into<Name>, i: impl Into<LevelExpr>, args: Vec<Term>) -> Term {
        TermKind::CtorApp(c.into(), i.into(), args).into()
    }
    pub fn case(scrut: Term, branches: Vec<Branch>) -> Term {
        TermKind::Case(scrut, branches).into()
    }

    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    /// Identity of this node, used to key side tables such as source spans.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut t = self.clone();
        while let TermKind::App(f, a) = t.kind() {
            args.push(a.clone());
            let f = f.clone();
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order walk over every subterm.
    pub fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self.kind() {
            TermKind::Star | TermKind::Bottom | TermKind::Var(_) | TermKind::Const(..) => {}
            TermKind::Pi(_, a, _, b) | TermKind::Arrow(a, b) | TermKind::App(a, b) | TermKind::Ann(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            TermKind::Lam(_, b) | TermKind::Absurd(b) => b.visit(f),
            TermKind::CtorApp(_, _, args) => args.iter().for_each(|a| a.visit(f)),
            TermKind::Case(s, brs) => {
                s.visit(f);
                brs.iter().for_each(|br| br.body.visit(f));
            }
        }
    }

    /// Every level expression in the term, in pre-order.
    pub fn levels(&self) -> Vec<LevelExpr> {
        let mut out = Vec::new();
        self.visit(&mut |t| match t.kind() {
            TermKind::Pi(j, ..) => out.push(*j),
            TermKind::Const(_, i) | TermKind::CtorApp(_, i, _) => out.push(*i),
            _ => {}
        });
        out
    }

    pub fn has_metas(&self) -> bool {
        self.levels().iter().any(|l| l.has_meta())
    }

    /// Rebuild the term with every level expression passed through `f`.
    pub fn map_levels(&self, f: &mut impl FnMut(LevelExpr) -> LevelExpr) -> Term {
        match self.kind() {
            TermKind::Star | TermKind::Bottom | TermKind::Var(_) => self.clone(),
            TermKind::Const(c, i) => Term::cnst(c.clone(), f(*i)),
            TermKind::Pi(j, a, x, b) => {
                let j = f(*j);
                Term::pi(j, a.map_levels(f), x.clone(), b.map_levels(f))
            }
            TermKind::Arrow(a, b) => Term::arrow(a.map_levels(f), b.map_levels(f)),
            TermKind::Lam(x, b) => Term::lam(x.clone(), b.map_levels(f)),
            TermKind::App(a, b) => Term::app(a.map_levels(f), b.map_levels(f)),
            TermKind::Absurd(b) => Term::absurd(b.map_levels(f)),
            TermKind::Ann(a, b) => Term::ann(a.map_levels(f), b.map_levels(f)),
            TermKind::CtorApp(c, i, args) => {
                let i = f(*i);
                Term::ctor(c.clone(), i, args.iter().map(|a| a.map_levels(f)).collect())
            }
            TermKind::Case(s, brs) => Term::case(
                s.map_levels(f),
                brs.iter()
                    .map(|br| Branch {
                        ctor: br.ctor.clone(),
                        binders: br.binders.clone(),
                        body: br.body.map_levels(f),
                    })
                    .collect(),
            ),
        }
    }

    /// Raise every level annotation and displacement by `i`.
    pub fn displace(&self, i: u32) -> Term {
        if i == 0 {
            return self.clone();
        }
        self.map_levels(&mut |l| l.shift(i))
    }

    /// Displace by a level expression. `None` if that would add two metas.
    pub fn displace_by(&self, by: LevelExpr) -> Option<Term> {
        if let Some(c) = by.as_concrete() {
            return Some(self.displace(c.0));
        }
        let mut ok = true;
        let t = self.map_levels(&mut |l| match l.plus(by) {
            Some(e) => e,
            None => {
                ok = false;
                l
            }
        });
        ok.then_some(t)
    }

    pub fn zonk(&self, asg: &Assignment) -> Term {
        self.map_levels(&mut |l| l.zonk(asg))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_fv(self, &mut bound, &mut out);
        out
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        occurs(self, x)
    }

    /// Capture-avoiding substitution of `s` for the free occurrences of `x`.
    pub fn subst(&self, x: &str, s: &Term) -> Term {
        self.subst_all(&[(name(x), s.clone())])
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn subst_all(&self, pairs: &[(Name, Term)]) -> Term {
        let env: HashMap<Name, Term> =
            pairs.iter().filter(|(x, t)| !matches!(t.kind(), TermKind::Var(y) if y == x)).cloned().collect();
        if env.is_empty() {
            return self.clone();
        }
        let mut avoid = BTreeSet::new();
        for t in env.values() {
            avoid.extend(t.free_vars());
        }
        subst_env(self, &env, &avoid)
    }

    /// α-equivalence. Ascriptions are compared structurally, not erased.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        aeq(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.ptr_eq(other) || self.alpha_eq(other)
    }
}

impl Eq for Term {}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::surface::print_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::surface::print_term(self))
    }
}

/// A name based on `base` for which `taken` is false.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if !taken(base) {
        return name(base);
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1u64..).map(|n| format!("{stem}{n}")).find(|cand| !taken(cand)).map(|s| name(&s)).expect("unbounded name supply")
}

fn collect_fv(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t.kind() {
        TermKind::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        TermKind::Star | TermKind::Bottom | TermKind::Const(..) => {}
        TermKind::Pi(_, a, x, b) => {
            collect_fv(a, bound, out);
            bound.push(x.clone());
            collect_fv(b, bound, out);
            bound.pop();
        }
        TermKind::Lam(x, b) => {
            bound.push(x.clone());
            collect_fv(b, bound, out);
            bound.pop();
        }
        TermKind::Arrow(a, b) | TermKind::App(a, b) | TermKind::Ann(a, b) => {
            collect_fv(a, bound, out);
            collect_fv(b, bound, out);
        }
        TermKind::Absurd(b) => collect_fv(b, bound, out),
        TermKind::CtorApp(_, _, args) => args.iter().for_each(|a| collect_fv(a, bound, out)),
        TermKind::Case(s, brs) => {
            collect_fv(s, bound, out);
            for br in brs {
                let n = bound.len();
                bound.extend(br.binders.iter().cloned());
                collect_fv(&br.body, bound, out);
                bound.truncate(n);
            }
        }
    }
}

fn occurs(t: &Term, x: &str) -> bool {
    match t.kind() {
        TermKind::Var(y) => &**y == x,
        TermKind::Star | TermKind::Bottom | TermKind::Const(..) => false,
        TermKind::Pi(_, a, y, b) => occurs(a, x) || (&**y != x && occurs(b, x)),
        TermKind::Lam(y, b) => &**y != x && occurs(b, x),
        TermKind::Arrow(a, b) | TermKind::App(a, b) | TermKind::Ann(a, b) => occurs(a, x) || occurs(b, x),
        TermKind::Absurd(b) => occurs(b, x),
        TermKind::CtorApp(_, _, args) => args.iter().any(|a| occurs(a, x)),
        TermKind::Case(s, brs) => {
            occurs(s, x) || brs.iter().any(|br| !br.binders.iter().any(|b| &**b == x) && occurs(&br.body, x))
        }
    }
}

/// Go under `binders`: drop shadowed keys, and rename any binder that would
/// capture a free variable of the substituted terms.
fn enter(
    binders: &[Name],
    body_fv: impl Fn() -> BTreeSet<Name>,
    env: &HashMap<Name, Term>,
    avoid: &BTreeSet<Name>,
) -> (Vec<Name>, HashMap<Name, Term>, BTreeSet<Name>) {
    let mut env = env.clone();
    for b in binders {
        env.remove(b);
    }
    if env.is_empty() {
        return (binders.to_vec(), env, avoid.clone());
    }
    let mut avoid = avoid.clone();
    let mut out = Vec::with_capacity(binders.len());
    let mut fv: Option<BTreeSet<Name>> = None;
    for b in binders {
        if avoid.contains(b) {
            let fv = fv.get_or_insert_with(&body_fv);
            let fresh = fresh_name(b, |c| avoid.contains(c) || fv.contains(c) || binders.iter().any(|o| &**o == c));
            env.insert(b.clone(), Term::var(fresh.clone()));
            avoid.insert(fresh.clone());
            out.push(fresh);
        } else {
            out.push(b.clone());
        }
    }
    (out, env, avoid)
}

fn subst_env(t: &Term, env: &HashMap<Name, Term>, avoid: &BTreeSet<Name>) -> Term {
    if env.is_empty() {
        return t.clone();
    }
    match t.kind() {
        TermKind::Var(x) => env.get(x).cloned().unwrap_or_else(|| t.clone()),
        TermKind::Star | TermKind::Bottom | TermKind::Const(..) => t.clone(),
        TermKind::Pi(j, a, x, b) => {
            let a2 = subst_env(a, env, avoid);
            let (xs, env2, avoid2) = enter(std::slice::from_ref(x), || b.free_vars(), env, avoid);
            Term::pi(*j, a2, xs[0].clone(), subst_env(b, &env2, &avoid2))
        }
        TermKind::Lam(x, b) => {
            let (xs, env2, avoid2) = enter(std::slice::from_ref(x), || b.free_vars(), env, avoid);
            Term::lam(xs[0].clone(), subst_env(b, &env2, &avoid2))
        }
        TermKind::Arrow(a, b) => Term::arrow(subst_env(a, env, avoid), subst_env(b, env, avoid)),
        TermKind::App(a, b) => Term::app(subst_env(a, env, avoid), subst_env(b, env, avoid)),
        TermKind::Ann(a, b) => Term::ann(subst_env(a, env, avoid), subst_env(b, env, avoid)),
        TermKind::Absurd(b) => Term::absurd(subst_env(b, env, avoid)),
        TermKind::CtorApp(c, i, args) => {
            Term::ctor(c.clone(), *i, args.iter().map(|a| subst_env(a, env, avoid)).collect())
        }
        TermKind::Case(s, brs) => Term::case(
            subst_env(s, env, avoid),
            brs.iter()
                .map(|br| {
                    let (xs, env2, avoid2) = enter(&br.binders, || br.body.free_vars(), env, avoid);
                    Branch { ctor: br.ctor.clone(), binders: xs, body: subst_env(&br.body, &env2, &avoid2) }
                })
                .collect(),
        ),
    }
}

fn aeq(a: &Term, b: &Term, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    if a.ptr_eq(b) && ea == eb {
        return true;
    }
    match (a.kind(), b.kind()) {
        (TermKind::Star, TermKind::Star) | (TermKind::Bottom, TermKind::Bottom) => true,
        (TermKind::Var(x), TermKind::Var(y)) => {
            match (ea.iter().rposition(|n| n == x), eb.iter().rposition(|n| n == y)) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (TermKind::Const(c, i), TermKind::Const(d, j)) => c == d && i == j,
        (TermKind::Pi(j1, a1, x1, b1), TermKind::Pi(j2, a2, x2, b2)) => {
            j1 == j2 && aeq(a1, a2, ea, eb) && under(std::slice::from_ref(x1), std::slice::from_ref(x2), b1, b2, ea, eb)
        }
        (TermKind::Lam(x1, b1), TermKind::Lam(x2, b2)) => {
            under(std::slice::from_ref(x1), std::slice::from_ref(x2), b1, b2, ea, eb)
        }
        (TermKind::Arrow(a1, b1), TermKind::Arrow(a2, b2))
        | (TermKind::App(a1, b1), TermKind::App(a2, b2))
        | (TermKind::Ann(a1, b1), TermKind::Ann(a2, b2)) => aeq(a1, a2, ea, eb) && aeq(b1, b2, ea, eb),
        (TermKind::Absurd(x), TermKind::Absurd(y)) => aeq(x, y, ea, eb),
        (TermKind::CtorApp(c, i, xs), TermKind::CtorApp(d, j, ys)) => {
            c == d && i == j && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| aeq(x, y, ea, eb))
        }
        (TermKind::Case(s1, bs1), TermKind::Case(s2, bs2)) => {
            aeq(s1, s2, ea, eb)
                && bs1.len() == bs2.len()
                && bs1.iter().zip(bs2).all(|(p, q)| {
                    p.ctor == q.ctor
                        && p.binders.len() == q.binders.len()
                        && under(&p.binders, &q.binders, &p.body, &q.body, ea, eb)
                })
        }
        _ => false,
    }
}

fn under(xs: &[Name], ys: &[Name], a: &Term, b: &Term, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    let (na, nb) = (ea.len(), eb.len());
    ea.extend(xs.iter().cloned());
    eb.extend(ys.iter().cloned());
    let r = aeq(a, b, ea, eb);
    ea.truncate(na);
    eb.truncate(nb);
    r
}
