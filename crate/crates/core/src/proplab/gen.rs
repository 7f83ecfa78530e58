//! Random well-typed judgements `Γ ⊢ t :^k A`.
//!
//! Terms are built bottom-up, each choice mirroring one typing rule, so the
//! result is well-typed by construction; the typer is only used afterwards
//! to confirm it. Check-only forms in function position are wrapped in an
//! ascription.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::{Context, Entry};
use crate::eval::Evaluator;
use crate::levels::{Level, LevelExpr};
use crate::program::{check_source, CheckOptions};
use crate::signature::Signature;
use crate::term::{fresh_name, Branch, Name, Term, TermKind};

pub const PRELUDE: &str = "\
id :^1 (X :^0 Type) -> X -> X
id = \\X x. x

neg :^0 Type -> Type
neg = \\X. X -> Void

data Bool :^0 Type where {
  True :^0 Bool;
  False :^0 Bool
}

data Box (X :^0 Type) :^1 Type where {
  MkBox :^1 X -> Box X
}
";

/// The signature generated terms may refer to.
pub fn prelude() -> Signature {
    let mut sig = Signature::new();
    let r = check_source(&mut sig, PRELUDE, &CheckOptions::file("<prelude>"));
    assert!(r.ok(), "prelude must check: {:?}", r.diagnostics);
    sig
}

/// Rule names counted by [`Coverage`].
pub const RULES: &[&str] = &[
    "Type",
    "Void",
    "Var",
    "Const",
    "Pi",
    "Arrow",
    "Lam-Pi",
    "Lam-Arrow",
    "App-Pi",
    "App-Arrow",
    "Absurd",
    "Ann",
    "Data",
    "Ctor",
    "Case",
];

#[derive(Clone, Debug, Default)]
pub struct Coverage(pub BTreeMap<&'static str, usize>);

impl Coverage {
    fn hit(&mut self, rule: &'static str) {
        *self.0.entry(rule).or_default() += 1;
    }

    pub fn get(&self, rule: &str) -> usize {
        self.0.get(rule).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &Coverage) {
        for (r, n) in &other.0 {
            *self.0.entry(r).or_default() += n;
        }
    }

    pub fn missing(&self) -> Vec<&'static str> {
        RULES.iter().copied().filter(|r| self.get(r) == 0).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Judgement {
    pub ctx: Context,
    pub term: Term,
    pub level: Level,
    pub ty: Term,
}

impl Judgement {
    pub fn trivial() -> Self {
        Judgement { ctx: Context::new(), term: Term::star(), level: Level(0), ty: Term::star() }
    }
}

impl std::fmt::Display for Judgement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} |- {} :^{} {}", self.ctx, self.term, self.level, self.ty)
    }
}

pub struct Gen<'s> {
    rng: ChaCha8Rng,
    sig: &'s Signature,
    ev: Evaluator<'s>,
    pub coverage: Coverage,
}

/// Generator contexts carry levels as plain numbers.
type Cx = Vec<Entry>;

fn extend(cx: &Cx, name: Name, level: u32, ty: Term) -> Cx {
    let mut c = cx.clone();
    c.push(Entry { name, level: Level(level), ty });
    c
}

fn fresh(cx: &Cx, base: &str) -> Name {
    fresh_name(base, |c| cx.iter().any(|e| &*e.name == c))
}

fn lvl(n: u32) -> LevelExpr {
    LevelExpr::lit(n)
}

/// Whether `t` can only be checked, never inferred.
pub fn check_only(sig: &Signature, t: &Term) -> bool {
    match t.kind() {
        TermKind::Lam(..) | TermKind::Absurd(_) | TermKind::Case(..) => true,
        TermKind::CtorApp(c, ..) => sig.lookup(c).is_some_and(|g| match g {
            crate::signature::Global::Ctor(d, _) => !d.params.is_empty(),
            _ => false,
        }),
        _ => false,
    }
}

/// `t`, ascribed with `ty` if it could not otherwise be inferred. Arguments
/// are annotated this way so that reduction and substitution never leave an
/// unannotated abstraction in head position.
pub fn annotate(sig: &Signature, t: Term, ty: &Term) -> Term {
    if check_only(sig, &t) {
        Term::ann(t, ty.clone())
    } else {
        t
    }
}

impl<'s> Gen<'s> {
    pub fn new(sig: &'s Signature, seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), sig, ev: Evaluator::new(sig, 1000), coverage: Coverage::default() }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A random judgement. `fuel` bounds the depth; zero gives `⊢ Type :^0 Type`.
    pub fn judgement(&mut self, fuel: u32) -> Judgement {
        self.judgement_in(fuel, true)
    }

    /// A judgement with an empty context.
    pub fn closed(&mut self, fuel: u32) -> Judgement {
        self.judgement_in(fuel, false)
    }

    fn judgement_in(&mut self, fuel: u32, open: bool) -> Judgement {
        if fuel == 0 {
            self.coverage.hit("Type");
            return Judgement::trivial();
        }
        let cx = if open { self.context(fuel) } else { Cx::new() };
        let k = self.rng.gen_range(0..=3);
        let (term, ty) = self.term(&cx, k, fuel);
        Judgement { ctx: Context::from_entries(cx), term, level: Level(k), ty }
    }

    pub fn context(&mut self, fuel: u32) -> Cx {
        let n = self.rng.gen_range(0..=3);
        let mut cx = Cx::new();
        for _ in 0..n {
            let j = self.rng.gen_range(0..=2);
            let ty = match self.rng.gen_range(0..5) {
                0 | 1 => Term::star(),
                2 => Term::bottom(),
                _ => self.ty(&cx, j, fuel.min(2)),
            };
            let x = fresh(&cx, "a");
            cx.push(Entry { name: x, level: Level(j), ty });
        }
        cx
    }

    /// A type: `Γ ⊢ A :^k Type`.
    pub fn ty(&mut self, cx: &Cx, k: u32, fuel: u32) -> Term {
        let type_vars: Vec<Name> = cx
            .iter()
            .filter(|e| e.level.0 <= k && matches!(e.ty.kind(), TermKind::Star))
            .map(|e| e.name.clone())
            .collect();
        let choice = if fuel == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..9) };
        match choice {
            0 => {
                self.coverage.hit("Type");
                Term::star()
            }
            1 => {
                self.coverage.hit("Void");
                Term::bottom()
            }
            2 => match type_vars.choose(&mut self.rng) {
                Some(x) => {
                    self.coverage.hit("Var");
                    Term::var(x.clone())
                }
                None => {
                    self.coverage.hit("Data");
                    Term::cnst("Bool", LevelExpr::ZERO)
                }
            },
            3 | 4 => {
                self.coverage.hit("Arrow");
                Term::arrow(self.ty(cx, k, fuel - 1), self.ty(cx, k, fuel - 1))
            }
            5 if k >= 1 => {
                self.coverage.hit("Pi");
                let j = self.rng.gen_range(0..k);
                let a = self.ty(cx, j, fuel - 1);
                let x = fresh(cx, "x");
                let b = self.ty(&extend(cx, x.clone(), j, a.clone()), k, fuel - 1);
                Term::pi(lvl(j), a, x, b)
            }
            6 => {
                // neg^i A, with neg at level 0.
                self.coverage.hit("Const");
                let i = self.rng.gen_range(0..=k);
                Term::app(Term::cnst("neg", lvl(i)), self.ty(cx, k, fuel - 1))
            }
            7 if k >= 1 => {
                // Box^i A with the fixed parameter at level i.
                self.coverage.hit("Data");
                let i = self.rng.gen_range(0..k);
                Term::app(Term::cnst("Box", lvl(i)), self.ty(cx, i, fuel - 1))
            }
            8 if k >= 1 => {
                // id^i Type A reduces to A.
                self.coverage.hit("App-Pi");
                let i = self.rng.gen_range(0..k);
                Term::apps(Term::cnst("id", lvl(i)), [Term::star(), self.ty(cx, k, fuel - 1)])
            }
            _ => {
                self.coverage.hit("Data");
                Term::cnst("Bool", LevelExpr::ZERO)
            }
        }
    }

    /// Some term of type `ty` at level `k`, if one is easy to build.
    pub fn inhabit(&mut self, cx: &Cx, k: u32, ty: &Term, fuel: u32) -> Option<Term> {
        if let Some(v) = cx.iter().rev().find(|e| e.level.0 <= k && matches!(e.ty.kind(), TermKind::Bottom)) {
            if self.rng.gen_bool(0.3) {
                self.coverage.hit("Absurd");
                return Some(Term::absurd(Term::var(v.name.clone())));
            }
        }
        if let Some(v) = cx.iter().rev().find(|e| e.level.0 <= k && e.ty.alpha_eq(ty)) {
            if self.rng.gen_bool(0.5) {
                self.coverage.hit("Var");
                return Some(Term::var(v.name.clone()));
            }
        }
        let w = self.ev.whnf(ty).ok()?;
        match w.kind() {
            TermKind::Star => Some(self.ty(cx, k, fuel)),
            TermKind::Pi(j, a, y, b) => {
                let j = j.as_concrete()?.0;
                let x = fresh(cx, "x");
                let b = b.subst(y, &Term::var(x.clone()));
                let body = self.inhabit(&extend(cx, x.clone(), j, a.clone()), k, &b, fuel.saturating_sub(1))?;
                self.coverage.hit("Lam-Pi");
                Some(Term::lam(x, body))
            }
            TermKind::Arrow(a, b) => {
                let x = fresh(cx, "x");
                let body = self.inhabit(&extend(cx, x.clone(), k, a.clone()), k, b, fuel.saturating_sub(1))?;
                self.coverage.hit("Lam-Arrow");
                Some(Term::lam(x, body))
            }
            _ => {
                let (h, args) = w.spine();
                match h.kind() {
                    TermKind::Const(c, i) if &**c == "Bool" => {
                        self.coverage.hit("Ctor");
                        let ctor = if self.rng.gen_bool(0.5) { "True" } else { "False" };
                        Some(Term::ctor(ctor, *i, vec![]))
                    }
                    TermKind::Const(c, i) if &**c == "Box" && args.len() == 1 => {
                        let a = self.inhabit(cx, k, &args[0], fuel.saturating_sub(1))?;
                        self.coverage.hit("Ctor");
                        Some(Term::ctor("MkBox", *i, vec![a]))
                    }
                    _ => {
                        cx.iter().rev().find(|e| e.level.0 <= k && e.ty.alpha_eq(ty)).map(|e| Term::var(e.name.clone()))
                    }
                }
            }
        }
    }

    /// A term and its type: `Γ ⊢ t :^k A`.
    pub fn term(&mut self, cx: &Cx, k: u32, fuel: u32) -> (Term, Term) {
        if fuel == 0 {
            return match cx.iter().filter(|e| e.level.0 <= k).collect::<Vec<_>>().choose(&mut self.rng) {
                Some(e) if self.rng.gen_bool(0.5) => {
                    self.coverage.hit("Var");
                    (Term::var(e.name.clone()), e.ty.clone())
                }
                _ => (self.ty(cx, k, 0), Term::star()),
            };
        }
        let f = fuel - 1;
        match self.rng.gen_range(0..12) {
            0 => (self.ty(cx, k, fuel), Term::star()),
            1 => match cx.iter().filter(|e| e.level.0 <= k).collect::<Vec<_>>().choose(&mut self.rng) {
                Some(e) => {
                    self.coverage.hit("Var");
                    (Term::var(e.name.clone()), e.ty.clone())
                }
                None => self.term(cx, k, f),
            },
            2 => {
                // A constant at a displacement that fits below k.
                let (c, at) = if k >= 1 && self.rng.gen_bool(0.5) { ("id", 1) } else { ("neg", 0) };
                let i = self.rng.gen_range(0..=k - at);
                let ty = self.sig.def(c).expect("prelude").ty.displace(i);
                self.coverage.hit("Const");
                (Term::cnst(c, lvl(i)), ty)
            }
            3 if k >= 1 => {
                let j = self.rng.gen_range(0..k);
                let a = self.ty(cx, j, f);
                let x = fresh(cx, "x");
                let (b, bt) = self.term(&extend(cx, x.clone(), j, a.clone()), k, f);
                self.coverage.hit("Lam-Pi");
                (Term::lam(x.clone(), b), Term::pi(lvl(j), a, x, bt))
            }
            4 => {
                let a = self.ty(cx, k, f);
                let x = fresh(cx, "x");
                let (b, bt) = self.term(&extend(cx, x.clone(), k, a.clone()), k, f);
                if bt.occurs_free(&x) {
                    return (Term::ann(a, Term::star()), Term::star());
                }
                self.coverage.hit("Lam-Arrow");
                (Term::lam(x, b), Term::arrow(a, bt))
            }
            5 if k >= 1 => {
                // (λx. b : Πx:^j A. B) a
                let j = self.rng.gen_range(0..k);
                let (a, at) = self.term(cx, j, f);
                let a = annotate(self.sig, a, &at);
                let x = fresh(cx, "x");
                let (b, bt) = self.term(&extend(cx, x.clone(), j, at.clone()), k, f);
                self.coverage.hit("App-Pi");
                self.coverage.hit("Ann");
                let fun = Term::ann(Term::lam(x.clone(), b), Term::pi(lvl(j), at, x.clone(), bt.clone()));
                (Term::app(fun, a.clone()), bt.subst(&x, &a))
            }
            6 => {
                // (λx. b : A -> B) a
                let (a, at) = self.term(cx, k, f);
                let a = annotate(self.sig, a, &at);
                let x = fresh(cx, "x");
                let (b, bt) = self.term(&extend(cx, x.clone(), k, at.clone()), k, f);
                if bt.occurs_free(&x) {
                    return (a, at);
                }
                self.coverage.hit("App-Arrow");
                self.coverage.hit("Ann");
                (Term::app(Term::ann(Term::lam(x, b), Term::arrow(at, bt.clone())), a), bt)
            }
            7 if k >= 1 => {
                // id^i X x, or id^i X when no x comes to hand.
                let i = self.rng.gen_range(0..k);
                let x_ty = self.ty(cx, i, f);
                self.coverage.hit("Const");
                self.coverage.hit("App-Pi");
                let head = Term::app(Term::cnst("id", lvl(i)), x_ty.clone());
                match self.inhabit(cx, k, &x_ty, f) {
                    Some(x) => {
                        self.coverage.hit("App-Arrow");
                        (Term::app(head, annotate(self.sig, x, &x_ty)), x_ty)
                    }
                    None => (head, Term::arrow(x_ty.clone(), x_ty)),
                }
            }
            8 => {
                // Apply a function variable.
                let funs: Vec<Entry> = cx
                    .iter()
                    .filter(|e| e.level.0 <= k && matches!(e.ty.kind(), TermKind::Pi(..) | TermKind::Arrow(..)))
                    .cloned()
                    .collect();
                let Some(e) = funs.choose(&mut self.rng).cloned() else {
                    return self.term(cx, k, f);
                };
                match e.ty.kind() {
                    TermKind::Pi(j, a, y, b) => {
                        let j = j.as_concrete().expect("generated levels are concrete").0;
                        match self.inhabit(cx, j, a, f) {
                            Some(arg) => {
                                let arg = annotate(self.sig, arg, a);
                                self.coverage.hit("App-Pi");
                                (Term::app(Term::var(e.name.clone()), arg.clone()), b.subst(y, &arg))
                            }
                            None => (Term::var(e.name.clone()), e.ty.clone()),
                        }
                    }
                    TermKind::Arrow(a, b) => match self.inhabit(cx, k, a, f) {
                        Some(arg) => {
                            let arg = annotate(self.sig, arg, a);
                            self.coverage.hit("App-Arrow");
                            (Term::app(Term::var(e.name.clone()), arg), b.clone())
                        }
                        None => (Term::var(e.name.clone()), e.ty.clone()),
                    },
                    _ => unreachable!(),
                }
            }
            9 => {
                let (t, ty) = self.term(cx, k, f);
                self.coverage.hit("Ann");
                (Term::ann(t, ty.clone()), ty)
            }
            10 => {
                // case on a boolean; both branches share the first's type.
                let bools: Vec<Name> = cx
                    .iter()
                    .filter(|e| e.level.0 <= k && matches!(e.ty.kind(), TermKind::Const(c, _) if &**c == "Bool"))
                    .map(|e| e.name.clone())
                    .collect();
                let scrut = match bools.choose(&mut self.rng) {
                    Some(b) => Term::var(b.clone()),
                    None => {
                        self.coverage.hit("Ctor");
                        Term::ctor(if self.rng.gen_bool(0.5) { "True" } else { "False" }, LevelExpr::ZERO, vec![])
                    }
                };
                let (t1, ty) = self.term(cx, k, f);
                let t2 = self.inhabit(cx, k, &ty, f).unwrap_or_else(|| t1.clone());
                self.coverage.hit("Case");
                let br = |c: &str, t: Term| Branch { ctor: c.into(), binders: vec![], body: t };
                (Term::case(scrut, vec![br("True", t1), br("False", t2)]), ty)
            }
            11 => match cx.iter().rev().find(|e| e.level.0 <= k && matches!(e.ty.kind(), TermKind::Bottom)) {
                Some(v) => {
                    let ty = self.ty(cx, k, f);
                    self.coverage.hit("Absurd");
                    (Term::absurd(Term::var(v.name.clone())), ty)
                }
                None => {
                    let ty = self.ty(cx, k, f);
                    match self.inhabit(cx, k, &ty, f) {
                        Some(t) => (t, ty),
                        None => (ty, Term::star()),
                    }
                }
            },
            _ => (self.ty(cx, k, fuel), Term::star()),
        }
    }
}

/// The judgement for `(seed, fuel)` over the standard prelude.
pub fn gen_well_typed(seed: u64, fuel: u32) -> Judgement {
    let sig = prelude();
    Gen::new(&sig, seed).judgement(fuel)
}
