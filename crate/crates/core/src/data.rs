//! Datatypes in terms: type formers, constructors and case analysis.
//!
//! A datatype `T` declared at level `L` is used at displacement `i` like a
//! constant: `L + i <= k`. Fixed parameters and constructor arguments keep
//! their own (displaced) level; floating ones take the level of the use
//! site. Case analysis refines indices by first-order unification and, when
//! the scrutinee is a variable, replaces it by the constructor pattern.

use std::collections::BTreeSet;

use crate::diagnostic::ErrorCode;
use crate::levels::LevelExpr;
use crate::signature::{CtorDecl, DataDecl, Global, ParamKind};
use crate::term::{Branch, Name, Term, TermKind};
use crate::typer::{Checker, Local, Locals, TResult};

/// Result of unifying constructor indices with the scrutinee's.
#[derive(Debug)]
pub enum Unified {
    /// A most general substitution, values already fully substituted.
    Solved(Vec<(Name, Term)>),
    /// The constructor cannot produce a value of the scrutinee's type.
    Refuted,
}

fn rigid_head(sig: &crate::signature::Signature, t: &Term) -> Option<String> {
    match t.kind() {
        TermKind::CtorApp(c, ..) => Some(format!("ctor {c}")),
        TermKind::Star => Some("Type".into()),
        TermKind::Bottom => Some("Void".into()),
        TermKind::Pi(..) | TermKind::Arrow(..) => Some("function type".into()),
        _ => match t.spine().0.kind() {
            TermKind::Const(c, _) if sig.data(c).is_some() => Some(format!("data {c}")),
            _ => None,
        },
    }
}

fn bind(theta: &mut Vec<(Name, Term)>, v: &Name, t: Term) {
    for (_, val) in theta.iter_mut() {
        *val = val.subst(v, &t);
    }
    theta.push((v.clone(), t));
}

impl<'a> Checker<'a> {
    fn level_of(&self, kind: ParamKind, i: LevelExpr, floating: LevelExpr) -> TResult<LevelExpr> {
        match kind {
            ParamKind::Fixed(j) => self.plus(j, i),
            ParamKind::Floating => Ok(floating),
        }
    }

    /// `T^i a1 .. an` where `n` may be short of the full arity; the result is
    /// the remaining telescope ending in `Type`.
    pub(crate) fn infer_data_spine(
        &mut self,
        cx: &mut Locals,
        k: LevelExpr,
        c: &Name,
        i: LevelExpr,
        args: &[Term],
    ) -> TResult<Term> {
        let sig = self.sig;
        let d = sig.data(c).expect("caller checked datatype");
        if args.len() > d.arity() {
            return Err(self.err(
                ErrorCode::NotFunction,
                format!("datatype `{c}` takes {} arguments but was given {}", d.arity(), args.len()),
            ));
        }
        let at = self.plus(d.level, i)?;
        self.emit_le(at, k, "DT-Data")?;
        let np = d.params.len();
        let mut subst: Vec<(Name, Term)> = Vec::new();
        for (n, a) in args.iter().enumerate() {
            if n < np {
                let p = &d.params[n];
                let ty = self.displace(&p.ty, i)?.subst_all(&subst);
                let lvl = self.level_of(p.kind, i, k)?;
                self.check(cx, lvl, a, &ty)?;
                subst.push((p.name.clone(), a.clone()));
            } else {
                let ty = self.displace(&d.indices[n - np], i)?.subst_all(&subst);
                self.check(cx, k, a, &ty)?;
            }
        }
        let mut rest = Term::star();
        for n in (args.len()..d.arity()).rev() {
            if n < np {
                let p = &d.params[n];
                let ty = self.displace(&p.ty, i)?;
                rest = match p.kind {
                    ParamKind::Fixed(j) => Term::pi(self.plus(j, i)?, ty, p.name.clone(), rest),
                    ParamKind::Floating if rest.occurs_free(&p.name) => {
                        return Err(self.err(
                            ErrorCode::CannotInfer,
                            format!("datatype `{c}` needs its floating parameter `{}` applied", p.name),
                        ))
                    }
                    ParamKind::Floating => Term::arrow(ty, rest),
                };
            } else {
                rest = Term::arrow(self.displace(&d.indices[n - np], i)?, rest);
            }
        }
        Ok(rest.subst_all(&subst))
    }

    /// Check constructor arguments given the datatype's parameter values and
    /// return the indices of the constructed value.
    #[allow(clippy::too_many_arguments)]
    fn ctor_args(
        &mut self,
        cx: &mut Locals,
        k: LevelExpr,
        cd: &CtorDecl,
        d: &DataDecl,
        i: LevelExpr,
        pvals: &[Term],
        args: &[Term],
    ) -> TResult<Vec<Term>> {
        if args.len() != cd.args.len() {
            return Err(self.err(
                ErrorCode::CtorArity,
                format!("constructor `{}` takes {} arguments but was given {}", cd.name, cd.args.len(), args.len()),
            ));
        }
        let at = self.plus(cd.level, i)?;
        self.emit_le(at, k, "DT-Ctor")?;
        let mut subst: Vec<(Name, Term)> = d.params.iter().map(|p| p.name.clone()).zip(pvals.iter().cloned()).collect();
        for (p, a) in cd.args.iter().zip(args) {
            let ty = self.displace(&p.ty, i)?.subst_all(&subst);
            let lvl = self.level_of(p.kind, i, k)?;
            self.check(cx, lvl, a, &ty)?;
            subst.push((p.name.clone(), a.clone()));
        }
        cd.indices.iter().map(|ix| Ok(self.displace(ix, i)?.subst_all(&subst))).collect()
    }

    pub(crate) fn infer_ctor(
        &mut self,
        cx: &mut Locals,
        k: LevelExpr,
        c: &Name,
        i: LevelExpr,
        args: &[Term],
    ) -> TResult<Term> {
        let sig = self.sig;
        let Some(Global::Ctor(d, cd)) = sig.lookup(c) else {
            return Err(self.err(ErrorCode::Unbound, format!("unbound constructor `{c}`")));
        };
        if !d.params.is_empty() {
            return Err(self.err(
                ErrorCode::CannotInfer,
                format!("constructor `{c}` of parameterised datatype `{}` needs an expected type", d.name),
            ));
        }
        let idx = self.ctor_args(cx, k, cd, d, i, &[], args)?;
        Ok(Term::apps(Term::cnst(d.name.clone(), i), idx))
    }

    pub(crate) fn check_ctor(
        &mut self,
        cx: &mut Locals,
        k: LevelExpr,
        c: &Name,
        i: LevelExpr,
        args: &[Term],
        expected: &Term,
    ) -> TResult<()> {
        let sig = self.sig;
        let Some(Global::Ctor(d, cd)) = sig.lookup(c) else {
            return Err(self.err(ErrorCode::Unbound, format!("unbound constructor `{c}`")));
        };
        let ew = self.whnf(expected)?;
        let (head, sargs) = ew.spine();
        let i2 = match head.kind() {
            TermKind::Const(t, i2) if *t == d.name && sargs.len() == d.arity() => *i2,
            _ => {
                return Err(self.err(
                    ErrorCode::Mismatch,
                    format!("type mismatch: constructor `{c}` of `{}` cannot have type `{ew}`", d.name),
                ))
            }
        };
        // A constructor only belongs to its datatype at the same displacement.
        if let (Some(a), Some(b)) = (i.as_concrete(), i2.as_concrete()) {
            if a != b {
                let found = Term::apps(Term::cnst(d.name.clone(), i), sargs.iter().cloned());
                return Err(self.mismatch(expected, &found));
            }
        }
        self.emit_eq(i, i2, "DT-Ctor")?;
        let np = d.params.len();
        let idx = self.ctor_args(cx, k, cd, d, i, &sargs[..np], args)?;
        for (a, b) in idx.iter().zip(&sargs[np..]) {
            if !self.equate(a, b)? {
                let found = Term::apps(Term::cnst(d.name.clone(), i), sargs[..np].iter().cloned().chain(idx));
                return Err(self.mismatch(expected, &found));
            }
        }
        Ok(())
    }

    fn unify(&mut self, pvars: &BTreeSet<Name>, a: &Term, b: &Term, theta: &mut Vec<(Name, Term)>) -> TResult<bool> {
        let a = self.whnf(&a.subst_all(theta))?;
        let b = self.whnf(&b.subst_all(theta))?;
        if a.alpha_eq(&b) {
            return Ok(true);
        }
        // Pattern variables are solved first so context variables survive
        // whenever possible.
        for (x, y) in [(&a, &b), (&b, &a)] {
            if let TermKind::Var(p) = x.kind() {
                if pvars.contains(p) && !y.occurs_free(p) {
                    bind(theta, p, y.clone());
                    return Ok(true);
                }
            }
        }
        for (x, y) in [(&a, &b), (&b, &a)] {
            if let TermKind::Var(v) = x.kind() {
                if !y.occurs_free(v) {
                    bind(theta, v, y.clone());
                    return Ok(true);
                }
            }
        }
        if let (TermKind::CtorApp(c1, i1, as1), TermKind::CtorApp(c2, i2, as2)) = (a.kind(), b.kind()) {
            if c1 != c2 {
                return Ok(false);
            }
            self.emit_eq(*i1, *i2, "DT-Unify")?;
            for (x, y) in as1.iter().zip(as2) {
                if !self.unify(pvars, x, y, theta)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        if let (Some(h1), Some(h2)) = (rigid_head(self.sig, &a), rigid_head(self.sig, &b)) {
            if h1 != h2 {
                return Ok(false);
            }
        }
        if self.equate(&a, &b)? {
            Ok(true)
        } else {
            Err(self.err(ErrorCode::Unify, format!("cannot unify index `{a}` with `{b}`")))
        }
    }

    pub fn unify_indices(&mut self, pvars: &BTreeSet<Name>, lhs: &[Term], rhs: &[Term]) -> TResult<Unified> {
        let mut theta = Vec::new();
        for (a, b) in lhs.iter().zip(rhs) {
            if !self.unify(pvars, a, b, &mut theta)? {
                return Ok(Unified::Refuted);
            }
        }
        Ok(Unified::Solved(theta))
    }

    pub(crate) fn check_case(
        &mut self,
        cx: &mut Locals,
        k: LevelExpr,
        s: &Term,
        brs: &[Branch],
        expected: &Term,
    ) -> TResult<()> {
        // The scrutinee may live at any level up to k; floating constructor
        // arguments are bound at that level.
        let ms = self.st.fresh_meta();
        self.emit_le(ms, k, "DT-Case")?;
        let sty = self.infer(cx, ms, s)?;
        let sw = self.whnf(&sty)?;
        let (head, sargs) = sw.spine();
        let sig = self.sig;
        let (d, i) = match head.kind() {
            TermKind::Const(t, i) => match sig.data(t) {
                Some(d) if d.arity() == sargs.len() => (d, *i),
                _ => return Err(self.not_data(s, &sw)),
            },
            _ => return Err(self.not_data(s, &sw)),
        };
        let mut seen = BTreeSet::new();
        for br in brs {
            if d.ctor(&br.ctor).is_none() {
                return Err(match sig.lookup(&br.ctor) {
                    Some(Global::Ctor(other, _)) => self.err(
                        ErrorCode::NotData,
                        format!("constructor `{}` belongs to `{}`, not `{}`", br.ctor, other.name, d.name),
                    ),
                    _ => self.err(ErrorCode::Unbound, format!("`{}` is not a constructor", br.ctor)),
                });
            }
            if !seen.insert(br.ctor.clone()) {
                return Err(self.err(ErrorCode::Nonexhaustive, format!("duplicate branch for `{}`", br.ctor)));
            }
        }
        let np = d.params.len();
        let (pvals, ivals) = sargs.split_at(np);
        let scrut_var = match s.kind() {
            TermKind::Var(x) => Some(x.clone()),
            _ => None,
        };
        for cd in &d.ctors {
            let br = brs.iter().find(|b| b.ctor == cd.name);
            let names: Vec<Name> = match br {
                Some(b) if b.binders.len() != cd.args.len() => {
                    return Err(self.err(
                        ErrorCode::CtorArity,
                        format!(
                            "branch for `{}` binds {} variables but the constructor takes {}",
                            cd.name,
                            b.binders.len(),
                            cd.args.len()
                        ),
                    ))
                }
                Some(b) => b.binders.clone(),
                None => cd.args.iter().map(|p| p.name.clone()).collect(),
            };
            let mut body = br.map(|b| b.body.clone());
            let mut cx2 = cx.clone();
            let mut subst: Vec<(Name, Term)> =
                d.params.iter().map(|p| p.name.clone()).zip(pvals.iter().cloned()).collect();
            let mut bvars = Vec::new();
            let mut pvars = BTreeSet::new();
            for (n, (p, b)) in cd.args.iter().zip(&names).enumerate() {
                let later = &names[n + 1..];
                let b2 = crate::term::fresh_name(b, |c| {
                    cx2.iter().any(|l| &*l.name == c) || later.iter().any(|l| &**l == c)
                });
                if &b2 != b {
                    body = body.map(|t| t.subst(b, &Term::var(b2.clone())));
                }
                let ty = self.displace(&p.ty, i)?.subst_all(&subst);
                let lvl = self.level_of(p.kind, i, ms)?;
                cx2.push(Local { name: b2.clone(), level: lvl, ty });
                subst.push((p.name.clone(), Term::var(b2.clone())));
                bvars.push(Term::var(b2.clone()));
                pvars.insert(b2);
            }
            let cis: Vec<Term> =
                cd.indices.iter().map(|ix| Ok(self.displace(ix, i)?.subst_all(&subst))).collect::<TResult<_>>()?;
            let Some(body) = body else {
                let mark = self.st.constraints.len();
                let r = self.unify_indices(&pvars, &cis, ivals);
                self.st.constraints.truncate(mark);
                if let Ok(Unified::Refuted) = r {
                    continue;
                }
                return Err(self.err(ErrorCode::Nonexhaustive, format!("missing branch for constructor `{}`", cd.name)));
            };
            let mut theta = match self.unify_indices(&pvars, &cis, ivals)? {
                Unified::Refuted => continue,
                Unified::Solved(theta) => theta,
            };
            if let Some(x) = &scrut_var {
                let pat = Term::ctor(cd.name.clone(), i, bvars.clone()).subst_all(&theta);
                bind(&mut theta, x, pat);
            }
            let goal = expected.subst_all(&theta);
            let mut cx3: Locals = cx2.into_iter().map(|l| Local { ty: l.ty.subst_all(&theta), ..l }).collect();
            let body = body.subst_all(&theta);
            self.check(&mut cx3, k, &body, &goal)?;
        }
        Ok(())
    }

    fn not_data(&self, s: &Term, ty: &Term) -> crate::diagnostic::Diagnostic {
        self.err(ErrorCode::NotData, format!("case on `{s}` of type `{ty}`, which is not a datatype"))
    }
}

#[cfg(test)]
mod tests {
    use crate::diagnostic::ErrorCode;
    use crate::program::{check_source, CheckOptions};
    use crate::signature::Signature;

    const BASE: &str = "\
data Bool :^0 Type where { True :^0 Bool; False :^0 Bool }
data Eq (X :^0 Type) :^1 X -> X -> Type where { Refl :^1 (x :^0 X) -> Eq X x x }
data IsTrue :^0 Bool -> Type where { Yes :^0 IsTrue True }
";

    fn run(extra: &str) -> Result<(), ErrorCode> {
        let r = check_source(&mut Signature::new(), &format!("{BASE}{extra}"), &CheckOptions::default());
        match r.diagnostics.first() {
            None => Ok(()),
            Some(d) => Err(d.code),
        }
    }

    #[test]
    fn refuted_branches_may_be_omitted() {
        assert_eq!(run("f :^0 IsTrue False -> Void\nf = \\p. case p of { }\n"), Ok(()));
    }

    #[test]
    fn reachable_branches_may_not() {
        assert_eq!(run("f :^0 Bool -> Bool\nf = \\b. case b of { True -> b }\n"), Err(ErrorCode::Nonexhaustive));
    }

    #[test]
    fn duplicate_branches() {
        let src = "f :^0 Bool -> Bool\nf = \\b. case b of { True -> b; True -> b; False -> b }\n";
        assert_eq!(run(src), Err(ErrorCode::Nonexhaustive));
    }

    #[test]
    fn branch_arity() {
        assert_eq!(
            run("f :^0 Bool -> Bool\nf = \\b. case b of { True x -> b; False -> b }\n"),
            Err(ErrorCode::CtorArity)
        );
    }

    #[test]
    fn case_on_a_function() {
        assert_eq!(run("f :^0 (Bool -> Bool) -> Bool\nf = \\g. case g of { }\n"), Err(ErrorCode::NotData));
    }

    #[test]
    fn branch_from_another_datatype() {
        assert_eq!(run("f :^0 Bool -> Bool\nf = \\b. case b of { Yes -> b }\n"), Err(ErrorCode::NotData));
    }

    #[test]
    fn scrutinee_variable_is_refined() {
        let src = "f :^0 (b :^0 Bool) -> IsTrue b -> Eq^0 Bool b True\nf = \\b p. case p of { Yes -> Refl True }\n";
        // Eq lives at 1, so the statement above needs level 2.
        assert_eq!(run(src), Err(ErrorCode::LevelUnsat));
        let src = "f :^2 (b :^0 Bool) -> IsTrue b -> Eq Bool b True\nf = \\b p. case p of { Yes -> Refl True }\n";
        assert_eq!(run(src), Ok(()));
    }

    #[test]
    fn flexible_indices_do_not_unify() {
        let src = "f :^2 (X :^0 Type) -> (g :^0 X -> X) -> (h :^0 X -> X) -> (x :^0 X) -> Eq X (g x) (h x) -> X\n\
                   f = \\X g h x p. case p of { Refl z -> z }\n";
        assert_eq!(run(src), Err(ErrorCode::Unify));
    }

    #[test]
    fn constructor_arity_is_checked() {
        assert_eq!(run("t :^1 Eq Bool True True\nt = Refl True False\n"), Err(ErrorCode::CtorArity));
    }

    #[test]
    fn constructor_indices_must_match() {
        assert_eq!(run("t :^1 Eq Bool True False\nt = Refl True\n"), Err(ErrorCode::Mismatch));
    }
}
