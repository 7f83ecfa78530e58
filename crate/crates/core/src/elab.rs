//! Resolution of surface terms to core terms.
//!
//! Names bound by an enclosing binder become variables; other names are
//! looked up in the signature. A bare global gets a fresh displacement
//! meta, except a self-reference (displacement 0) and everything under
//! `--no-infer` (also 0). Constructor spines are saturated into
//! [`TermKind::CtorApp`](crate::term::TermKind::CtorApp), eta-expanding
//! partial applications.

use crate::diagnostic::{Diagnostic, ErrorCode, Span};
use crate::levels::{Level, LevelExpr};
use crate::signature::{Global, Signature};
use crate::surface::{STerm, STermKind};
use crate::term::{fresh_name, Branch, Term};
use crate::typer::{ElabState, TResult};

pub struct Resolver<'a> {
    sig: &'a Signature,
    st: &'a mut ElabState,
    /// The declaration whose body is being resolved.
    current: Option<String>,
}

impl<'a> Resolver<'a> {
    pub fn new(sig: &'a Signature, st: &'a mut ElabState, current: Option<&str>) -> Self {
        Resolver { sig, st, current: current.map(str::to_string) }
    }

    pub fn resolve(&mut self, t: &STerm) -> TResult<Term> {
        self.term(t, &mut Vec::new())
    }

    /// Resolve under the given names already in scope.
    pub fn resolve_in(&mut self, t: &STerm, scope: &[String]) -> TResult<Term> {
        self.term(t, &mut scope.to_vec())
    }

    fn mark(&mut self, t: Term, span: Span) -> Term {
        self.st.record_span(&t, span);
        t
    }

    /// A binder level: explicit, or a fresh meta when inference is on.
    pub fn binder_level(&mut self, l: Option<Level>, what: &str, span: Span) -> TResult<LevelExpr> {
        match l {
            Some(l) => Ok(l.into()),
            None if self.st.no_infer => Err(Diagnostic::new(
                ErrorCode::CannotInfer,
                format!("{what} has no level annotation and inference is disabled"),
            )
            .at(Some(span))),
            None => Ok(self.st.fresh_meta()),
        }
    }

    fn displacement(&mut self, x: &str, d: Option<Level>) -> LevelExpr {
        match d {
            Some(l) => l.into(),
            None if self.st.no_infer || self.current.as_deref() == Some(x) => LevelExpr::ZERO,
            None => self.st.fresh_meta(),
        }
    }

    fn term(&mut self, t: &STerm, scope: &mut Vec<String>) -> TResult<Term> {
        let sp = t.span;
        let r = match &t.kind {
            STermKind::Type => Term::star(),
            STermKind::Void => Term::bottom(),
            STermKind::Ident(x, d) => return self.head(x, *d, Vec::new(), scope, sp),
            STermKind::Pi(x, l, a, b) => {
                let j = self.binder_level(*l, &format!("binder `{x}`"), sp)?;
                let a = self.term(a, scope)?;
                scope.push(x.clone());
                let b = self.term(b, scope);
                scope.pop();
                Term::pi(j, a, x.as_str(), b?)
            }
            STermKind::Arrow(a, b) => Term::arrow(self.term(a, scope)?, self.term(b, scope)?),
            STermKind::Lam(xs, b) => {
                let n = scope.len();
                scope.extend(xs.iter().cloned());
                let body = self.term(b, scope);
                scope.truncate(n);
                let mut body = body?;
                for x in xs.iter().rev() {
                    body = self.mark(Term::lam(x.as_str(), body), sp);
                }
                return Ok(body);
            }
            STermKind::App(..) => {
                let mut args = Vec::new();
                let mut h = t;
                while let STermKind::App(f, a) = &h.kind {
                    args.push(a.as_ref());
                    h = f;
                }
                args.reverse();
                let rargs = args.iter().map(|a| self.term(a, scope)).collect::<TResult<Vec<_>>>()?;
                if let STermKind::Ident(x, d) = &h.kind {
                    return self.head(x, *d, rargs, scope, sp);
                }
                let f = self.term(h, scope)?;
                return Ok(self.apply(f, rargs, sp));
            }
            STermKind::Absurd(a) => Term::absurd(self.term(a, scope)?),
            STermKind::Ann(a, ty) => Term::ann(self.term(a, scope)?, self.term(ty, scope)?),
            STermKind::Case(s, brs) => {
                let s = self.term(s, scope)?;
                let mut out = Vec::new();
                for br in brs {
                    let n = scope.len();
                    scope.extend(br.binders.iter().cloned());
                    let body = self.term(&br.body, scope);
                    scope.truncate(n);
                    out.push(Branch {
                        ctor: br.ctor.as_str().into(),
                        binders: br.binders.iter().map(|b| b.as_str().into()).collect(),
                        body: body?,
                    });
                }
                Term::case(s, out)
            }
        };
        Ok(self.mark(r, sp))
    }

    fn apply(&mut self, mut f: Term, args: Vec<Term>, sp: Span) -> Term {
        for a in args {
            f = self.mark(Term::app(f, a), sp);
        }
        f
    }

    fn head(&mut self, x: &str, d: Option<Level>, args: Vec<Term>, scope: &[String], sp: Span) -> TResult<Term> {
        if d.is_none() && scope.iter().any(|s| s == x) {
            let v = self.mark(Term::var(x), sp);
            return Ok(self.apply(v, args, sp));
        }
        let sig = self.sig;
        match sig.lookup(x) {
            Some(Global::Def(_)) | Some(Global::Data(_)) => {
                let i = self.displacement(x, d);
                let c = self.mark(Term::cnst(x, i), sp);
                Ok(self.apply(c, args, sp))
            }
            Some(Global::Ctor(_, cd)) => {
                let i = self.displacement(x, d);
                let n = cd.args.len();
                if args.len() > n {
                    // Constructors build datatypes, never functions.
                    return Err(Diagnostic::new(
                        ErrorCode::CtorArity,
                        format!("constructor `{x}` takes {n} arguments but was given {}", args.len()),
                    )
                    .at(Some(sp)));
                }
                if args.len() == n {
                    return Ok(self.mark(Term::ctor(x, i, args), sp));
                }
                // Eta-expand a partial application.
                let mut fresh: Vec<String> = Vec::new();
                for p in &cd.args[args.len()..] {
                    let base = if p.name.starts_with('_') { "a" } else { &p.name };
                    let v = fresh_name(base, |c| scope.iter().any(|s| s == c) || fresh.iter().any(|s| s == c));
                    fresh.push(v.to_string());
                }
                let mut all = args;
                all.extend(fresh.iter().map(|v| Term::var(v.as_str())));
                let mut t = self.mark(Term::ctor(x, i, all), sp);
                for v in fresh.iter().rev() {
                    t = self.mark(Term::lam(v.as_str(), t), sp);
                }
                Ok(t)
            }
            None => Err(Diagnostic::new(ErrorCode::Unbound, format!("unbound name `{x}`")).at(Some(sp))),
        }
    }
}
