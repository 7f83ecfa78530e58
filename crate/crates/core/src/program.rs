//! Checking declarations and whole programs.
//!
//! Each top-level declaration is elaborated, checked, and its level
//! constraints solved on their own; the solution is then frozen into the
//! signature so later declarations see only concrete levels.

use crate::diagnostic::{Diagnostic, ErrorCode, Span};
use crate::elab::Resolver;
use crate::eval::DEFAULT_FUEL;
use crate::levels::{Constraint, Level, LevelExpr};
use crate::signature::{CtorDecl, DataDecl, Definition, Param, ParamKind, SigEntry, Signature};
use crate::surface::{parse_program, SData, STerm, SurfaceDecl};
use crate::term::{fresh_name, Term, TermKind};
use crate::typer::{Checker, ElabState, Local, Locals, TResult};

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub file: String,
    pub no_infer: bool,
    pub fuel: usize,
    /// Continue after a failed declaration instead of stopping.
    pub keep_going: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { file: "<input>".into(), no_infer: false, fuel: DEFAULT_FUEL, keep_going: false }
    }
}

impl CheckOptions {
    pub fn file(file: &str) -> Self {
        CheckOptions { file: file.into(), ..Default::default() }
    }
}

/// A declaration that passed, as frozen into the signature.
#[derive(Clone, Debug)]
pub struct Checked {
    pub entry: SigEntry,
    pub span: Span,
    /// Constraints generated while checking, before solving.
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checked: Vec<Checked>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// Exit status: 0 when everything checked, 2 for a parse error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        self.diagnostics.iter().map(|d| d.code.exit_code()).max().unwrap_or(0)
    }

    pub fn level_of(&self, name: &str) -> Option<Level> {
        self.checked.iter().find(|c| &**c.entry.name() == name).and_then(|c| c.entry.level())
    }
}

fn fail(e: Diagnostic, name: &str, span: Span, opts: &CheckOptions) -> Diagnostic {
    let mut e = e.at(Some(span)).in_file(&opts.file);
    e.decl = Some(name.to_string());
    e
}

/// Check `name :^level ty` with `name = body` and add it to the signature.
pub fn check_def(
    sig: &mut Signature,
    name: &str,
    level: Option<Level>,
    ty: &STerm,
    body: &STerm,
    span: Span,
    opts: &CheckOptions,
) -> TResult<Checked> {
    if sig.contains(name) {
        return Err(fail(Diagnostic::new(ErrorCode::Parse, format!("`{name}` is already declared")), name, span, opts));
    }
    let mut st = ElabState::new(&opts.file, opts.no_infer, opts.fuel);
    let r = def_inner(sig, &mut st, name, level, ty, body, span);
    match r {
        Ok(d) => {
            sig.replace_last(SigEntry::Def(d.clone()));
            Ok(Checked { entry: SigEntry::Def(d), span, constraints: st.constraints })
        }
        Err(e) => {
            if sig.entries().last().is_some_and(|e| &**e.name() == name) {
                sig.pop();
            }
            Err(fail(e, name, span, opts))
        }
    }
}

fn def_inner(
    sig: &mut Signature,
    st: &mut ElabState,
    name: &str,
    level: Option<Level>,
    ty_s: &STerm,
    body_s: &STerm,
    span: Span,
) -> TResult<Definition> {
    let (l, ty) = {
        let mut r = Resolver::new(sig, st, None);
        let l = r.binder_level(level, &format!("definition `{name}`"), span)?;
        (l, r.resolve(ty_s)?)
    };
    Checker::new(sig, st).check_type(&mut Locals::new(), l, &ty)?;
    sig.push(SigEntry::Def(Definition { name: name.into(), level: l, ty: ty.clone(), body: None }));
    let body = Resolver::new(sig, st, Some(name)).resolve(body_s)?;
    Checker::new(sig, st).check(&mut Locals::new(), l, &body, &ty)?;
    let asg = st.solve()?;
    Ok(Definition { name: name.into(), level: l.zonk(&asg), ty: ty.zonk(&asg), body: Some(body.zonk(&asg)) })
}

/// Check a datatype declaration and add it to the signature.
pub fn check_data(sig: &mut Signature, d: &SData, opts: &CheckOptions) -> TResult<Checked> {
    if sig.contains(&d.name) {
        return Err(fail(
            Diagnostic::new(ErrorCode::Parse, format!("`{}` is already declared", d.name)),
            &d.name,
            d.span,
            opts,
        ));
    }
    if let Some(c) = d.ctors.iter().find(|c| sig.contains(&c.name) || c.name == d.name) {
        return Err(fail(
            Diagnostic::new(ErrorCode::Parse, format!("`{}` is already declared", c.name)),
            &d.name,
            c.span,
            opts,
        ));
    }
    let mut st = ElabState::new(&opts.file, opts.no_infer, opts.fuel);
    match data_inner(sig, &mut st, d) {
        Ok(dd) => {
            sig.replace_last(SigEntry::Data(dd.clone()));
            Ok(Checked { entry: SigEntry::Data(dd), span: d.span, constraints: st.constraints })
        }
        Err(e) => {
            if sig.entries().last().is_some_and(|e| **e.name() == *d.name) {
                sig.pop();
            }
            Err(fail(e, &d.name, d.span, opts))
        }
    }
}

fn data_inner(sig: &mut Signature, st: &mut ElabState, d: &SData) -> TResult<DataDecl> {
    let l = Resolver::new(sig, st, None).binder_level(d.level, &format!("datatype `{}`", d.name), d.span)?;
    let mut cx = Locals::new();
    let mut scope: Vec<String> = Vec::new();
    let mut params = Vec::new();
    for p in &d.params {
        if scope.contains(&p.name) {
            return Err(Diagnostic::new(ErrorCode::Parse, format!("duplicate parameter `{}`", p.name)).at(Some(p.span)));
        }
        let ty = Resolver::new(sig, st, None).resolve_in(&p.ty, &scope)?;
        let fixed = match p.level {
            _ if !p.fixed => None,
            Some(j) => Some(LevelExpr::from(j)),
            None => {
                Some(Resolver::new(sig, st, None).binder_level(None, &format!("parameter `{}`", p.name), p.span)?)
            }
        };
        let mut ch = Checker::new(sig, st);
        ch.span = Some(p.span);
        let (kind, at) = match fixed {
            Some(j) => {
                ch.emit_lt(j, l, "D-Param")?;
                (ParamKind::Fixed(j), j)
            }
            None => (ParamKind::Floating, l),
        };
        ch.check_type(&mut cx, at, &ty)?;
        cx.push(Local { name: p.name.as_str().into(), level: at, ty: ty.clone() });
        scope.push(p.name.clone());
        params.push(Param { name: p.name.as_str().into(), kind, ty });
    }
    let ity = Resolver::new(sig, st, None).resolve_in(&d.index_type, &scope)?;
    Checker::new(sig, st).check_type(&mut cx, l, &ity)?;
    let mut indices = Vec::new();
    let mut rest = ity.clone();
    loop {
        match rest.kind() {
            TermKind::Star => break,
            TermKind::Arrow(a, b) => {
                indices.push(a.clone());
                let b = b.clone();
                rest = b;
            }
            _ => {
                return Err(Diagnostic::new(
                    ErrorCode::Mismatch,
                    format!("index type `{ity}` of `{}` must have the form `A1 -> ... -> Type`", d.name),
                )
                .at(Some(d.index_type.span)))
            }
        }
    }
    let mut decl = DataDecl { name: d.name.as_str().into(), level: l, params, indices, ctors: Vec::new() };
    sig.push(SigEntry::Data(decl.clone()));
    for c in &d.ctors {
        let cl = match c.level {
            Some(j) => {
                let mut ch = Checker::new(sig, st);
                ch.span = Some(c.span);
                ch.emit_eq(j.into(), l, "D-Ctor")?;
                j.into()
            }
            None if st.no_infer => {
                return Err(Diagnostic::new(
                    ErrorCode::CannotInfer,
                    format!("constructor `{}` has no level annotation and inference is disabled", c.name),
                )
                .at(Some(c.span)))
            }
            None => l,
        };
        let ty = Resolver::new(sig, st, Some(&d.name)).resolve_in(&c.ty, &scope)?;
        Checker::new(sig, st).check_type(&mut cx.clone(), l, &ty)?;
        let ctor = peel_ctor(&decl, &c.name, cl, &ty).map_err(|e| e.at(Some(c.span)))?;
        decl.ctors.push(ctor);
        sig.replace_last(SigEntry::Data(decl.clone()));
    }
    let asg = st.solve()?;
    Ok(decl.zonk(&asg))
}

/// Split a checked constructor type into its argument telescope and the
/// indices of its result.
fn peel_ctor(d: &DataDecl, name: &str, level: LevelExpr, ty: &Term) -> TResult<CtorDecl> {
    let mut args: Vec<Param> = Vec::new();
    let mut t = ty.clone();
    loop {
        let next = match t.kind() {
            TermKind::Pi(j, a, x, b) => {
                args.push(Param { name: x.clone(), kind: ParamKind::Fixed(*j), ty: a.clone() });
                b.clone()
            }
            TermKind::Arrow(a, b) => {
                let n = fresh_name("_a", |c| args.iter().any(|p| &*p.name == c) || ty.occurs_free(c));
                args.push(Param { name: n, kind: ParamKind::Floating, ty: a.clone() });
                b.clone()
            }
            _ => break,
        };
        t = next;
    }
    let bad = || {
        let want = std::iter::once(d.name.to_string())
            .chain(d.params.iter().map(|p| p.name.to_string()))
            .collect::<Vec<_>>()
            .join(" ");
        Diagnostic::new(
            ErrorCode::CtorResult,
            format!("constructor `{name}` must return `{want}` applied to indices, not `{t}`"),
        )
    };
    let (head, sargs) = t.spine();
    match head.kind() {
        TermKind::Const(c, i) if *c == d.name && *i == LevelExpr::ZERO && sargs.len() == d.arity() => {}
        _ => return Err(bad()),
    }
    for (p, a) in d.params.iter().zip(&sargs) {
        let shadowed = args.iter().any(|q| q.name == p.name);
        match a.kind() {
            TermKind::Var(v) if *v == p.name && !shadowed => {}
            _ => return Err(bad()),
        }
    }
    Ok(CtorDecl { name: name.into(), level, args, indices: sargs[d.params.len()..].to_vec() })
}

/// Check declarations in order, adding each to the signature.
pub fn check_program(sig: &mut Signature, decls: &[SurfaceDecl], opts: &CheckOptions) -> Report {
    let mut report = Report::default();
    let mut n = 0;
    while n < decls.len() {
        let r = match &decls[n] {
            SurfaceDecl::Sig { name, level, ty, span } => {
                let body = match decls.get(n + 1) {
                    Some(SurfaceDecl::Def { name: n2, body, .. }) if n2 == name => body,
                    _ => {
                        report.diagnostics.push(fail(
                            Diagnostic::new(ErrorCode::Parse, format!("signature for `{name}` has no definition")),
                            name,
                            *span,
                            opts,
                        ));
                        return report;
                    }
                };
                n += 2;
                check_def(sig, name, *level, ty, body, *span, opts)
            }
            SurfaceDecl::Def { name, span, .. } => {
                report.diagnostics.push(fail(
                    Diagnostic::new(ErrorCode::Parse, format!("definition of `{name}` has no signature")),
                    name,
                    *span,
                    opts,
                ));
                return report;
            }
            SurfaceDecl::Data(d) => {
                n += 1;
                check_data(sig, d, opts)
            }
        };
        match r {
            Ok(c) => report.checked.push(c),
            Err(e) => {
                report.diagnostics.push(e);
                if !opts.keep_going {
                    break;
                }
            }
        }
    }
    report
}

/// Parse and check a source file.
pub fn check_source(sig: &mut Signature, src: &str, opts: &CheckOptions) -> Report {
    match parse_program(src) {
        Ok(decls) => check_program(sig, &decls, opts),
        Err(e) => Report { checked: Vec::new(), diagnostics: vec![e.in_file(&opts.file)] },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(src: &str) -> Vec<ErrorCode> {
        let opts = CheckOptions { keep_going: true, ..CheckOptions::default() };
        check_source(&mut Signature::new(), src, &opts).diagnostics.iter().map(|d| d.code).collect()
    }

    #[test]
    fn duplicate_declarations() {
        assert_eq!(codes("a :^0 Type\na = Type\na :^0 Type\na = Void\n"), [ErrorCode::Parse]);
        assert_eq!(codes("data T :^0 Type where { C :^0 T }\ndata U :^0 Type where { C :^0 U }\n"), [ErrorCode::Parse]);
    }

    #[test]
    fn signature_and_definition_must_pair() {
        assert_eq!(codes("a = Type\n"), [ErrorCode::Parse]);
        assert_eq!(codes("a :^0 Type\nb :^0 Type\nb = Type\n"), [ErrorCode::Parse]);
    }

    #[test]
    fn fixed_parameters_sit_below_the_datatype() {
        assert_eq!(codes("data T (X :^1 Type) :^1 Type where { C :^1 T X }\n"), [ErrorCode::LevelUnsat]);
        assert!(codes("data T (X :^0 Type) :^1 Type where { C :^1 T X }\n").is_empty());
    }

    #[test]
    fn constructors_share_the_datatype_level() {
        assert_eq!(codes("data T :^1 Type where { C :^0 T }\n"), [ErrorCode::LevelUnsat]);
    }

    #[test]
    fn constructor_results() {
        assert_eq!(codes("data T :^0 Type where { C :^0 Type }\n"), [ErrorCode::CtorResult]);
        assert_eq!(codes("data T (X : Type) :^0 Type where { C :^0 T Void }\n"), [ErrorCode::CtorResult]);
        assert_eq!(codes("data T (X : Type) :^1 Type where { C :^1 (X :^0 Type) -> T X }\n"), [ErrorCode::CtorResult]);
    }

    #[test]
    fn index_types_end_in_type() {
        assert_eq!(codes("data T :^0 Type -> Void where { }\n"), [ErrorCode::Mismatch]);
    }

    #[test]
    fn failed_declarations_leave_the_signature_unchanged() {
        let mut sig = Signature::new();
        let r = check_source(&mut sig, "a :^0 Type\na = Type\nb :^0 Void\nb = Type\n", &CheckOptions::default());
        assert_eq!(r.checked.len(), 1);
        assert_eq!(sig.len(), 1);
        assert!(!sig.contains("b"));
    }

    #[test]
    fn keep_going_reports_every_failure() {
        let src = "a :^0 Void\na = Type\nb :^0 Type\nb = Type\nc :^0 Void\nc = Type\n";
        assert_eq!(codes(src).len(), 2);
        let r = check_source(&mut Signature::new(), src, &CheckOptions::default());
        assert_eq!((r.checked.len(), r.diagnostics.len()), (0, 1));
    }

    #[test]
    fn constraints_are_reported_before_solving() {
        let mut sig = Signature::new();
        let r = check_source(
            &mut sig,
            "id :^1 (X :^0 Type) -> X -> X\nid = \\X x. x\nj : (X :^0 Type) -> X -> X\nj = id\n",
            &CheckOptions::default(),
        );
        assert!(r.ok());
        assert_eq!(r.level_of("j"), Some(Level(1)));
        assert!(!r.checked[1].constraints.is_empty());
        assert!(r.checked[1].constraints.iter().any(|c| c.lhs.has_meta() || c.rhs.has_meta()));
    }
}
