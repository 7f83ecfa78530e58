use crate::levels::LevelExpr;
use crate::signature::{DataDecl, Definition, ParamKind, SigEntry, Signature};
use crate::term::{Name, Term, TermKind};

const TERM: u8 = 0;
const APP: u8 = 1;
const ATOM: u8 = 2;

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    Printer { scope: Vec::new() }.term(t, TERM, &mut out);
    out
}

struct Printer {
    scope: Vec<Name>,
}

fn level(l: &LevelExpr) -> String {
    l.to_string()
}

impl Printer {
    fn global(&self, c: &Name, i: &LevelExpr, out: &mut String) {
        out.push_str(c);
        let shadowed = self.scope.iter().any(|n| n == c);
        if *i != LevelExpr::ZERO || shadowed {
            out.push('^');
            out.push_str(&level(i));
        }
    }

    fn under(&mut self, names: &[Name], f: impl FnOnce(&mut Self)) {
        let n = self.scope.len();
        self.scope.extend(names.iter().cloned());
        f(self);
        self.scope.truncate(n);
    }

    fn term(&mut self, t: &Term, prec: u8, out: &mut String) {
        match t.kind() {
            TermKind::Star => out.push_str("Type"),
            TermKind::Bottom => out.push_str("Void"),
            TermKind::Var(x) => out.push_str(x),
            TermKind::Const(c, i) => self.global(c, i, out),
            TermKind::Pi(j, a, x, b) => self.paren(prec > TERM, out, |p, out| {
                out.push('(');
                out.push_str(x);
                out.push_str(" :^");
                out.push_str(&level(j));
                out.push(' ');
                p.term(a, TERM, out);
                out.push_str(") -> ");
                p.under(std::slice::from_ref(x), |p| p.term(b, TERM, out));
            }),
            TermKind::Arrow(a, b) => self.paren(prec > TERM, out, |p, out| {
                p.term(a, APP, out);
                out.push_str(" -> ");
                p.term(b, TERM, out);
            }),
            TermKind::Lam(..) => self.paren(prec > TERM, out, |p, out| {
                let mut names = Vec::new();
                let mut body = t.clone();
                while let TermKind::Lam(x, b) = body.kind() {
                    names.push(x.clone());
                    let b = b.clone();
                    body = b;
                }
                out.push('\\');
                out.push_str(&names.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));
                out.push_str(". ");
                p.under(&names, |p| p.term(&body, TERM, out));
            }),
            TermKind::App(..) => self.paren(prec > APP, out, |p, out| {
                let (head, args) = t.spine();
                p.term(&head, APP, out);
                for a in &args {
                    out.push(' ');
                    p.term(a, ATOM, out);
                }
            }),
            TermKind::Absurd(b) => self.paren(prec > APP, out, |p, out| {
                out.push_str("absurd ");
                p.term(b, ATOM, out);
            }),
            TermKind::Ann(a, ty) => {
                out.push('(');
                self.term(a, TERM, out);
                out.push_str(" : ");
                self.term(ty, TERM, out);
                out.push(')');
            }
            TermKind::CtorApp(c, i, args) => self.paren(prec > APP && !args.is_empty(), out, |p, out| {
                p.global(c, i, out);
                for a in args {
                    out.push(' ');
                    p.term(a, ATOM, out);
                }
            }),
            TermKind::Case(s, brs) => {
                out.push_str("case ");
                self.term(s, TERM, out);
                out.push_str(" of {");
                for (n, br) in brs.iter().enumerate() {
                    out.push_str(if n == 0 { " " } else { "; " });
                    out.push_str(&br.ctor);
                    for b in &br.binders {
                        out.push(' ');
                        out.push_str(b);
                    }
                    out.push_str(" -> ");
                    self.under(&br.binders, |p| p.term(&br.body, TERM, out));
                }
                out.push_str(" }");
            }
        }
    }

    fn paren(&mut self, wrap: bool, out: &mut String, f: impl FnOnce(&mut Self, &mut String)) {
        if wrap {
            out.push('(');
        }
        f(self, out);
        if wrap {
            out.push(')');
        }
    }
}

/// `name :^L type` followed by `name = body`.
pub fn print_definition(d: &Definition) -> String {
    let mut s = format!("{} :^{} {}", d.name, d.level, print_term(&d.ty));
    if let Some(b) = &d.body {
        s.push_str(&format!("\n{} = {}", d.name, print_term(b)));
    }
    s
}

pub fn print_data(d: &DataDecl) -> String {
    let mut s = format!("data {}", d.name);
    let mut scope = Vec::new();
    for p in &d.params {
        let ty = print_scoped(&p.ty, &scope);
        match p.kind {
            ParamKind::Fixed(j) => s.push_str(&format!(" ({} :^{} {})", p.name, j, ty)),
            ParamKind::Floating => s.push_str(&format!(" ({} : {})", p.name, ty)),
        }
        scope.push(p.name.clone());
    }
    s.push_str(&format!(" :^{} {} where {{", d.level, print_scoped(&d.index_type(), &scope)));
    for (n, c) in d.ctors.iter().enumerate() {
        // Rebuild the constructor's type from its telescope.
        let params = d.params.iter().map(|p| Term::var(p.name.clone()));
        let result = Term::apps(Term::cnst(d.name.clone(), LevelExpr::ZERO), params.chain(c.indices.iter().cloned()));
        let ty = c.args.iter().rev().fold(result, |acc, a| match a.kind {
            ParamKind::Fixed(j) => Term::pi(j, a.ty.clone(), a.name.clone(), acc),
            ParamKind::Floating => Term::arrow(a.ty.clone(), acc),
        });
        s.push_str(if n == 0 { "\n  " } else { ";\n  " });
        s.push_str(&format!("{} :^{} {}", c.name, c.level, print_scoped(&ty, &scope)));
    }
    s.push_str(if d.ctors.is_empty() { "}" } else { "\n}" });
    s
}

fn print_scoped(t: &Term, scope: &[Name]) -> String {
    let mut out = String::new();
    Printer { scope: scope.to_vec() }.term(t, TERM, &mut out);
    out
}

pub fn print_entry(e: &SigEntry) -> String {
    match e {
        SigEntry::Def(d) => print_definition(d),
        SigEntry::Data(d) => print_data(d),
    }
}

/// The whole signature as a source file, every level written out.
pub fn print_signature(sig: &Signature) -> String {
    let mut s = String::new();
    for e in sig.entries() {
        s.push_str(&print_entry(e));
        s.push('\n');
    }
    s
}
