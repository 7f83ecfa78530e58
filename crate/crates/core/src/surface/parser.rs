use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::diagnostic::{Diagnostic, ErrorCode, Span};
use crate::levels::Level;

pub fn parse_program(src: &str) -> Result<Vec<SurfaceDecl>, Diagnostic> {
    let mut p = Parser::new(lex(src)?);
    let decls = p.program()?;
    check_pairing(&decls)?;
    Ok(decls)
}

pub fn parse_term(src: &str) -> Result<STerm, Diagnostic> {
    let mut p = Parser::new(lex(src)?);
    // A standalone term is parsed as if nested, so no token ends it early.
    p.depth = 1;
    let t = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Every definition directly follows its own signature, and every signature
/// is followed by its definition.
fn check_pairing(decls: &[SurfaceDecl]) -> Result<(), Diagnostic> {
    let mut i = 0;
    while i < decls.len() {
        match &decls[i] {
            SurfaceDecl::Sig { name, span, .. } => match decls.get(i + 1) {
                Some(SurfaceDecl::Def { name: n2, .. }) if n2 == name => i += 2,
                _ => {
                    return Err(Diagnostic::new(
                        ErrorCode::Parse,
                        format!("signature for `{name}` is not followed by its definition"),
                    )
                    .at(Some(*span)))
                }
            },
            SurfaceDecl::Def { name, span, .. } => {
                return Err(Diagnostic::new(
                    ErrorCode::Parse,
                    format!("definition of `{name}` is not directly preceded by its signature"),
                )
                .at(Some(*span)))
            }
            SurfaceDecl::Data(_) => i += 1,
        }
    }
    Ok(())
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Bracket nesting. At depth 0 an identifier followed by `:` or `=`
    /// starts the next declaration rather than continuing an application.
    depth: usize,
}

type PResult<T> = Result<T, Diagnostic>;

/// A parenthesised `(x :^j A)` seen where a term was expected; it becomes a
/// Π binder if an arrow follows and an ascription otherwise.
struct Binder {
    name: String,
    name_span: Span,
    level: Option<Level>,
    ty: STerm,
    span: Span,
}

impl Parser {
    fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0, depth: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, what: &str) -> PResult<T> {
        Err(Diagnostic::new(ErrorCode::Parse, format!("expected {what}, found {}", self.peek().describe()))
            .at(Some(self.span())))
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if *self.peek() == t {
            Ok(self.bump())
        } else {
            let what = match &t {
                Tok::Eof => "end of input".to_string(),
                other => other.describe(),
            };
            self.error(&what)
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                let sp = self.span();
                self.bump();
                Ok((x, sp))
            }
            _ => self.error("an identifier"),
        }
    }

    fn opt_caret(&mut self) -> PResult<Option<Level>> {
        if *self.peek() != Tok::Caret {
            return Ok(None);
        }
        self.bump();
        match *self.peek() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Some(Level(n)))
            }
            _ => self.error("a level after `^`"),
        }
    }

    fn program(&mut self) -> PResult<Vec<SurfaceDecl>> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(decls)
    }

    fn decl(&mut self) -> PResult<SurfaceDecl> {
        let span = self.span();
        if *self.peek() == Tok::Data {
            return self.data_decl();
        }
        let (name, _) = self.ident()?;
        match self.peek() {
            Tok::Colon => {
                self.bump();
                let level = self.opt_caret()?;
                let ty = self.term()?;
                Ok(SurfaceDecl::Sig { name, level, ty, span })
            }
            Tok::Equals => {
                self.bump();
                let body = self.term()?;
                Ok(SurfaceDecl::Def { name, body, span })
            }
            _ => self.error("`:` or `=`"),
        }
    }

    fn data_decl(&mut self) -> PResult<SurfaceDecl> {
        let span = self.expect(Tok::Data)?.span;
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        while *self.peek() == Tok::LParen {
            let pspan = self.bump().span;
            self.depth += 1;
            let (pname, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let level = self.opt_caret()?;
            let ty = self.term()?;
            self.expect(Tok::RParen)?;
            self.depth -= 1;
            params.push(SParam { name: pname, fixed: level.is_some(), level, ty, span: pspan });
        }
        self.expect(Tok::Colon)?;
        let level = self.opt_caret()?;
        let index_type = self.term()?;
        self.expect(Tok::Where)?;
        self.expect(Tok::LBrace)?;
        self.depth += 1;
        let mut ctors = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let (cname, cspan) = self.ident()?;
                self.expect(Tok::Colon)?;
                let clevel = self.opt_caret()?;
                let ty = self.term()?;
                ctors.push(SCtor { name: cname, level: clevel, ty, span: cspan });
                if *self.peek() == Tok::Semi {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        self.depth -= 1;
        Ok(SurfaceDecl::Data(SData { name, params, level, index_type, ctors, span }))
    }

    fn term(&mut self) -> PResult<STerm> {
        let span = self.span();
        if *self.peek() == Tok::Backslash {
            self.bump();
            let mut xs = vec![self.ident()?.0];
            while let Tok::Ident(x) = self.peek().clone() {
                self.bump();
                xs.push(x);
            }
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            return Ok(STerm::new(STermKind::Lam(xs, Box::new(body)), span));
        }
        let (app, binder) = self.app()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let cod = self.term()?;
            return Ok(match binder {
                Some(b) => STerm::new(STermKind::Pi(b.name, b.level, Box::new(b.ty), Box::new(cod)), b.span),
                None => STerm::new(STermKind::Arrow(Box::new(app), Box::new(cod)), span),
            });
        }
        match binder {
            Some(b) if b.level.is_some() => {
                Err(Diagnostic::new(ErrorCode::Parse, format!("expected `->` after the binder `({} :^..)`", b.name))
                    .at(Some(self.span())))
            }
            Some(b) => Ok(ascription(b)),
            None => Ok(app),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) => !(self.depth == 0 && matches!(self.peek_at(1), Tok::Colon | Tok::Equals)),
            Tok::Type | Tok::Void | Tok::Absurd | Tok::Case | Tok::LParen => true,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<(STerm, Option<Binder>)> {
        if !self.starts_atom() {
            return self.error("a term");
        }
        let (head, mut binder) = self.atom()?;
        let mut t = head;
        while self.starts_atom() {
            if let Some(b) = binder.take() {
                t = ascription_or_err(b, self)?;
            }
            let (arg, b) = self.atom()?;
            let arg = match b {
                Some(b) => ascription_or_err(b, self)?,
                None => arg,
            };
            let span = t.span;
            t = STerm::new(STermKind::App(Box::new(t), Box::new(arg)), span);
        }
        Ok((t, binder))
    }

    fn atom(&mut self) -> PResult<(STerm, Option<Binder>)> {
        let span = self.span();
        let t = match self.peek().clone() {
            Tok::Type => {
                self.bump();
                STerm::new(STermKind::Type, span)
            }
            Tok::Void => {
                self.bump();
                STerm::new(STermKind::Void, span)
            }
            Tok::Absurd => {
                self.bump();
                if !self.starts_atom() {
                    return self.error("an argument to `absurd`");
                }
                let (a, b) = self.atom()?;
                let a = match b {
                    Some(b) => ascription_or_err(b, self)?,
                    None => a,
                };
                STerm::new(STermKind::Absurd(Box::new(a)), span)
            }
            Tok::Case => {
                self.bump();
                self.depth += 1;
                let scrut = self.term()?;
                self.expect(Tok::Of)?;
                self.expect(Tok::LBrace)?;
                let mut branches = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        let (ctor, bspan) = self.ident()?;
                        let mut binders = Vec::new();
                        while let Tok::Ident(x) = self.peek().clone() {
                            self.bump();
                            binders.push(x);
                        }
                        self.expect(Tok::Arrow)?;
                        let body = self.term()?;
                        branches.push(SBranch { ctor, binders, body, span: bspan });
                        if *self.peek() == Tok::Semi {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace)?;
                self.depth -= 1;
                STerm::new(STermKind::Case(Box::new(scrut), branches), span)
            }
            Tok::Ident(x) => {
                self.bump();
                let disp = self.opt_caret()?;
                STerm::new(STermKind::Ident(x, disp), span)
            }
            Tok::LParen => {
                self.bump();
                self.depth += 1;
                let r = self.paren(span)?;
                self.depth -= 1;
                return Ok(r);
            }
            _ => return self.error("a term"),
        };
        Ok((t, None))
    }

    /// After `(`: a binder `(x :^j A)`, an ascription `(t : A)`, or a
    /// parenthesised term.
    fn paren(&mut self, span: Span) -> PResult<(STerm, Option<Binder>)> {
        if let (Tok::Ident(x), Tok::Colon) = (self.peek().clone(), self.peek_at(1).clone()) {
            let name_span = self.span();
            self.bump();
            self.bump();
            let level = self.opt_caret()?;
            let ty = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok((STerm::new(STermKind::Type, span), Some(Binder { name: x, name_span, level, ty, span })));
        }
        let t = self.term()?;
        let t = if *self.peek() == Tok::Colon {
            self.bump();
            let ty = self.term()?;
            STerm::new(STermKind::Ann(Box::new(t), Box::new(ty)), span)
        } else {
            t
        };
        self.expect(Tok::RParen)?;
        Ok((t, None))
    }
}

fn ascription(b: Binder) -> STerm {
    let var = STerm::new(STermKind::Ident(b.name, None), b.name_span);
    STerm::new(STermKind::Ann(Box::new(var), Box::new(b.ty)), b.span)
}

fn ascription_or_err(b: Binder, p: &Parser) -> PResult<STerm> {
    if b.level.is_some() {
        return Err(Diagnostic::new(
            ErrorCode::Parse,
            format!("a level-annotated binder `({} :^..)` must be followed by `->`", b.name),
        )
        .at(Some(p.span())));
    }
    Ok(ascription(b))
}
