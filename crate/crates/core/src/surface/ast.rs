use crate::diagnostic::Span;
use crate::levels::Level;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct STerm {
    pub kind: STermKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum STermKind {
    Type,
    Void,
    /// A name with an optional explicit displacement.
    Ident(String, Option<Level>),
    /// `(x :^j A) -> B`; a missing level is inferred.
    Pi(String, Option<Level>, Box<STerm>, Box<STerm>),
    Arrow(Box<STerm>, Box<STerm>),
    Lam(Vec<String>, Box<STerm>),
    App(Box<STerm>, Box<STerm>),
    Absurd(Box<STerm>),
    Ann(Box<STerm>, Box<STerm>),
    Case(Box<STerm>, Vec<SBranch>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SBranch {
    pub ctor: String,
    pub binders: Vec<String>,
    pub body: STerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SParam {
    pub name: String,
    /// Written with a caret: a fixed parameter. Without one it floats.
    pub fixed: bool,
    /// The fixed level, when given.
    pub level: Option<Level>,
    pub ty: STerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SCtor {
    pub name: String,
    pub level: Option<Level>,
    pub ty: STerm,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SData {
    pub name: String,
    pub params: Vec<SParam>,
    pub level: Option<Level>,
    pub index_type: STerm,
    pub ctors: Vec<SCtor>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceDecl {
    Sig { name: String, level: Option<Level>, ty: STerm, span: Span },
    Def { name: String, body: STerm, span: Span },
    Data(SData),
}

impl SurfaceDecl {
    pub fn name(&self) -> &str {
        match self {
            SurfaceDecl::Sig { name, .. } | SurfaceDecl::Def { name, .. } => name,
            SurfaceDecl::Data(d) => &d.name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            SurfaceDecl::Sig { span, .. } | SurfaceDecl::Def { span, .. } => *span,
            SurfaceDecl::Data(d) => d.span,
        }
    }
}

impl STerm {
    pub fn new(kind: STermKind, span: Span) -> Self {
        STerm { kind, span }
    }

    /// Drop every level annotation and displacement, keeping structure.
    pub fn erase_levels(&self) -> STerm {
        let b = |t: &STerm| Box::new(t.erase_levels());
        let kind = match &self.kind {
            STermKind::Type => STermKind::Type,
            STermKind::Void => STermKind::Void,
            STermKind::Ident(x, _) => STermKind::Ident(x.clone(), None),
            STermKind::Pi(x, _, a, c) => STermKind::Pi(x.clone(), None, b(a), b(c)),
            STermKind::Arrow(a, c) => STermKind::Arrow(b(a), b(c)),
            STermKind::Lam(xs, c) => STermKind::Lam(xs.clone(), b(c)),
            STermKind::App(f, a) => STermKind::App(b(f), b(a)),
            STermKind::Absurd(a) => STermKind::Absurd(b(a)),
            STermKind::Ann(a, t) => STermKind::Ann(b(a), b(t)),
            STermKind::Case(s, brs) => STermKind::Case(
                b(s),
                brs.iter().map(|br| SBranch { body: br.body.erase_levels(), ..br.clone() }).collect(),
            ),
        };
        STerm { kind, span: self.span }
    }
}

impl SurfaceDecl {
    /// The declaration with every level and displacement annotation removed.
    /// Datatype parameters keep their fixed/floating kind, which is not a
    /// level annotation but a choice of binder.
    pub fn erase_levels(&self) -> SurfaceDecl {
        match self {
            SurfaceDecl::Sig { name, ty, span, .. } => {
                SurfaceDecl::Sig { name: name.clone(), level: None, ty: ty.erase_levels(), span: *span }
            }
            SurfaceDecl::Def { name, body, span } => {
                SurfaceDecl::Def { name: name.clone(), body: body.erase_levels(), span: *span }
            }
            SurfaceDecl::Data(d) => SurfaceDecl::Data(SData {
                name: d.name.clone(),
                params: d.params.iter().map(|p| SParam { level: None, ty: p.ty.erase_levels(), ..p.clone() }).collect(),
                level: None,
                index_type: d.index_type.erase_levels(),
                ctors: d.ctors.iter().map(|c| SCtor { level: None, ty: c.ty.erase_levels(), ..c.clone() }).collect(),
                span: d.span,
            }),
        }
    }
}
