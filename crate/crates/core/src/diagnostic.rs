//! Structured errors shared by every stage of the checker.

use std::fmt;

use serde::Serialize;

/// A position in a source file (1-based line and column).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Severity {
    #[serde(rename = "error")]
    Error,
    #[serde(rename = "warning")]
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Parse,
    Unbound,
    Mismatch,
    LevelUnsat,
    NotFunction,
    CannotInfer,
    NotData,
    Nonexhaustive,
    CtorArity,
    CtorResult,
    Unify,
    Stuck,
    Fuel,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Parse => "E-PARSE",
            ErrorCode::Unbound => "E-UNBOUND",
            ErrorCode::Mismatch => "E-MISMATCH",
            ErrorCode::LevelUnsat => "E-LEVEL-UNSAT",
            ErrorCode::NotFunction => "E-NOT-FUNCTION",
            ErrorCode::CannotInfer => "E-CANNOT-INFER",
            ErrorCode::NotData => "E-NOT-DATA",
            ErrorCode::Nonexhaustive => "E-NONEXHAUSTIVE",
            ErrorCode::CtorArity => "E-CTOR-ARITY",
            ErrorCode::CtorResult => "E-CTOR-RESULT",
            ErrorCode::Unify => "E-UNIFY",
            ErrorCode::Stuck => "E-STUCK",
            ErrorCode::Fuel => "E-FUEL",
        }
    }

    /// Parse errors exit with 2, everything else the checker reports exits with 1.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Parse => 2,
            _ => 1,
        }
    }

    /// Whether the failure comes from levels (unsatisfiable constraints or a
    /// conversion failure, which is how level clashes between displaced
    /// constants surface).
    pub fn is_level_related(self) -> bool {
        matches!(self, ErrorCode::LevelUnsat | ErrorCode::Mismatch)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: ErrorCode,
    pub file: Option<String>,
    pub span: Option<Span>,
    pub message: String,
    /// Constraint notes, one per line, in trace format.
    pub provenance: Vec<String>,
    /// The declaration being checked when the error arose.
    pub decl: Option<String>,
}

impl Diagnostic {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            file: None,
            span: None,
            message: message.into(),
            provenance: Vec::new(),
            decl: None,
        }
    }

    pub fn at(mut self, span: Option<Span>) -> Self {
        if self.span.is_none() {
            self.span = span;
        }
        self
    }

    pub fn in_file(mut self, file: &str) -> Self {
        if self.file.is_none() {
            self.file = Some(file.to_string());
        }
        self
    }

    pub fn with_provenance(mut self, notes: Vec<String>) -> Self {
        self.provenance = notes;
        self
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "severity": self.severity,
            "code": self.code,
            "file": self.file.clone().unwrap_or_default(),
            "line": self.span.map(|s| s.line).unwrap_or(0),
            "col": self.span.map(|s| s.col).unwrap_or(0),
            "message": self.message,
            "provenance": self.provenance,
        })
    }

    /// Human-readable rendering: `file:line:col: error[CODE]: message`, then
    /// one indented line per provenance note.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let file = self.file.as_deref().unwrap_or("<input>");
        match self.span {
            Some(sp) => out.push_str(&format!("{file}:{sp}: ")),
            None => out.push_str(&format!("{file}: ")),
        }
        out.push_str(&format!("{}[{}]: {}", self.severity, self.code, self.message));
        if let Some(d) = &self.decl {
            out.push_str(&format!(" (in {d})"));
        }
        for p in &self.provenance {
            out.push_str("\n    ");
            out.push_str(p);
        }
        out
    }
}
