//! Stratified type theory: a dependent type theory whose typing judgements
//! carry a level instead of a universe hierarchy.

pub mod context;
pub mod data;
pub mod diagnostic;
pub mod elab;
pub mod eval;
pub mod levels;
pub mod program;
pub mod proplab;
pub mod signature;
pub mod surface;
pub mod term;
pub mod typer;

pub use context::Context;
pub use diagnostic::{Diagnostic, ErrorCode, Severity, Span};
pub use eval::{equate, normalize, whnf, EvalError, Evaluator, DEFAULT_FUEL};
pub use levels::{check_assignment, solve_levels, Assignment, Constraint, Level, LevelExpr, MetaId, Provenance, Unsat};
pub use program::{check_data, check_def, check_program, check_source, CheckOptions, Checked, Report};
pub use signature::{CtorDecl, DataDecl, Definition, Global, Param, ParamKind, SigEntry, Signature};
pub use term::{Branch, Name, Term, TermKind};
pub use typer::{check_context, check_judgement, infer_judgement, Checker, ElabState};
