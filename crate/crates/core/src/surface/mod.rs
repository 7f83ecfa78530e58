//! Concrete syntax: lexer, parser and printer.
//!
//! ```text
//! program ::= decl*                        -- comments run from `--` to end of line
//! decl    ::= IDENT ":" ["^" NAT] term
//!           | IDENT "=" term
//!           | "data" IDENT param* ":" ["^" NAT] term "where" "{" ctor (";" ctor)* "}"
//! param   ::= "(" IDENT ":" ["^" NAT] term ")"    -- caret: fixed, none: floating
//! ctor    ::= IDENT ":" ["^" NAT] term
//! term    ::= "\" IDENT+ "." term
//!           | "(" IDENT ":" ["^" NAT] term ")" "->" term
//!           | app "->" term
//!           | app
//! app     ::= atom+
//! atom    ::= "Type" | "Void" | "absurd" atom | IDENT ["^" NAT]
//!           | "case" term "of" "{" branch (";" branch)* "}"
//!           | "(" term ")" | "(" term ":" term ")"
//! branch  ::= IDENT IDENT* "->" term
//! ```
//!
//! Declarations are not separated by punctuation: at the outermost nesting
//! level an identifier followed by `:` or `=` begins a new declaration.

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use lexer::{lex, Tok, Token};
pub use parser::{parse_program, parse_term};
pub use printer::{print_data, print_definition, print_entry, print_signature, print_term};
