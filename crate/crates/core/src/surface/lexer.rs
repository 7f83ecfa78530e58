use crate::diagnostic::{Diagnostic, ErrorCode, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u32),
    Colon,
    Caret,
    Equals,
    Arrow,
    Backslash,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Type,
    Void,
    Absurd,
    Case,
    Of,
    Data,
    Where,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(x) => format!("identifier `{x}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Colon => ":",
            Tok::Caret => "^",
            Tok::Equals => "=",
            Tok::Arrow => "->",
            Tok::Backslash => "\\",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Semi => ";",
            Tok::Type => "Type",
            Tok::Void => "Void",
            Tok::Absurd => "absurd",
            Tok::Case => "case",
            Tok::Of => "of",
            Tok::Data => "data",
            Tok::Where => "where",
            Tok::Ident(_) | Tok::Nat(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let next = chars.get(i + 1).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && next == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = if c == '-' && next == Some('>') {
            (Tok::Arrow, 2)
        } else if is_ident_start(c) {
            let start = i;
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = match word.as_str() {
                "Type" => Tok::Type,
                "Void" => Tok::Void,
                "absurd" => Tok::Absurd,
                "case" => Tok::Case,
                "of" => Tok::Of,
                "data" => Tok::Data,
                "where" => Tok::Where,
                _ => Tok::Ident(word),
            };
            (tok, j - start)
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[start..j].iter().collect();
            let n = digits.parse::<u32>().map_err(|_| {
                Diagnostic::new(ErrorCode::Parse, format!("number `{digits}` is too large")).at(Some(span))
            })?;
            (Tok::Nat(n), j - start)
        } else {
            let tok = match c {
                ':' => Tok::Colon,
                '^' => Tok::Caret,
                '=' => Tok::Equals,
                '\\' => Tok::Backslash,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ';' => Tok::Semi,
                _ => {
                    return Err(Diagnostic::new(ErrorCode::Parse, format!("unexpected character `{c}`")).at(Some(span)))
                }
            };
            (tok, 1)
        };
        out.push(Token { tok, span });
        i += len;
        col += len as u32;
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col) });
    Ok(out)
}
