//! Recursive-descent parser for the SQL subset.
//!
//! ```text
//! query   := "SELECT" select ["WHERE" cond]
//! select  := term [("+" | "-") term]
//! term    := IDENT | AGG "(" IDENT ")"
//! cond    := conj ("OR" conj)*
//! conj    := atom ("AND" atom)*
//! atom    := "(" cond ")" | IDENT "IN" "(" query ")" | IDENT CMP value
//! value   := ["-"] NUMBER | STRING
//! AGG     := "COUNT" | "SUM" | "AVG" | "MAX" | "MIN"
//! CMP     := "=" | "!=" | "<>" | ">" | "<" | ">=" | "<="
//! ```
//!
//! Keywords are uppercase; identifiers are any other `[A-Za-z_][A-Za-z0-9_]*`
//! word. Strings are single-quoted with `''` as the escaped quote.

use std::fmt;

use thiserror::Error;

use super::ast::{AggFn, ArithOp, CmpOp, Condition, SelectExpr, SqlQuery, Value};
use super::number::Number;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kw {
    Select,
    Where,
    And,
    Or,
    In,
    Agg(AggFn),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Kw(Kw),
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    Plus,
    Minus,
    Cmp(CmpOp),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Kw(Kw::Select) => f.write_str("SELECT"),
            Tok::Kw(Kw::Where) => f.write_str("WHERE"),
            Tok::Kw(Kw::And) => f.write_str("AND"),
            Tok::Kw(Kw::Or) => f.write_str("OR"),
            Tok::Kw(Kw::In) => f.write_str("IN"),
            Tok::Kw(Kw::Agg(a)) => f.write_str(a.keyword()),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number {s}"),
            Tok::Str(s) => write!(f, "string '{s}'"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn keyword(word: &str) -> Option<Kw> {
    Some(match word {
        "SELECT" => Kw::Select,
        "WHERE" => Kw::Where,
        "AND" => Kw::And,
        "OR" => Kw::Or,
        "IN" => Kw::In,
        _ => return AggFn::ALL.iter().find(|a| a.keyword() == word).map(|a| Kw::Agg(*a)),
    })
}

/// Reserved words of the subset.
pub const RESERVED_WORDS: [&str; 10] = ["SELECT", "WHERE", "AND", "OR", "IN", "COUNT", "SUM", "AVG", "MAX", "MIN"];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let fail = |offset: usize, expected: &str| ParseError {
        offset,
        expected: vec![expected.to_string()],
        found: text[offset..].chars().next().map_or("end of input".into(), |c| format!("`{c}`")),
    };
    while i < bytes.len() {
        let start = i;
        let b = bytes[i];
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'+' => {
                i += 1;
                Tok::Plus
            }
            b'-' => {
                i += 1;
                Tok::Minus
            }
            b'=' => {
                i += 1;
                Tok::Cmp(CmpOp::Eq)
            }
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 2;
                Tok::Cmp(CmpOp::Ne)
            }
            b'<' | b'>' => {
                let next = bytes.get(i + 1).copied();
                let (op, len) = match (b, next) {
                    (b'<', Some(b'=')) => (CmpOp::Le, 2),
                    (b'<', Some(b'>')) => (CmpOp::Ne, 2),
                    (b'>', Some(b'=')) => (CmpOp::Ge, 2),
                    (b'<', _) => (CmpOp::Lt, 1),
                    _ => (CmpOp::Gt, 1),
                };
                i += len;
                Tok::Cmp(op)
            }
            b'\'' => {
                i += 1;
                let mut s = String::new();
                loop {
                    let rest = &text[i..];
                    let Some(q) = rest.find('\'') else {
                        return Err(fail(text.len(), "closing `'`"));
                    };
                    s.push_str(&rest[..q]);
                    i += q + 1;
                    if bytes.get(i) == Some(&b'\'') {
                        s.push('\'');
                        i += 1;
                    } else {
                        break;
                    }
                }
                Tok::Str(s)
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                Tok::Number(text[start..i].to_string())
            }
            b if b.is_ascii_alphabetic() || b == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                keyword(word).map_or_else(|| Tok::Ident(word.to_string()), Tok::Kw)
            }
            _ => return Err(fail(start, "token")),
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (offset, tok) = &self.toks[self.pos];
        ParseError {
            offset: *offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(_) => match self.bump() {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.error(&["column name"])),
        }
    }

    fn query(&mut self) -> Result<SqlQuery, ParseError> {
        self.expect(Tok::Kw(Kw::Select), "SELECT")?;
        let left = self.term()?;
        let select = match self.peek() {
            Tok::Plus | Tok::Minus => {
                let op = if self.bump() == Tok::Plus { ArithOp::Add } else { ArithOp::Sub };
                SelectExpr::arith(op, left, self.term()?)
            }
            _ => left,
        };
        let filter = if *self.peek() == Tok::Kw(Kw::Where) {
            self.bump();
            Some(self.cond()?)
        } else {
            None
        };
        Ok(SqlQuery { select, filter })
    }

    fn term(&mut self) -> Result<SelectExpr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(_) => Ok(SelectExpr::Col(self.ident()?)),
            Tok::Kw(Kw::Agg(func)) => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let col = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(SelectExpr::Agg(func, col))
            }
            _ => Err(self.error(&["column name", "aggregate"])),
        }
    }

    fn cond(&mut self) -> Result<Condition, ParseError> {
        let mut c = self.conj()?;
        while *self.peek() == Tok::Kw(Kw::Or) {
            self.bump();
            c = c.or(self.conj()?);
        }
        Ok(c)
    }

    fn conj(&mut self) -> Result<Condition, ParseError> {
        let mut c = self.atom()?;
        while *self.peek() == Tok::Kw(Kw::And) {
            self.bump();
            c = c.and(self.atom()?);
        }
        Ok(c)
    }

    fn atom(&mut self) -> Result<Condition, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let c = self.cond()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(c);
        }
        let col = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return Err(self.error(&["column name", "`(`"])),
        };
        match self.peek().clone() {
            Tok::Kw(Kw::In) => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let sub = self.query()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Condition::in_subquery(col, sub))
            }
            Tok::Cmp(op) => {
                self.bump();
                Ok(Condition::Cmp { col, op, value: self.value()? })
            }
            _ => Err(self.error(&["comparison operator", "IN"])),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Number(digits) => {
                self.bump();
                let text = if negative { format!("-{digits}") } else { digits };
                let n: Number = text.parse().expect("lexer only produces decimal digits");
                Ok(Value::Number(n))
            }
            Tok::Str(s) if !negative => {
                self.bump();
                Ok(Value::Text(s))
            }
            _ => Err(self.error(if negative { &["number"] } else { &["number", "string"] })),
        }
    }
}

pub fn parse_sql(text: &str) -> Result<SqlQuery, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let q = p.query()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input", "WHERE", "AND", "OR"]));
    }
    Ok(q)
}
