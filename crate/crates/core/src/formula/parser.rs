//! Pratt parser for formula text.
//!
//! Lexing is driven by the parser because `/` is ambiguous: in operator
//! position it divides, in operand position it starts a page reference
//! (`/page/a4`, `/some/page/[a1 > 44]/b7`).

use std::fmt;

use thiserror::Error;

use super::ast::*;
use crate::addr::split_a1;
use crate::path::valid_segment;
use crate::stdlib;
use crate::value::ErrorKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.message, self.position)
    }
}

type PResult<T> = Result<T, ParseError>;

const UNARY_BP: u8 = 11;
const PERCENT_BP: u8 = 13;

/// Parses a formula. The source must start with `=`.
pub fn parse(source: &str) -> PResult<Expr> {
    let Some(body) = source.strip_prefix('=') else {
        return Err(ParseError { position: 0, message: "formula must start with `=`".into() });
    };
    let mut p = Parser { src: body, pos: 0, offset: 1, predicate: false };
    p.parse_all()
}

/// Parses the text between the brackets of a z-segment. Page references,
/// z-references and volatile functions are rejected.
pub fn parse_predicate(source: &str) -> PResult<Expr> {
    let mut p = Parser { src: source, pos: 0, offset: 0, predicate: true };
    p.parse_all()
}

struct Parser<'s> {
    src: &'s str,
    pos: usize,
    /// Added to `pos` when reporting errors (nested predicate sources).
    offset: usize,
    predicate: bool,
}

fn is_name_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'$' | b'-')
}

fn valid_function_name(name: &str) -> bool {
    let mut parts = name.split('.');
    let first = parts.next().unwrap_or("");
    let head_ok = first.starts_with(|c: char| c.is_ascii_lowercase())
        && first.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_');
    head_ok
        && parts.all(|p| {
            p.starts_with(|c: char| c.is_ascii_lowercase() || c.is_ascii_digit())
                && p.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        })
}

impl<'s> Parser<'s> {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { position: self.pos + self.offset, message: message.into() })
    }

    fn err_at<T>(&self, pos: usize, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { position: pos + self.offset, message: message.into() })
    }

    fn rest(&self) -> &'s str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.as_bytes().get(self.pos + n).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn parse_all(&mut self) -> PResult<Expr> {
        let e = self.parse_expr(0)?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return self.err(format!("unexpected `{}`", &self.rest()[..self.rest().chars().next().map_or(0, char::len_utf8)]));
        }
        Ok(e)
    }

    fn peek_binop(&self) -> Option<(BinaryOp, usize)> {
        let r = self.rest().as_bytes();
        let two = |a: u8, b: u8| r.len() >= 2 && r[0] == a && r[1] == b;
        if two(b'<', b'=') {
            return Some((BinaryOp::Le, 2));
        }
        if two(b'>', b'=') {
            return Some((BinaryOp::Ge, 2));
        }
        if two(b'<', b'>') {
            return Some((BinaryOp::Ne, 2));
        }
        let op = match r.first()? {
            b'+' => BinaryOp::Add,
            b'-' => BinaryOp::Sub,
            b'*' => BinaryOp::Mul,
            b'/' => BinaryOp::Div,
            b'^' => BinaryOp::Pow,
            b'&' => BinaryOp::Concat,
            b'=' => BinaryOp::Eq,
            b'<' => BinaryOp::Lt,
            b'>' => BinaryOp::Gt,
            _ => return None,
        };
        Some((op, 1))
    }

    fn parse_expr(&mut self, min_bp: u8) -> PResult<Expr> {
        let mut lhs = self.parse_prefix()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'%') {
                if PERCENT_BP < min_bp {
                    break;
                }
                self.pos += 1;
                lhs = Expr::Percent(Box::new(lhs));
                continue;
            }
            let Some((op, len)) = self.peek_binop() else { break };
            let p = op.precedence();
            let (l_bp, r_bp) = (2 * p - 1, 2 * p);
            if l_bp < min_bp {
                break;
            }
            self.pos += len;
            let rhs = self.parse_expr(r_bp)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> PResult<Expr> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return self.err("unexpected end of formula");
        };
        match c {
            b'-' | b'+' => {
                self.pos += 1;
                let expr = self.parse_expr(UNARY_BP)?;
                let op = if c == b'-' { UnaryOp::Neg } else { UnaryOp::Plus };
                Ok(Expr::Unary { op, expr: Box::new(expr) })
            }
            b'(' => {
                self.pos += 1;
                let e = self.parse_expr(0)?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            b'"' => self.parse_string().map(Expr::Text),
            b'0'..=b'9' => self.parse_number(),
            b'.' if self.peek_at(1).is_some_and(|b| b.is_ascii_digit()) => self.parse_number(),
            b'.' => self.parse_slash_ref(),
            b'/' => self.parse_slash_ref(),
            b'!' => self.parse_bang_ref(),
            b'#' => self.parse_error_literal(),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' | b'$' => self.parse_name(),
            _ => self.err(format!("unexpected `{}`", self.rest().chars().next().unwrap())),
        }
    }

    fn parse_string(&mut self) -> PResult<String> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            let rest = self.rest();
            let Some(i) = rest.find('"') else {
                return self.err_at(start, "unterminated string");
            };
            out.push_str(&rest[..i]);
            self.pos += i + 1;
            if self.peek() == Some(b'"') {
                out.push('"');
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn parse_number(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let b = self.src.as_bytes();
        let mut i = self.pos;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i < b.len() && b[i] == b'.' {
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < b.len() && matches!(b[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < b.len() && matches!(b[j], b'+' | b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        match self.src[start..i].parse::<f64>() {
            Ok(n) if n.is_finite() => Ok(Expr::Number(n)),
            _ => self.err_at(start, "number out of range"),
        }
    }

    fn parse_error_literal(&mut self) -> PResult<Expr> {
        let rest = self.rest();
        for kind in ErrorKind::ALL {
            let s = kind.as_str();
            if rest.len() >= s.len() && rest[..s.len()].eq_ignore_ascii_case(s) {
                self.pos += s.len();
                return Ok(Expr::Error(kind));
            }
        }
        self.err("unknown error literal")
    }

    /// Reads `$?letters$?digits` at the cursor.
    fn lex_a1(&mut self) -> PResult<A1> {
        let start = self.pos;
        let b = self.src.as_bytes();
        let mut i = self.pos;
        if i < b.len() && b[i] == b'$' {
            i += 1;
        }
        while i < b.len() && b[i].is_ascii_alphabetic() {
            i += 1;
        }
        if i < b.len() && b[i] == b'$' {
            i += 1;
        }
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        match split_a1(&self.src[start..i]) {
            Some((col, col_abs, row, row_abs)) => {
                self.pos = i;
                Ok(A1 { col, row, col_abs, row_abs })
            }
            None => self.err_at(start, "expected a cell reference"),
        }
    }

    /// After a cell, an optional `:cell` turns it into a range.
    fn lex_cell_or_range(&mut self) -> PResult<(A1, Option<A1>)> {
        let a = self.lex_a1()?;
        if self.peek() == Some(b':') {
            self.pos += 1;
            let b = self.lex_a1()?;
            Ok((a, Some(b)))
        } else {
            Ok((a, None))
        }
    }

    fn parse_name(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let b = self.src.as_bytes();
        let mut i = self.pos;
        while i < b.len() && (b[i].is_ascii_alphanumeric() || matches!(b[i], b'_' | b'.' | b'$')) {
            i += 1;
        }
        let word = &self.src[start..i];
        if b.get(i) == Some(&b'(') {
            let name = word.to_ascii_lowercase();
            if !valid_function_name(&name) {
                return self.err_at(start, format!("invalid function name `{word}`"));
            }
            if self.predicate && stdlib::is_volatile(&name) {
                return self.err_at(start, format!("volatile function `{name}` is not allowed in a predicate"));
            }
            self.pos = i + 1;
            let args = self.parse_args()?;
            return Ok(Expr::Call { name, args });
        }
        if word.eq_ignore_ascii_case("true") {
            self.pos = i;
            return Ok(Expr::Bool(true));
        }
        if word.eq_ignore_ascii_case("false") {
            self.pos = i;
            return Ok(Expr::Bool(false));
        }
        if split_a1(word).is_some() {
            let (a, b) = self.lex_cell_or_range()?;
            return Ok(match b {
                None => Expr::Cell(CellRef { page: PageRef::Local, cell: a }),
                Some(b) => Expr::Range(RangeRef { page: PageRef::Local, start: a, end: b }),
            });
        }
        self.err_at(start, format!("unknown name `{word}`"))
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr(0)?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(args);
                }
                _ => return self.err("expected `,` or `)`"),
            }
        }
    }

    fn reject_in_predicate(&self) -> PResult<()> {
        if self.predicate {
            self.err("page references are not allowed in a predicate")
        } else {
            Ok(())
        }
    }

    /// Reads a bracketed z-segment body, honouring string quoting.
    fn read_bracket(&mut self) -> PResult<(&'s str, usize)> {
        let open = self.pos;
        let b = self.src.as_bytes();
        let mut i = open + 1;
        let mut in_str = false;
        while i < b.len() {
            match b[i] {
                b'"' => in_str = !in_str,
                b'[' if !in_str => return self.err_at(i, "z-segments may not nest"),
                b']' if !in_str => {
                    self.pos = i + 1;
                    return Ok((&self.src[open + 1..i], open + 1));
                }
                _ => {}
            }
            i += 1;
        }
        self.err_at(open, "unterminated `[`")
    }

    fn parse_slash_ref(&mut self) -> PResult<Expr> {
        self.reject_in_predicate()?;
        let start = self.pos;
        let absolute = self.peek() == Some(b'/');
        let mut up = 0;
        if absolute {
            self.pos += 1;
        } else {
            loop {
                if self.rest().starts_with("./") {
                    self.pos += 2;
                } else if self.rest().starts_with("../") {
                    self.pos += 3;
                    up += 1;
                } else {
                    break;
                }
            }
            if self.pos == start {
                return self.err("expected `./` or `../`");
            }
        }

        let mut segments: Vec<ZSegment> = Vec::new();
        let mut has_predicate = false;
        let (first, second) = loop {
            if self.peek() == Some(b'[') {
                let (inner, inner_at) = self.read_bracket()?;
                let mut sub = Parser {
                    src: inner,
                    pos: 0,
                    offset: self.offset + inner_at,
                    predicate: true,
                };
                let pred = sub.parse_all()?;
                if self.peek() != Some(b'/') {
                    return self.err("expected `/` after z-segment");
                }
                self.pos += 1;
                segments.push(ZSegment::Predicate(Box::new(pred)));
                has_predicate = true;
                continue;
            }
            let seg_start = self.pos;
            let b = self.src.as_bytes();
            let mut i = self.pos;
            while i < b.len() && is_name_char(b[i]) {
                i += 1;
            }
            if i == seg_start {
                return self.err("expected a page segment or cell reference");
            }
            if b.get(i) == Some(&b'/') {
                let seg = self.src[seg_start..i].to_ascii_lowercase();
                if !valid_segment(&seg) {
                    return self.err_at(seg_start, format!("illegal page segment `{seg}`"));
                }
                self.pos = i + 1;
                segments.push(ZSegment::Literal(seg));
                continue;
            }
            break self.lex_cell_or_range()?;
        };

        if has_predicate {
            let anchor = if absolute { ZAnchor::Root } else { ZAnchor::Relative { up } };
            let target = match second {
                None => ZTarget::Cell(first),
                Some(b) => ZTarget::Range(first, b),
            };
            return Ok(Expr::ZRef(ZRef { anchor, segments, target }));
        }
        let names: Vec<String> = segments
            .into_iter()
            .map(|s| match s {
                ZSegment::Literal(n) => n,
                ZSegment::Predicate(_) => unreachable!(),
            })
            .collect();
        let page = if absolute {
            if names.is_empty() {
                return self.err_at(start, "a root-absolute reference needs at least one page segment");
            }
            PageRef::RootAbsolute(names)
        } else {
            PageRef::BaseRelative { up, segments: names }
        };
        Ok(match second {
            None => Expr::Cell(CellRef { page, cell: first }),
            Some(b) => Expr::Range(RangeRef { page, start: first, end: b }),
        })
    }

    fn parse_bang_ref(&mut self) -> PResult<Expr> {
        self.reject_in_predicate()?;
        let start = self.pos;
        self.pos += 1;
        let mut names = Vec::new();
        let (first, second) = loop {
            let seg_start = self.pos;
            let b = self.src.as_bytes();
            let mut i = self.pos;
            while i < b.len() && is_name_char(b[i]) {
                i += 1;
            }
            if i == seg_start {
                return self.err("expected a page name or cell reference");
            }
            if b.get(i) == Some(&b'!') {
                let seg = self.src[seg_start..i].to_ascii_lowercase();
                if !valid_segment(&seg) {
                    return self.err_at(seg_start, format!("illegal page segment `{seg}`"));
                }
                names.push(seg);
                self.pos = i + 1;
                continue;
            }
            break self.lex_cell_or_range()?;
        };
        if names.is_empty() {
            return self.err_at(start, "a bang reference needs a page name");
        }
        let page = PageRef::Bang(names);
        Ok(match second {
            None => Expr::Cell(CellRef { page, cell: first }),
            Some(b) => Expr::Range(RangeRef { page, start: first, end: b }),
        })
    }
}
