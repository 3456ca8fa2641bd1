//! Tokenizer and recursive-descent parser for metric expressions.
//!
//! Grammar (whitespace-insensitive, `*` mandatory):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | var | func '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use thiserror::Error;

use super::expr::{BinOp, Expr, Func};
use crate::jet::Var;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("variable `{name}` is out of range for dimension {dim}")]
    VariableOutOfRange { name: String, dim: usize },
    #[error("missing `{0}` declaration")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Gt,
    Ge,
    Lt,
    Le,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ne => "!=",
        }
    }

    /// Whether `lhs - rhs = margin` satisfies the relation.
    pub fn holds(self, margin: f64) -> bool {
        match self {
            CmpOp::Gt => margin > 0.0,
            CmpOp::Ge => margin >= 0.0,
            CmpOp::Lt => margin < 0.0,
            CmpOp::Le => margin <= 0.0,
            CmpOp::Ne => margin != 0.0,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Cmp(CmpOp),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::Cmp(c) => write!(f, "`{c}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, msg: String| ParseError::new(line, col0 + i, ParseErrorKind::Syntax(msg));
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| err(start, format!("malformed number `{text}`")))?;
            out.push(Token {
                tok: Tok::Num(v),
                col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match c {
            '+' => (Tok::Op('+'), 1),
            '-' | '\u{2212}' => (Tok::Op('-'), 1),
            '*' | '\u{00d7}' | '\u{00b7}' => (Tok::Op('*'), 1),
            '/' | '\u{00f7}' => (Tok::Op('/'), 1),
            '^' => (Tok::Op('^'), 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '>' if next == Some('=') => (Tok::Cmp(CmpOp::Ge), 2),
            '<' if next == Some('=') => (Tok::Cmp(CmpOp::Le), 2),
            '!' if next == Some('=') => (Tok::Cmp(CmpOp::Ne), 2),
            '>' => (Tok::Cmp(CmpOp::Gt), 1),
            '<' => (Tok::Cmp(CmpOp::Lt), 1),
            '\u{2265}' => (Tok::Cmp(CmpOp::Ge), 1),
            '\u{2264}' => (Tok::Cmp(CmpOp::Le), 1),
            '\u{2260}' => (Tok::Cmp(CmpOp::Ne), 1),
            _ => return Err(err(i, format!("unexpected character `{c}`"))),
        };
        out.push(Token { tok, col });
        i += width;
    }
    out.push(Token {
        tok: Tok::End,
        col: col0 + chars.len(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.line, self.toks[self.pos].col, kind)
    }

    /// Error for a missing operand. At end of input the blame goes to the
    /// operator left dangling before it.
    fn expected_operand(&self) -> ParseError {
        if self.pos > 0 && *self.peek() == Tok::End {
            let prev = &self.toks[self.pos - 1];
            return ParseError::new(
                self.line,
                prev.col,
                ParseErrorKind::Syntax(format!("expected an operand after {}", prev.tok)),
            );
        }
        self.error_here(ParseErrorKind::Syntax(format!(
            "expected an operand, found {}",
            self.peek()
        )))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let col = self.toks[self.pos].col;
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.error_here(ParseErrorKind::Syntax(format!(
                            "expected `(` after function `{name}`"
                        ))));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                self.variable(&name, col).map(Expr::Var)
            }
            _ => Err(self.expected_operand()),
        }
    }

    fn variable(&self, name: &str, col: usize) -> Result<Var, ParseError> {
        let unknown = || {
            ParseError::new(
                self.line,
                col,
                ParseErrorKind::UnknownIdentifier(name.to_string()),
            )
        };
        let (group, digits) = name.split_at(1);
        if digits.is_empty()
            || !digits.chars().all(|c| c.is_ascii_digit())
            || digits.starts_with('0')
        {
            return Err(unknown());
        }
        let idx: usize = digits.parse().map_err(|_| unknown())?;
        if idx > self.dim {
            return Err(ParseError::new(
                self.line,
                col,
                ParseErrorKind::VariableOutOfRange {
                    name: name.to_string(),
                    dim: self.dim,
                },
            ));
        }
        match group {
            "x" => Ok(Var::X(idx - 1)),
            "y" => Ok(Var::Y(idx - 1)),
            _ => Err(unknown()),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(());
        }
        Err(self.error_here(ParseErrorKind::Syntax(format!(
            "expected `)`, found {}",
            self.peek()
        ))))
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            return Ok(());
        }
        Err(self.error_here(ParseErrorKind::Syntax(format!(
            "unexpected {}",
            self.peek()
        ))))
    }
}

/// Parses an expression over `dim` coordinates. `line`/`col0` locate the
/// text inside the enclosing file for error messages (both 1-based).
pub fn parse_expr_at(src: &str, dim: usize, line: usize, col0: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src, line, col0)?,
        pos: 0,
        line,
        dim,
    };
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

pub fn parse_expr(src: &str, dim: usize) -> Result<Expr, ParseError> {
    parse_expr_at(src, dim, 1, 1)
}

/// Parses `lhs op rhs` with `op` one of `> >= < <= !=`.
pub fn parse_relation_at(
    src: &str,
    dim: usize,
    line: usize,
    col0: usize,
) -> Result<(Expr, CmpOp, Expr), ParseError> {
    let mut p = Parser {
        toks: lex(src, line, col0)?,
        pos: 0,
        line,
        dim,
    };
    let lhs = p.expr()?;
    let op = match p.peek() {
        Tok::Cmp(op) => *op,
        other => {
            let msg = format!("expected a comparison (>, >=, <, <=, !=), found {other}");
            return Err(p.error_here(ParseErrorKind::Syntax(msg)));
        }
    };
    p.bump();
    let rhs = p.expr()?;
    p.expect_end()?;
    Ok((lhs, op, rhs))
}
