use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{BinOp, Constant, Exponent, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    /// A tangent variable inside a map definition.
    TangentVariableInMap(String),
    /// `abs` and friends: not smooth, so not accepted.
    RejectedFunction(String),
    /// The exponent of `^` is not a constant.
    NonConstantExponent,
    /// The exponent of `^` is a constant but not an integer or a ratio of integers.
    RealExponent(String),
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    InvalidDimension(i64),
    MissingKey(&'static str),
    DuplicateKey(String),
    UnknownKey(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownIdentifier(id) => write!(f, "unknown identifier `{id}`"),
            ParseErrorKind::TangentVariableInMap(id) => {
                write!(f, "`{id}`: maps are functions of x1..xn only")
            }
            ParseErrorKind::RejectedFunction(name) => {
                write!(f, "`{name}` is not smooth and is not supported")
            }
            ParseErrorKind::NonConstantExponent => {
                f.write_str("exponent must be an integer or a parenthesized ratio of integers")
            }
            ParseErrorKind::RealExponent(text) => {
                write!(f, "real exponent `{text}` is not supported; write a ratio like (1/2)")
            }
            ParseErrorKind::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected} components, found {found}")
            }
            ParseErrorKind::InvalidDimension(d) => write!(f, "dimension {d} outside 2..=6"),
            ParseErrorKind::MissingKey(k) => write!(f, "missing key `{k}`"),
            ParseErrorKind::DuplicateKey(k) => write!(f, "duplicate key `{k}`"),
            ParseErrorKind::UnknownKey(k) => write!(f, "unknown key `{k}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, text: String, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::CharIndices<'a>>,
    src: &'a str,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, (usize, ParseErrorKind)> {
    let mut lx = Lexer {
        chars: src.char_indices().peekable(),
        src,
    };
    let mut out = Vec::new();
    // columns are 0-based char offsets here; callers shift them.
    let col_of = |byte: usize| src[..byte].chars().count();
    while let Some(&(start, c)) = lx.chars.peek() {
        let col = col_of(start);
        let tok = match c {
            ' ' | '\t' | '\r' | '\n' => {
                lx.chars.next();
                continue;
            }
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                out.push((lx.number(start).map_err(|k| (col, k))?, col));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start;
                while let Some(&(i, c)) = lx.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = i + c.len_utf8();
                        lx.chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(src[start..end].to_string()), col));
                continue;
            }
            other => {
                return Err((
                    col,
                    ParseErrorKind::Syntax(alloc::format!("unexpected character `{other}`")),
                ));
            }
        };
        lx.chars.next();
        out.push((tok, col));
    }
    out.push((Tok::End, col_of(src.len())));
    Ok(out)
}

impl Lexer<'_> {
    fn number(&mut self, start: usize) -> Result<Tok, ParseErrorKind> {
        let mut end = start;
        let mut integer = true;
        let mut seen_dot = false;
        while let Some(&(i, c)) = self.chars.peek() {
            if c.is_ascii_digit() {
                end = i + 1;
                self.chars.next();
            } else if c == '.' && !seen_dot {
                seen_dot = true;
                integer = false;
                end = i + 1;
                self.chars.next();
            } else {
                break;
            }
        }
        // exponent part only when followed by a digit (optionally signed)
        if let Some(&(i, 'e' | 'E')) = self.chars.peek() {
            let rest = &self.src[i + 1..];
            let sign = usize::from(rest.starts_with(['+', '-']));
            if rest[sign..].starts_with(|c: char| c.is_ascii_digit()) {
                integer = false;
                self.chars.next();
                if sign == 1 {
                    self.chars.next();
                }
                end = i + 1 + sign;
                while let Some(&(j, c)) = self.chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    end = j + 1;
                    self.chars.next();
                }
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text
            .parse()
            .map_err(|_| ParseErrorKind::Syntax(alloc::format!("malformed number `{text}`")))?;
        Ok(Tok::Num {
            value,
            text: text.to_string(),
            integer,
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    allow_tangent: bool,
}

type PResult<T> = Result<T, (usize, ParseErrorKind)>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: &str) -> PResult<T> {
        Err((self.col(), ParseErrorKind::Syntax(msg.to_string())))
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.syntax(&alloc::format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp = self.exponent()?;
        if *self.peek() == Tok::Caret {
            return self.syntax("chained `^`; parenthesize the base");
        }
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn integer(&mut self) -> PResult<Option<i64>> {
        match self.peek().clone() {
            Tok::Num {
                integer: true, text, ..
            } => {
                let col = self.col();
                self.bump();
                text.parse().map(Some).map_err(|_| {
                    (
                        col,
                        ParseErrorKind::Syntax(alloc::format!("exponent `{text}` too large")),
                    )
                })
            }
            Tok::Num { text, .. } => Err((self.col(), ParseErrorKind::RealExponent(text))),
            _ => Ok(None),
        }
    }

    fn exponent(&mut self) -> PResult<Exponent> {
        let col = self.col();
        let negate = |neg: bool, n: i64| if neg { -n } else { n };
        match self.peek() {
            Tok::Num { .. } | Tok::Minus => {
                let neg = *self.peek() == Tok::Minus;
                if neg {
                    self.bump();
                }
                match self.integer()? {
                    Some(n) => Ok(Exponent::integer(negate(neg, n))),
                    None => Err((col, ParseErrorKind::NonConstantExponent)),
                }
            }
            Tok::LParen => {
                self.bump();
                let neg = *self.peek() == Tok::Minus;
                if neg {
                    self.bump();
                }
                let Some(num) = self.integer()? else {
                    return Err((col, ParseErrorKind::NonConstantExponent));
                };
                let den = if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.integer()? {
                        Some(d) => d,
                        None => return Err((col, ParseErrorKind::NonConstantExponent)),
                    }
                } else {
                    1
                };
                if *self.peek() != Tok::RParen {
                    return Err((col, ParseErrorKind::NonConstantExponent));
                }
                self.bump();
                Exponent::new(negate(neg, num), den)
                    .ok_or((col, ParseErrorKind::Syntax("zero denominator in exponent".to_string())))
            }
            _ => Err((col, ParseErrorKind::NonConstantExponent)),
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let col = self.col();
        match self.bump() {
            Tok::Num { value, .. } => Ok(Expr::Num(value)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = match Func::from_name(&name) {
                        Some(f) => f,
                        None if name == "abs" => return Err((col, ParseErrorKind::RejectedFunction(name))),
                        None => return Err((col, ParseErrorKind::UnknownIdentifier(name))),
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)` after function argument")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                self.identifier(name, col)
            }
            Tok::End => Err((col, ParseErrorKind::Syntax("unexpected end of expression".to_string()))),
            other => Err((
                col,
                ParseErrorKind::Syntax(alloc::format!("unexpected token {other:?}")),
            )),
        }
    }

    fn identifier(&self, name: String, col: usize) -> PResult<Expr> {
        match name.as_str() {
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "e" => return Ok(Expr::Const(Constant::E)),
            _ => {}
        }
        if Func::from_name(&name).is_some() || name == "abs" {
            return Err((
                col,
                ParseErrorKind::Syntax(alloc::format!("function `{name}` needs an argument")),
            ));
        }
        let (kind, digits) = name.split_at(1);
        let index = match digits.parse::<usize>() {
            Ok(i) if i >= 1 && i <= self.dim && !digits.starts_with('0') => i - 1,
            _ => return Err((col, ParseErrorKind::UnknownIdentifier(name))),
        };
        match kind {
            "x" => Ok(Expr::Var(Var::X(index))),
            "y" if self.allow_tangent => Ok(Expr::Var(Var::Y(index))),
            "y" => Err((col, ParseErrorKind::TangentVariableInMap(name))),
            _ => Err((col, ParseErrorKind::UnknownIdentifier(name))),
        }
    }
}

/// Parse a single expression over `x1..x{dim}` (and `y1..y{dim}` when
/// `allow_tangent`). Errors are located on line 1, columns 1-based.
pub fn parse_expr(src: &str, dim: usize, allow_tangent: bool) -> Result<Expr, ParseError> {
    parse_expr_at(src, dim, allow_tangent, 1, 1)
}

pub(super) fn parse_expr_at(
    src: &str,
    dim: usize,
    allow_tangent: bool,
    line: usize,
    first_column: usize,
) -> Result<Expr, ParseError> {
    let locate = |(col, kind): (usize, ParseErrorKind)| ParseError {
        line,
        column: first_column + col,
        kind,
    };
    let toks = tokenize(src).map_err(locate)?;
    let mut p = Parser {
        toks,
        pos: 0,
        dim,
        allow_tangent,
    };
    let e = p.expr().map_err(locate)?;
    if *p.peek() != Tok::End {
        return Err(locate((
            p.col(),
            ParseErrorKind::Syntax("unexpected trailing input".to_string()),
        )));
    }
    Ok(e)
}
