//! Metric and map definition files.
//!
//! A flat `key = value` text format; `#` starts a comment. Values are
//! integers, double-quoted strings, or bracketed lists of strings (which
//! may span lines):
//!
//! ```text
//! name = "Lorentz-Minkowski plane"
//! dim = 2
//! F = "sqrt(y1^2 - y2^2)"
//! cone = ["y1", "y1^2 - y2^2"]
//! ```
//!
//! Map files use `f = ["<x-expression>", ...]` instead of `F`/`cone`.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::parse::{parse_expr_at, ParseError, ParseErrorKind};
use super::{quote, EvalError, Expr};
use crate::linalg::Matrix;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

/// A pseudo-Finsler structure in one chart: `F(x, y)` on the open cone
/// where every `cone` expression is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDef {
    pub name: String,
    pub dim: usize,
    pub norm: Expr,
    pub cone: Vec<Expr>,
}

/// A candidate diffeomorphism `x ↦ f(x)` in one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDef {
    pub name: String,
    pub dim: usize,
    pub components: Vec<Expr>,
}

impl MetricDef {
    pub fn norm_at(&self, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        self.norm.eval(x, y)
    }

    /// Smallest cone-expression value at `(x, y)`, or `+inf` with no cone.
    pub fn cone_min(&self, x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
        self.cone
            .iter()
            .try_fold(f64::INFINITY, |m, c| Ok(m.min(c.eval(x, y)?)))
    }

    /// `(x, y)` lies in the domain with every cone expression `> margin`
    /// and `F(x, y) > 0`.
    pub fn contains(&self, x: &[f64], y: &[f64], margin: f64) -> bool {
        matches!(self.cone_min(x, y), Ok(m) if m > margin) && matches!(self.norm_at(x, y), Ok(f) if f > 0.0)
    }

    pub fn to_text(&self) -> String {
        let cone: Vec<String> = self.cone.iter().map(|c| quote(&c.to_string())).collect();
        format!(
            "name = {}\ndim = {}\nF = {}\ncone = [{}]\n",
            quote(&self.name),
            self.dim,
            quote(&self.norm.to_string()),
            cone.join(", ")
        )
    }
}

impl MapDef {
    pub fn apply(&self, x: &[f64]) -> Result<alloc::vec::Vec<f64>, EvalError> {
        self.components.iter().map(|c| c.eval(x, &[])).collect()
    }

    /// `self ∘ inner`, by substituting `inner` into every `x_i`.
    pub fn compose(&self, inner: &MapDef) -> MapDef {
        assert_eq!(self.dim, inner.dim, "composing maps of different dimension");
        MapDef {
            name: format!("{} o {}", self.name, inner.name),
            dim: self.dim,
            components: self
                .components
                .iter()
                .map(|c| c.substitute_x(&inner.components))
                .collect(),
        }
    }

    pub fn identity(dim: usize) -> MapDef {
        MapDef {
            name: "identity".to_owned(),
            dim,
            components: (0..dim).map(|i| Expr::Var(super::Var::X(i))).collect(),
        }
    }

    /// `x ↦ A x + c`, written out with literal coefficients.
    pub fn affine(name: &str, a: &Matrix, c: &[f64]) -> MapDef {
        let n = c.len();
        assert_eq!((a.rows(), a.cols()), (n, n), "affine map needs a square matrix");
        let lit = |v: f64| if v < 0.0 { format!("({})", v) } else { format!("{}", v) };
        let mut text = format!("name = {}\ndim = {}\nf = [", quote(name), n);
        for i in 0..n {
            let terms: Vec<String> = (0..n).map(|j| format!("{}*x{}", lit(a[(i, j)]), j + 1)).collect();
            text.push_str(&format!("\"{} + {}\", ", terms.join(" + "), lit(c[i])));
        }
        text.push_str("]\n");
        parse_map(&text).expect("generated affine map text parses")
    }

    pub fn to_text(&self) -> String {
        let f: Vec<String> = self.components.iter().map(|c| quote(&c.to_string())).collect();
        format!(
            "name = {}\ndim = {}\nf = [{}]\n",
            quote(&self.name),
            self.dim,
            f.join(", ")
        )
    }
}

#[derive(Debug, Clone)]
enum Value {
    Int(i64),
    Str(Located),
    List(Vec<Located>),
}

#[derive(Debug, Clone)]
struct Located {
    text: String,
    line: usize,
    column: usize,
}

struct Entry {
    key: String,
    line: usize,
    column: usize,
    value: Value,
}

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            kind,
        }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        self.err(ParseErrorKind::Syntax(msg.to_string()))
    }

    fn skip_inline_space(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.bump();
        }
    }

    fn skip_comment(&mut self) {
        if self.peek() == Some('#') {
            while !matches!(self.peek(), None | Some('\n')) {
                self.bump();
            }
        }
    }

    // whitespace, newlines and comments
    fn skip_all(&mut self) {
        loop {
            self.skip_inline_space();
            self.skip_comment();
            if self.peek() == Some('\n') {
                self.bump();
            } else {
                return;
            }
        }
    }

    fn key(&mut self) -> Result<String, ParseError> {
        let mut key = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                key.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if key.is_empty() {
            return Err(self.syntax("expected a key"));
        }
        Ok(key)
    }

    fn string(&mut self) -> Result<Located, ParseError> {
        let (line, column) = (self.line, self.column + 1);
        self.bump();
        let mut text = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => text.push(c),
                    _ => return Err(self.syntax("invalid escape in string")),
                },
                Some('\n') | None => return Err(self.syntax("unterminated string")),
                Some(c) => text.push(c),
            }
        }
        Ok(Located { text, line, column })
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some('"') => Ok(Value::Str(self.string()?)),
            Some('[') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_all();
                    match self.peek() {
                        Some(']') => {
                            self.bump();
                            return Ok(Value::List(items));
                        }
                        Some('"') => items.push(self.string()?),
                        _ => return Err(self.syntax("expected a string or `]`")),
                    }
                    self.skip_all();
                    match self.peek() {
                        Some(',') => {
                            self.bump();
                        }
                        Some(']') => {}
                        _ => return Err(self.syntax("expected `,` or `]`")),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() || c == '-' || c == '+' {
                        text.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                text.parse()
                    .map(Value::Int)
                    .map_err(|_| self.syntax("expected an integer"))
            }
            _ => Err(self.syntax("expected a value")),
        }
    }
}

fn entries(text: &str) -> Result<Vec<Entry>, ParseError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out: Vec<Entry> = Vec::new();
    loop {
        cur.skip_all();
        if cur.peek().is_none() {
            return Ok(out);
        }
        let (line, column) = (cur.line, cur.column);
        let key = cur.key()?;
        if out.iter().any(|e| e.key == key) {
            return Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::DuplicateKey(key),
            });
        }
        cur.skip_inline_space();
        if cur.bump() != Some('=') {
            return Err(cur.syntax("expected `=`"));
        }
        cur.skip_inline_space();
        let value = cur.value()?;
        cur.skip_inline_space();
        cur.skip_comment();
        if !matches!(cur.peek(), None | Some('\n')) {
            return Err(cur.syntax("unexpected text after value"));
        }
        out.push(Entry {
            key,
            line,
            column,
            value,
        });
    }
}

struct Fields {
    entries: Vec<Entry>,
    end_line: usize,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(i))
    }

    fn missing(&self, key: &'static str) -> ParseError {
        ParseError {
            line: self.end_line,
            column: 1,
            kind: ParseErrorKind::MissingKey(key),
        }
    }

    fn reject_unknown(&self) -> Result<(), ParseError> {
        match self.entries.first() {
            Some(e) => Err(ParseError {
                line: e.line,
                column: e.column,
                kind: ParseErrorKind::UnknownKey(e.key.clone()),
            }),
            None => Ok(()),
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.take("name") {
            None => Ok(String::new()),
            Some(Entry {
                value: Value::Str(s), ..
            }) => Ok(s.text),
            Some(e) => Err(type_error(&e, "a string")),
        }
    }

    fn dim(&mut self) -> Result<usize, ParseError> {
        match self.take("dim") {
            None => Err(self.missing("dim")),
            Some(Entry {
                value: Value::Int(d),
                line,
                column,
                ..
            }) => {
                if (MIN_DIM as i64..=MAX_DIM as i64).contains(&d) {
                    Ok(d as usize)
                } else {
                    Err(ParseError {
                        line,
                        column,
                        kind: ParseErrorKind::InvalidDimension(d),
                    })
                }
            }
            Some(e) => Err(type_error(&e, "an integer")),
        }
    }
}

fn type_error(e: &Entry, expected: &str) -> ParseError {
    ParseError {
        line: e.line,
        column: e.column,
        kind: ParseErrorKind::Syntax(format!("`{}` must be {}", e.key, expected)),
    }
}

fn fields(text: &str) -> Result<Fields, ParseError> {
    Ok(Fields {
        entries: entries(text)?,
        end_line: text.lines().count().max(1),
    })
}

fn expr(s: &Located, dim: usize, tangent: bool) -> Result<Expr, ParseError> {
    parse_expr_at(&s.text, dim, tangent, s.line, s.column)
}

/// Parse a metric definition file.
pub fn parse_metric(text: &str) -> Result<MetricDef, ParseError> {
    let mut f = fields(text)?;
    let name = f.name()?;
    let dim = f.dim()?;
    let norm = match f.take("F") {
        None => return Err(f.missing("F")),
        Some(Entry {
            value: Value::Str(s), ..
        }) => expr(&s, dim, true)?,
        Some(e) => return Err(type_error(&e, "a string")),
    };
    let cone = match f.take("cone") {
        None => Vec::new(),
        Some(Entry {
            value: Value::List(items),
            ..
        }) => items.iter().map(|s| expr(s, dim, true)).collect::<Result<_, _>>()?,
        Some(e) => return Err(type_error(&e, "a list of strings")),
    };
    f.reject_unknown()?;
    Ok(MetricDef { name, dim, norm, cone })
}

/// Parse a map definition file. Components may only use `x1..xn`.
pub fn parse_map(text: &str) -> Result<MapDef, ParseError> {
    let mut f = fields(text)?;
    let name = f.name()?;
    let dim = f.dim()?;
    let components = match f.take("f") {
        None => return Err(f.missing("f")),
        Some(Entry {
            value: Value::List(items),
            line,
            column,
            ..
        }) => {
            if items.len() != dim {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::DimensionMismatch {
                        expected: dim,
                        found: items.len(),
                    },
                });
            }
            items.iter().map(|s| expr(s, dim, false)).collect::<Result<_, _>>()?
        }
        Some(e) => return Err(type_error(&e, "a list of strings")),
    };
    f.reject_unknown()?;
    Ok(MapDef { name, dim, components })
}
