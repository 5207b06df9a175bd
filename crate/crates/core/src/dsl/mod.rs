//! The chart-level expression language for metrics and maps.
//!
//! Variables are positional: `x1..xn` are chart coordinates, `y1..yn` the
//! components of a tangent vector. Expressions support `+ - * /`, unary
//! minus, `^` with a constant integer or rational exponent, the functions
//! `sqrt exp log sin cos tan sinh cosh tanh`, numeric literals and the
//! constants `pi` and `e`. Precedence is `^` > unary `-` > `* /` > `+ -`.
//!
//! Evaluation is generic over [`Scalar`], so the same tree runs on plain
//! numbers and on derivative jets.

mod defs;
mod parse;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::Scalar;

pub use defs::{parse_map, parse_metric, MapDef, MetricDef};
pub use parse::{parse_expr, ParseError, ParseErrorKind};

/// A chart variable, zero-based: `X(0)` is `x1`, `Y(1)` is `y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Constant exponent `num/den` in lowest terms with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    num: i64,
    den: i64,
}

impl Exponent {
    pub fn new(num: i64, den: i64) -> Option<Exponent> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Some(Exponent {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: i64) -> Exponent {
        Exponent { num: n, den: 1 }
    }

    pub fn as_integer(self) -> Option<i32> {
        (self.den == 1).then(|| i32::try_from(self.num).ok()).flatten()
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => core::f64::consts::PI,
            Constant::E => core::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {function} of {argument:e} in `{expr}`")]
    Domain {
        function: &'static str,
        argument: f64,
        expr: String,
    },
    #[error("unbound variable {0}")]
    Unbound(Var),
}

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    /// Evaluate with `x` and `y` bound to the chart variables.
    ///
    /// Domain errors are raised for `sqrt` of a negative value, `log` of a
    /// non-positive value, division by zero, a non-integer power of a
    /// negative base, and (when derivatives are carried) for the points
    /// where those functions stop being differentiable.
    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T, EvalError> {
        let proto = x.first().or(y.first());
        self.eval_inner(x, y, proto)
    }

    fn eval_inner<T: Scalar>(&self, x: &[T], y: &[T], proto: Option<&T>) -> Result<T, EvalError> {
        let constant = |c: f64| match proto {
            Some(p) => Ok(p.constant_like(c)),
            None => Err(EvalError::Unbound(Var::X(0))),
        };
        let domain = |function: &'static str, argument: f64, e: &Expr| EvalError::Domain {
            function,
            argument,
            expr: e.to_string(),
        };
        match self {
            Expr::Num(v) => constant(*v),
            Expr::Const(c) => constant(c.value()),
            Expr::Var(v) => {
                let slot = match v {
                    Var::X(i) => x.get(*i),
                    Var::Y(i) => y.get(*i),
                };
                slot.cloned().ok_or(EvalError::Unbound(*v))
            }
            Expr::Neg(a) => Ok(a.eval_inner(x, y, proto)?.negate()),
            Expr::Bin(op, l, r) => {
                let a = l.eval_inner(x, y, proto)?;
                let b = r.eval_inner(x, y, proto)?;
                Ok(match op {
                    BinOp::Add => a.plus(&b),
                    BinOp::Sub => a.minus(&b),
                    BinOp::Mul => a.times(&b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(domain("division", 0.0, self));
                        }
                        a.divide(&b)
                    }
                })
            }
            Expr::Pow(base, p) => {
                let b = base.eval_inner(x, y, proto)?;
                let v = b.value();
                match p.as_integer() {
                    Some(n) => {
                        if v == 0.0 && n < 0 {
                            return Err(domain("negative power", v, self));
                        }
                        Ok(b.powi(n))
                    }
                    None => {
                        if v < 0.0 || (v == 0.0 && (b.has_derivatives() || p.as_f64() < 0.0)) {
                            return Err(domain("fractional power", v, self));
                        }
                        Ok(b.powf(p.as_f64()))
                    }
                }
            }
            Expr::Call(func, arg) => {
                let a = arg.eval_inner(x, y, proto)?;
                let v = a.value();
                Ok(match func {
                    Func::Sqrt => {
                        if v < 0.0 || (v == 0.0 && a.has_derivatives()) {
                            return Err(domain("sqrt", v, self));
                        }
                        a.sqrt()
                    }
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(domain("log", v, self));
                        }
                        a.ln()
                    }
                    Func::Exp => a.exp(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Tanh => a.tanh(),
                })
            }
        }
    }

    /// Replace every `x_i` by `subs[i]`.
    pub fn substitute_x(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Var(Var::X(i)) => subs[*i].clone(),
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_x(subs))),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.substitute_x(subs), r.substitute_x(subs)),
            Expr::Pow(b, p) => Expr::Pow(Box::new(b.substitute_x(subs)), *p),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute_x(subs))),
        }
    }

    /// Visit every variable occurrence.
    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Var(v) => f(*v),
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.for_each_var(f),
            Expr::Bin(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vars = Vec::new();
        self.for_each_var(&mut |v| {
            if !vars.contains(&v) {
                vars.push(v);
            }
        });
        vars.sort();
        vars
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Pow(_, _) => 4,
            _ => 5,
        }
    }

    fn fmt_at(&self, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.fmt_bare(f)?;
            f.write_str(")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "-{}", -v),
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(3, f)
            }
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                l.fmt_at(p, f)?;
                write!(f, " {} ", op.symbol())?;
                r.fmt_at(p + 1, f)
            }
            Expr::Pow(b, p) => {
                b.fmt_at(5, f)?;
                match (p.num, p.den) {
                    (n, 1) if n >= 0 => write!(f, "^{}", n),
                    (n, 1) => write!(f, "^({})", n),
                    (n, d) => write!(f, "^({}/{})", n, d),
                }
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(0, f)?;
                f.write_str(")")
            }
        }
    }
}

/// Prints with the minimal parentheses needed to reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(0, f)
    }
}

pub(crate) fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
