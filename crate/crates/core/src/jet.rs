//! Truncated Taylor arithmetic up to total order 3.
//!
//! A [`Jet`] carries a value together with every mixed partial derivative
//! up to its order with respect to a fixed set of seeded variables. The
//! derivative arrays are dense and symmetric, addressed by sorted index
//! tuples: `d2` holds the pairs `i <= j` row by row, `d3` the triples
//! `i <= j <= k` in lexicographic order.
//!
//! [`jet_eval`] pushes a jet through an expression; [`fd_partial`] is the
//! central-difference oracle used to cross-check it.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::dsl::{EvalError, Expr, Var};
use crate::scalar::{powi, Scalar};

#[inline]
fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * m - i + 1) / 2 + (j - i)
}

fn triple_index(m: usize, i: usize, j: usize, k: usize) -> usize {
    let mut s = [i, j, k];
    s.sort_unstable();
    let [i, j, k] = s;
    let mut offset = 0;
    for a in 0..i {
        offset += (m - a) * (m - a + 1) / 2;
    }
    offset + pair_index(m - i, j - i, k - i)
}

fn pair_len(m: usize) -> usize {
    m * (m + 1) / 2
}

fn triple_len(m: usize) -> usize {
    m * (m + 1) * (m + 2) / 6
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    value: f64,
    order: u8,
    nvars: usize,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, nvars: usize, order: u8) -> Self {
        assert!((1..=3).contains(&order), "jet order must be 1, 2 or 3");
        Jet {
            value,
            order,
            nvars,
            d1: vec![0.0; nvars],
            d2: if order >= 2 {
                vec![0.0; pair_len(nvars)]
            } else {
                Vec::new()
            },
            d3: if order >= 3 {
                vec![0.0; triple_len(nvars)]
            } else {
                Vec::new()
            },
        }
    }

    /// The seeded variable number `slot`, evaluated at `value`.
    pub fn variable(value: f64, slot: usize, nvars: usize, order: u8) -> Self {
        let mut j = Jet::constant(value, nvars, order);
        j.d1[slot] = 1.0;
        j
    }

    /// An order-1 jet from a value and its gradient.
    pub fn from_gradient(value: f64, gradient: Vec<f64>) -> Self {
        Jet {
            value,
            order: 1,
            nvars: gradient.len(),
            d1: gradient,
            d2: Vec::new(),
            d3: Vec::new(),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gradient(&self) -> &[f64] {
        &self.d1
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.d1[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        assert!(self.order >= 2, "second derivatives not carried");
        self.d2[pair_index(self.nvars, i, j)]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(self.order >= 3, "third derivatives not carried");
        self.d3[triple_index(self.nvars, i, j, k)]
    }

    /// Partial derivative for an arbitrary multi-index of length 0..=3.
    pub fn partial(&self, idx: &[usize]) -> f64 {
        match *idx {
            [] => self.value,
            [i] => self.d1(i),
            [i, j] => self.d2(i, j),
            [i, j, k] => self.d3(i, j, k),
            _ => panic!("jets carry derivatives up to order 3"),
        }
    }

    /// Largest absolute entry among the derivatives of exactly `order`.
    pub fn max_abs_of_order(&self, order: usize) -> f64 {
        let slots: &[f64] = match order {
            1 => &self.d1,
            2 => &self.d2,
            3 => &self.d3,
            _ => return libm::fabs(self.value),
        };
        slots.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    fn check_shape(&self, other: &Jet) {
        debug_assert_eq!(self.nvars, other.nvars, "jets over different seed sets");
        debug_assert_eq!(self.order, other.order, "jets of different order");
    }

    fn zip(&self, other: &Jet, value: f64, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_shape(other);
        Jet {
            value,
            order: self.order,
            nvars: self.nvars,
            d1: self.d1.iter().zip(&other.d1).map(|(a, b)| f(*a, *b)).collect(),
            d2: self.d2.iter().zip(&other.d2).map(|(a, b)| f(*a, *b)).collect(),
            d3: self.d3.iter().zip(&other.d3).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            value: self.value * c,
            order: self.order,
            nvars: self.nvars,
            d1: self.d1.iter().map(|v| v * c).collect(),
            d2: self.d2.iter().map(|v| v * c).collect(),
            d3: self.d3.iter().map(|v| v * c).collect(),
        }
    }

    fn product(&self, b: &Jet) -> Jet {
        self.check_shape(b);
        let m = self.nvars;
        let (av, bv) = (self.value, b.value);
        let mut out = Jet::constant(av * bv, m, self.order);
        for i in 0..m {
            out.d1[i] = self.d1[i] * bv + av * b.d1[i];
        }
        if self.order >= 2 {
            for i in 0..m {
                for j in i..m {
                    let ij = pair_index(m, i, j);
                    out.d2[ij] = self.d2[ij] * bv + self.d1[i] * b.d1[j] + self.d1[j] * b.d1[i] + av * b.d2[ij];
                }
            }
        }
        if self.order >= 3 {
            let mut t = 0;
            for i in 0..m {
                for j in i..m {
                    let ij = pair_index(m, i, j);
                    for k in j..m {
                        let ik = pair_index(m, i, k);
                        let jk = pair_index(m, j, k);
                        out.d3[t] = self.d3[t] * bv
                            + self.d2[ij] * b.d1[k]
                            + self.d2[ik] * b.d1[j]
                            + self.d2[jk] * b.d1[i]
                            + self.d1[i] * b.d2[jk]
                            + self.d1[j] * b.d2[ik]
                            + self.d1[k] * b.d2[ij]
                            + av * b.d3[t];
                        t += 1;
                    }
                }
            }
        }
        out
    }

    // w = a / b solved from a = w·b, slot by slot.
    fn quotient(&self, b: &Jet) -> Jet {
        self.check_shape(b);
        let m = self.nvars;
        let bv = b.value;
        let wv = self.value / bv;
        let mut w = Jet::constant(wv, m, self.order);
        for i in 0..m {
            w.d1[i] = (self.d1[i] - wv * b.d1[i]) / bv;
        }
        if self.order >= 2 {
            for i in 0..m {
                for j in i..m {
                    let ij = pair_index(m, i, j);
                    w.d2[ij] = (self.d2[ij] - w.d1[i] * b.d1[j] - w.d1[j] * b.d1[i] - wv * b.d2[ij]) / bv;
                }
            }
        }
        if self.order >= 3 {
            let mut t = 0;
            for i in 0..m {
                for j in i..m {
                    let ij = pair_index(m, i, j);
                    for k in j..m {
                        let ik = pair_index(m, i, k);
                        let jk = pair_index(m, j, k);
                        let second = w.d2[ij] * b.d1[k] + w.d2[ik] * b.d1[j] + w.d2[jk] * b.d1[i];
                        let first = w.d1[i] * b.d2[jk] + w.d1[j] * b.d2[ik] + w.d1[k] * b.d2[ij];
                        w.d3[t] = (self.d3[t] - second - first - wv * b.d3[t]) / bv;
                        t += 1;
                    }
                }
            }
        }
        w
    }

    /// Composition with a univariate function given its value and first
    /// three derivatives at `self.value`.
    fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Jet {
        let m = self.nvars;
        let u = self;
        let mut out = Jet::constant(f0, m, self.order);
        for i in 0..m {
            out.d1[i] = f1 * u.d1[i];
        }
        if self.order >= 2 {
            for i in 0..m {
                for j in i..m {
                    let ij = pair_index(m, i, j);
                    out.d2[ij] = f1 * u.d2[ij] + f2 * u.d1[i] * u.d1[j];
                }
            }
        }
        if self.order >= 3 {
            let mut t = 0;
            for i in 0..m {
                for j in i..m {
                    let ij = pair_index(m, i, j);
                    for k in j..m {
                        let ik = pair_index(m, i, k);
                        let jk = pair_index(m, j, k);
                        out.d3[t] = f1 * u.d3[t]
                            + f2 * (u.d2[ij] * u.d1[k] + u.d2[ik] * u.d1[j] + u.d2[jk] * u.d1[i])
                            + f3 * u.d1[i] * u.d1[j] * u.d1[k];
                        t += 1;
                    }
                }
            }
        }
        out
    }
}

// c · v^e, with the convention 0 · anything = 0 (avoids 0 · inf at v = 0).
fn coef_powi(c: f64, v: f64, e: i32) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * powi(v, e)
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(c, self.nvars, self.order)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn has_derivatives(&self) -> bool {
        true
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.zip(rhs, self.value + rhs.value, |a, b| a + b)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.zip(rhs, self.value - rhs.value, |a, b| a - b)
    }
    fn times(&self, rhs: &Self) -> Self {
        self.product(rhs)
    }
    fn divide(&self, rhs: &Self) -> Self {
        self.quotient(rhs)
    }
    fn negate(&self) -> Self {
        Jet {
            value: -self.value,
            order: self.order,
            nvars: self.nvars,
            d1: self.d1.iter().map(|v| -v).collect(),
            d2: self.d2.iter().map(|v| -v).collect(),
            d3: self.d3.iter().map(|v| -v).collect(),
        }
    }
    fn powi(&self, n: i32) -> Self {
        let v = self.value;
        let nf = n as f64;
        self.compose(
            powi(v, n),
            coef_powi(nf, v, n - 1),
            coef_powi(nf * (nf - 1.0), v, n - 2),
            coef_powi(nf * (nf - 1.0) * (nf - 2.0), v, n - 3),
        )
    }
    fn powf(&self, p: f64) -> Self {
        let v = self.value;
        self.compose(
            libm::pow(v, p),
            p * libm::pow(v, p - 1.0),
            p * (p - 1.0) * libm::pow(v, p - 2.0),
            p * (p - 1.0) * (p - 2.0) * libm::pow(v, p - 3.0),
        )
    }
    fn sqrt(&self) -> Self {
        let v = self.value;
        let s = libm::sqrt(v);
        self.compose(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v))
    }
    fn exp(&self) -> Self {
        let e = libm::exp(self.value);
        self.compose(e, e, e, e)
    }
    fn ln(&self) -> Self {
        let v = self.value;
        self.compose(libm::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
    fn sin(&self) -> Self {
        let (s, c) = (libm::sin(self.value), libm::cos(self.value));
        self.compose(s, c, -s, -c)
    }
    fn cos(&self) -> Self {
        let (s, c) = (libm::sin(self.value), libm::cos(self.value));
        self.compose(c, -s, -c, s)
    }
    fn tan(&self) -> Self {
        let t = libm::tan(self.value);
        let sec2 = 1.0 + t * t;
        self.compose(t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t))
    }
    fn sinh(&self) -> Self {
        let (s, c) = (libm::sinh(self.value), libm::cosh(self.value));
        self.compose(s, c, s, c)
    }
    fn cosh(&self) -> Self {
        let (s, c) = (libm::sinh(self.value), libm::cosh(self.value));
        self.compose(c, s, c, s)
    }
    fn tanh(&self) -> Self {
        let t = libm::tanh(self.value);
        let sech2 = 1.0 - t * t;
        self.compose(t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.plus(rhs)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.minus(rhs)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.quotient(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.negate()
    }
}

/// Evaluate `e` at `(x, y)` as a jet seeded in `seeds` (slot `s` is
/// `seeds[s]`), carrying derivatives up to `order`.
pub fn jet_eval(e: &Expr, x: &[f64], y: &[f64], seeds: &[Var], order: u8) -> Result<Jet, EvalError> {
    let m = seeds.len();
    let lift = |var: Var, v: f64| match seeds.iter().position(|s| *s == var) {
        Some(slot) => Jet::variable(v, slot, m, order),
        None => Jet::constant(v, m, order),
    };
    let xs: Vec<Jet> = x.iter().enumerate().map(|(i, v)| lift(Var::X(i), *v)).collect();
    let ys: Vec<Jet> = y.iter().enumerate().map(|(i, v)| lift(Var::Y(i), *v)).collect();
    e.eval(&xs, &ys)
}

/// All `2n` chart variables in slot order `x1..xn, y1..yn`.
pub fn all_vars(n: usize) -> Vec<Var> {
    (0..n).map(Var::X).chain((0..n).map(Var::Y)).collect()
}

/// Base step for the finite-difference oracle: `1e-5` for orders 1-2 and
/// `1e-3` for order 3, multiplied by `scale`.
pub fn fd_step(order: usize, scale: f64) -> f64 {
    let base = if order >= 3 { 1e-3 } else { 1e-5 };
    base * scale
}

/// Nested central-difference estimate of the mixed partial of `e` along
/// `vars` (length 0..=3), with step `steps[i]` for `vars[i]`.
///
/// Truncation error is `O(h²)`; the stencil reaches `±3h` for order 3.
pub fn fd_partial(e: &Expr, x: &[f64], y: &[f64], vars: &[Var], steps: &[f64]) -> Result<f64, EvalError> {
    assert_eq!(vars.len(), steps.len(), "one step per differenced variable");
    assert!(vars.len() <= 3, "finite differences up to order 3");
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    nested_difference(e, &mut x, &mut y, vars, steps)
}

fn nested_difference(e: &Expr, x: &mut [f64], y: &mut [f64], vars: &[Var], steps: &[f64]) -> Result<f64, EvalError> {
    let Some((&var, rest)) = vars.split_first() else {
        return e.eval(x, y);
    };
    let h = steps[0];
    let slot = |x: &mut [f64], y: &mut [f64], delta: f64| match var {
        Var::X(i) => x[i] += delta,
        Var::Y(i) => y[i] += delta,
    };
    slot(x, y, h);
    let plus = nested_difference(e, x, y, rest, &steps[1..]);
    slot(x, y, -2.0 * h);
    let minus = nested_difference(e, x, y, rest, &steps[1..]);
    slot(x, y, h);
    Ok((plus? - minus?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;

    #[test]
    fn packed_indices_follow_loop_order() {
        let m = 5;
        let mut t = 0;
        for i in 0..m {
            for j in i..m {
                assert_eq!(pair_index(m, i, j), t);
                t += 1;
            }
        }
        let mut t = 0;
        for i in 0..m {
            for j in i..m {
                for k in j..m {
                    assert_eq!(triple_index(m, i, j, k), t);
                    assert_eq!(triple_index(m, k, i, j), t);
                    t += 1;
                }
            }
        }
        assert_eq!(t, triple_len(m));
    }

    #[test]
    fn cubic_monomial_third_partial() {
        let e = parse_expr("y1^2*y2", 2, true).unwrap();
        let j = jet_eval(&e, &[0.0, 0.0], &[2.0, 3.0], &[Var::Y(0), Var::Y(1)], 3).unwrap();
        assert_eq!(j.value(), 12.0);
        assert_eq!(j.d1(0), 12.0);
        assert_eq!(j.d1(1), 4.0);
        assert_eq!(j.d2(0, 0), 6.0);
        assert_eq!(j.d2(0, 1), 4.0);
        assert_eq!(j.d2(1, 1), 0.0);
        assert_eq!(j.d3(0, 0, 1), 2.0);
        assert_eq!(j.d3(1, 0, 0), 2.0);
        assert_eq!(j.d3(0, 0, 0), 0.0);
    }

    #[test]
    fn euclidean_square_has_hessian_two_identity() {
        let e = parse_expr("sqrt(y1^2+y2^2)^2", 2, true).unwrap();
        let j = jet_eval(&e, &[0.0, 0.0], &[0.6, 0.8], &[Var::Y(0), Var::Y(1)], 2).unwrap();
        approx::assert_abs_diff_eq!(j.d2(0, 0), 2.0, epsilon = 1e-14);
        approx::assert_abs_diff_eq!(j.d2(1, 1), 2.0, epsilon = 1e-14);
        approx::assert_abs_diff_eq!(j.d2(0, 1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn linear_in_seed_gives_coefficient() {
        let e = parse_expr("x1*y1", 2, true).unwrap();
        let j = jet_eval(&e, &[1.7, 0.0], &[0.3, 0.0], &[Var::Y(0)], 1).unwrap();
        assert_eq!(j.d1(0), 1.7);
    }

    #[test]
    fn unseeded_variables_leave_zero_slots() {
        let e = parse_expr("exp(x1)*sin(y1)", 2, true).unwrap();
        let j = jet_eval(&e, &[0.2, 0.0], &[0.4, 0.0], &[Var::X(1), Var::Y(1)], 3).unwrap();
        assert_eq!(j.max_abs_of_order(1), 0.0);
        assert_eq!(j.max_abs_of_order(2), 0.0);
        assert_eq!(j.max_abs_of_order(3), 0.0);
    }

    #[test]
    fn quotient_and_elementary_functions_match_closed_forms() {
        // d/dt of each function at t = 0.4, up to third order.
        let t = 0.4f64;
        let cases: [(&str, [f64; 4]); 6] = [
            (
                "1/y1",
                [1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t), -6.0 / (t * t * t * t)],
            ),
            ("log(y1)", [libm::log(t), 1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t)]),
            ("tan(y1)", {
                let (tt, s2) = (libm::tan(t), 1.0 + libm::tan(t) * libm::tan(t));
                [tt, s2, 2.0 * tt * s2, s2 * (2.0 + 6.0 * tt * tt)]
            }),
            ("tanh(y1)", {
                let th = libm::tanh(t);
                let s = 1.0 - th * th;
                [th, s, -2.0 * th * s, s * (6.0 * th * th - 2.0)]
            }),
            (
                "y1^(3/2)",
                [
                    libm::pow(t, 1.5),
                    1.5 * libm::sqrt(t),
                    0.75 / libm::sqrt(t),
                    -0.375 / libm::pow(t, 1.5),
                ],
            ),
            ("cosh(y1)", [libm::cosh(t), libm::sinh(t), libm::cosh(t), libm::sinh(t)]),
        ];
        for (src, want) in cases {
            let e = parse_expr(src, 1, true).unwrap();
            let j = jet_eval(&e, &[0.0], &[t], &[Var::Y(0)], 3).unwrap();
            let got = [j.value(), j.d1(0), j.d2(0, 0), j.d3(0, 0, 0)];
            for (g, w) in got.iter().zip(want) {
                approx::assert_relative_eq!(*g, w, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn fd_first_derivative_of_square() {
        let e = parse_expr("y1^2", 1, true).unwrap();
        let d = fd_partial(&e, &[0.0], &[3.0], &[Var::Y(0)], &[1e-4]).unwrap();
        approx::assert_abs_diff_eq!(d, 6.0, epsilon = 1e-7);
    }

    #[test]
    fn fd_off_diagonal_euclidean_vanishes() {
        let e = parse_expr("y1^2+y2^2", 2, true).unwrap();
        let h = fd_step(2, 1.0);
        let d = fd_partial(&e, &[0.0, 0.0], &[0.6, 0.8], &[Var::Y(0), Var::Y(1)], &[h, h]).unwrap();
        approx::assert_abs_diff_eq!(d, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn fd_reports_domain_errors_on_the_stencil() {
        let e = parse_expr("sqrt(y1)", 1, true).unwrap();
        assert!(fd_partial(&e, &[0.0], &[1e-4], &[Var::Y(0)], &[1e-3]).is_err());
    }
}
