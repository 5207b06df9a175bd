//! Number kinds the expression evaluator runs on.
//!
//! [`Scalar`] is implemented for plain `f64` and for [`Jet`](crate::jet::Jet).
//! Every elementary function computes its value through the same `libm`
//! routine in both implementations, so a jet's order-0 coefficient is
//! bit-for-bit the plain evaluation.

/// Integer power by binary exponentiation.
///
/// Shared by the `f64` and jet paths so both round identically.
pub fn powi(base: f64, exp: i32) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = exp.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    if exp < 0 {
        1.0 / result
    } else {
        result
    }
}

pub trait Scalar: Clone {
    /// A constant with the same shape (seed set, order) as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    /// Whether derivative slots are carried.
    fn has_derivatives(&self) -> bool;

    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn divide(&self, rhs: &Self) -> Self;
    fn negate(&self) -> Self;

    fn powi(&self, n: i32) -> Self;
    /// Real power for a positive base.
    fn powf(&self, p: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn tanh(&self) -> Self;
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn has_derivatives(&self) -> bool {
        false
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn divide(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn negate(&self) -> Self {
        -self
    }
    fn powi(&self, n: i32) -> Self {
        powi(*self, n)
    }
    fn powf(&self, p: f64) -> Self {
        libm::pow(*self, p)
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn tan(&self) -> Self {
        libm::tan(*self)
    }
    fn sinh(&self) -> Self {
        libm::sinh(*self)
    }
    fn cosh(&self) -> Self {
        libm::cosh(*self)
    }
    fn tanh(&self) -> Self {
        libm::tanh(*self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_repeated_product() {
        assert_eq!(powi(3.0, 0), 1.0);
        assert_eq!(powi(3.0, 4), 81.0);
        assert_eq!(powi(-2.0, 3), -8.0);
        assert_eq!(powi(2.0, -2), 0.25);
    }
}
