//! Double-double arithmetic.
//!
//! Algorithms follow the accurate variants analysed by Joldes, Muller and
//! Popescu (2017): addition within 3u^2, multiplication within 4u^2 = 2^-104.
//! Division uses three quotient digits with exact remainders.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Requires `|a| >= |b|` (or `a == 0`).
#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `a * b = p + e` exactly (barring underflow).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// A value `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuadValue {
    hi: f64,
    lo: f64,
}

impl QuadValue {
    pub const ZERO: QuadValue = QuadValue { hi: 0.0, lo: 0.0 };
    pub const ONE: QuadValue = QuadValue { hi: 1.0, lo: 0.0 };

    /// Normalizes an arbitrary pair.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        QuadValue::finish(h, l)
    }

    #[inline]
    fn finish(hi: f64, lo: f64) -> Self {
        if hi.is_finite() {
            QuadValue { hi, lo }
        } else {
            QuadValue { hi, lo: 0.0 }
        }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Product with a binary64 value, within 2u^2.
    #[inline]
    pub fn mul_f64(self, y: f64) -> Self {
        let (ch, cl1) = two_prod(self.hi, y);
        let cl3 = self.lo.mul_add(y, cl1);
        let (zh, zl) = fast_two_sum(ch, cl3);
        QuadValue::finish(zh, zl)
    }

    #[inline]
    pub fn add_f64(self, y: f64) -> Self {
        let (sh, sl) = two_sum(self.hi, y);
        let v = self.lo + sl;
        let (zh, zl) = fast_two_sum(sh, v);
        QuadValue::finish(zh, zl)
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            if self.hi == 0.0 {
                return QuadValue::ZERO;
            }
            return QuadValue { hi: f64::NAN, lo: 0.0 };
        }
        if !self.hi.is_finite() {
            return QuadValue { hi: self.hi.sqrt(), lo: 0.0 };
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        let (zh, zl) = fast_two_sum(x, r);
        QuadValue::finish(zh, zl)
    }

    pub fn recip(self) -> Self {
        QuadValue::ONE / self
    }
}

impl From<f64> for QuadValue {
    fn from(v: f64) -> Self {
        QuadValue { hi: v, lo: 0.0 }
    }
}

impl Neg for QuadValue {
    type Output = Self;
    fn neg(self) -> Self {
        QuadValue { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for QuadValue {
    type Output = Self;
    #[inline]
    fn add(self, y: Self) -> Self {
        let (sh, sl) = two_sum(self.hi, y.hi);
        if !sh.is_finite() {
            return QuadValue { hi: sh, lo: 0.0 };
        }
        let (th, tl) = two_sum(self.lo, y.lo);
        let c = sl + th;
        let (vh, vl) = fast_two_sum(sh, c);
        let w = tl + vl;
        let (zh, zl) = fast_two_sum(vh, w);
        QuadValue::finish(zh, zl)
    }
}

impl Sub for QuadValue {
    type Output = Self;
    #[inline]
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl Mul for QuadValue {
    type Output = Self;
    #[inline]
    fn mul(self, y: Self) -> Self {
        let (ch, cl1) = two_prod(self.hi, y.hi);
        if !ch.is_finite() {
            return QuadValue { hi: ch, lo: 0.0 };
        }
        let tl0 = self.lo * y.lo;
        let tl1 = self.hi.mul_add(y.lo, tl0);
        let cl2 = self.lo.mul_add(y.hi, tl1);
        let cl3 = cl1 + cl2;
        let (zh, zl) = fast_two_sum(ch, cl3);
        QuadValue::finish(zh, zl)
    }
}

impl Div for QuadValue {
    type Output = Self;
    fn div(self, y: Self) -> Self {
        let q1 = self.hi / y.hi;
        if !q1.is_finite() || y.hi == 0.0 {
            return QuadValue { hi: q1, lo: 0.0 };
        }
        let r = self - y.mul_f64(q1);
        let q2 = r.hi / y.hi;
        let r = r - y.mul_f64(q2);
        let q3 = r.hi / y.hi;
        let (s, e) = fast_two_sum(q1, q2);
        QuadValue { hi: s, lo: e }.add_f64(q3)
    }
}

impl PartialOrd for QuadValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

pub fn quad_add(a: QuadValue, b: QuadValue) -> QuadValue {
    a + b
}

pub fn quad_sub(a: QuadValue, b: QuadValue) -> QuadValue {
    a - b
}

pub fn quad_mul(a: QuadValue, b: QuadValue) -> QuadValue {
    a * b
}

pub fn quad_div(a: QuadValue, b: QuadValue) -> QuadValue {
    a / b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_keeps_tiny_term() {
        let s = quad_add(QuadValue::ONE, QuadValue::from(2f64.powi(-60)));
        assert_eq!(s.hi(), 1.0);
        assert_eq!(s.lo(), 2f64.powi(-60));
    }

    #[test]
    fn add_zero_is_identity() {
        let x = QuadValue::new(std::f64::consts::PI, 1.2246467991473532e-16);
        assert_eq!(quad_add(x, QuadValue::ZERO), x);
    }

    #[test]
    fn overflow_goes_to_hi() {
        let big = QuadValue::from(f64::MAX);
        let s = big * QuadValue::from(2.0);
        assert_eq!(s.hi(), f64::INFINITY);
        assert_eq!(s.lo(), 0.0);
    }

    #[test]
    fn sqrt_of_two_squares_back() {
        let r = QuadValue::from(2.0).sqrt();
        let back = r * r - QuadValue::from(2.0);
        assert!(back.hi().abs() < 1e-30);
    }
}
