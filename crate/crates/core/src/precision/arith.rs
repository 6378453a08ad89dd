use std::cell::Cell;

use crate::precision::format::{Format, FormatKind};
use crate::precision::quad::QuadValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
}

const OVERFLOW: u8 = 1;
const UNDERFLOW: u8 = 2;
const INVALID: u8 = 4;

/// Sticky exception flags for one solver instance.
#[derive(Debug, Default, Clone)]
pub struct Status {
    flags: Cell<u8>,
}

impl Status {
    pub fn raise_overflow(&self) {
        self.flags.set(self.flags.get() | OVERFLOW);
    }

    pub fn raise_underflow(&self) {
        self.flags.set(self.flags.get() | UNDERFLOW);
    }

    pub fn raise_invalid(&self) {
        self.flags.set(self.flags.get() | INVALID);
    }

    pub fn overflow(&self) -> bool {
        self.flags.get() & OVERFLOW != 0
    }

    pub fn underflow(&self) -> bool {
        self.flags.get() & UNDERFLOW != 0
    }

    pub fn invalid(&self) -> bool {
        self.flags.get() & INVALID != 0
    }

    pub fn any(&self) -> bool {
        self.flags.get() != 0
    }

    pub fn merge(&self, other: &Status) {
        self.flags.set(self.flags.get() | other.flags.get());
    }

    pub fn clear(&self) {
        self.flags.set(0);
    }

    /// Flag names joined by `|`, or an empty string.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.overflow() {
            parts.push("overflow");
        }
        if self.underflow() {
            parts.push("underflow");
        }
        if self.invalid() {
            parts.push("invalid");
        }
        parts.join("|")
    }
}

/// Scalar arithmetic of one format. Operands of `add`/`mul`/... are assumed
/// to already be on the format's grid; `load` puts a stored value there.
pub trait Arith {
    type S: Copy + std::fmt::Debug;

    fn format(&self) -> Format;
    fn load(&self, v: f64) -> Self::S;
    fn store(&self, s: Self::S) -> f64;
    fn zero(&self) -> Self::S;
    fn add(&self, a: Self::S, b: Self::S) -> Self::S;
    fn sub(&self, a: Self::S, b: Self::S) -> Self::S;
    fn mul(&self, a: Self::S, b: Self::S) -> Self::S;
    fn div(&self, a: Self::S, b: Self::S) -> Self::S;
    fn sqrt(&self, a: Self::S) -> Self::S;
    fn neg(&self, a: Self::S) -> Self::S;
    fn abs(&self, a: Self::S) -> Self::S;
    fn is_zero(&self, a: Self::S) -> bool;
    fn to_f64(&self, a: Self::S) -> f64 {
        self.store(a)
    }
}

/// Binary formats with up to 53 bits: binary64 operation, then rounding.
#[derive(Debug, Clone, Copy)]
pub struct Rounded<'a> {
    fmt: Format,
    status: &'a Status,
    native: bool,
}

impl<'a> Rounded<'a> {
    pub fn new(fmt: Format, status: &'a Status) -> Self {
        debug_assert_eq!(fmt.kind(), FormatKind::Binary);
        Rounded {
            fmt,
            status,
            native: fmt.significand_bits() >= 53,
        }
    }

    #[inline]
    fn round(&self, v: f64) -> f64 {
        if self.native {
            if v.is_infinite() {
                self.status.raise_overflow();
            } else if v.is_nan() {
                self.status.raise_invalid();
            }
            v
        } else {
            let r = self.fmt.round_with(v, self.status);
            if r.is_nan() {
                self.status.raise_invalid();
            }
            r
        }
    }
}

impl Arith for Rounded<'_> {
    type S = f64;

    fn format(&self) -> Format {
        self.fmt
    }

    #[inline]
    fn load(&self, v: f64) -> f64 {
        self.round(v)
    }

    #[inline]
    fn store(&self, s: f64) -> f64 {
        s
    }

    #[inline]
    fn zero(&self) -> f64 {
        0.0
    }

    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        self.round(a + b)
    }

    #[inline]
    fn sub(&self, a: f64, b: f64) -> f64 {
        self.round(a - b)
    }

    #[inline]
    fn mul(&self, a: f64, b: f64) -> f64 {
        self.round(a * b)
    }

    #[inline]
    fn div(&self, a: f64, b: f64) -> f64 {
        self.round(a / b)
    }

    #[inline]
    fn sqrt(&self, a: f64) -> f64 {
        self.round(a.sqrt())
    }

    #[inline]
    fn neg(&self, a: f64) -> f64 {
        -a
    }

    #[inline]
    fn abs(&self, a: f64) -> f64 {
        a.abs()
    }

    #[inline]
    fn is_zero(&self, a: f64) -> bool {
        a == 0.0
    }
}

/// Double-double arithmetic. Results are stored to binary64 by keeping
/// the leading component.
#[derive(Debug, Clone, Copy)]
pub struct QuadArith<'a> {
    status: &'a Status,
}

impl<'a> QuadArith<'a> {
    pub fn new(status: &'a Status) -> Self {
        QuadArith { status }
    }

    #[inline]
    fn check(&self, q: QuadValue) -> QuadValue {
        if q.hi().is_infinite() {
            self.status.raise_overflow();
        } else if q.hi().is_nan() {
            self.status.raise_invalid();
        }
        q
    }
}

impl Arith for QuadArith<'_> {
    type S = QuadValue;

    fn format(&self) -> Format {
        Format::QUAD
    }

    #[inline]
    fn load(&self, v: f64) -> QuadValue {
        QuadValue::from(v)
    }

    #[inline]
    fn store(&self, s: QuadValue) -> f64 {
        s.hi()
    }

    #[inline]
    fn zero(&self) -> QuadValue {
        QuadValue::ZERO
    }

    #[inline]
    fn add(&self, a: QuadValue, b: QuadValue) -> QuadValue {
        self.check(a + b)
    }

    #[inline]
    fn sub(&self, a: QuadValue, b: QuadValue) -> QuadValue {
        self.check(a - b)
    }

    #[inline]
    fn mul(&self, a: QuadValue, b: QuadValue) -> QuadValue {
        self.check(a * b)
    }

    #[inline]
    fn div(&self, a: QuadValue, b: QuadValue) -> QuadValue {
        self.check(a / b)
    }

    #[inline]
    fn sqrt(&self, a: QuadValue) -> QuadValue {
        self.check(a.sqrt())
    }

    #[inline]
    fn neg(&self, a: QuadValue) -> QuadValue {
        -a
    }

    #[inline]
    fn abs(&self, a: QuadValue) -> QuadValue {
        a.abs()
    }

    #[inline]
    fn is_zero(&self, a: QuadValue) -> bool {
        a.hi() == 0.0
    }
}
