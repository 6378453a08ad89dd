use std::fmt;

use crate::error::{Error, Result};
use crate::precision::arith::{FpOp, Status};
use crate::precision::quad::QuadValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatKind {
    /// A binary format with at most 53 significand bits, simulated by
    /// rounding binary64 results.
    Binary,
    /// Unevaluated sum of two binary64 values.
    DoubleDouble,
}

/// A floating-point grid: `t` significand bits (implicit bit included) and
/// normal exponents in `emin..=emax`. Subnormals are always enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Format {
    name: &'static str,
    significand_bits: u32,
    emin: i32,
    emax: i32,
    unit_roundoff: f64,
    kind: FormatKind,
}

/// Exact `2^k` for `k` in the binary64 range, subnormals included.
pub(crate) fn exp2i(k: i32) -> f64 {
    if k > 1023 {
        f64::INFINITY
    } else if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else if k >= -1074 {
        f64::from_bits(1u64 << (k + 1074))
    } else {
        0.0
    }
}

/// `floor(log2(|v|))` for finite nonzero `v`.
pub(crate) fn exponent_of(v: f64) -> i32 {
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        let mant = bits & ((1u64 << 52) - 1);
        -1074 + (63 - mant.leading_zeros() as i32)
    } else {
        biased - 1023
    }
}

impl Format {
    pub const HALF: Format = Format::binary("half", 11, -14, 15);
    pub const MP4: Format = Format::binary("mp4", 14, -1022, 1023);
    pub const SINGLE: Format = Format::binary("single", 24, -126, 127);
    pub const DOUBLE: Format = Format::binary("double", 53, -1022, 1023);
    /// Double-double. The effective unit roundoff is 2^-104 rather than the
    /// 2^-113 of IEEE binary128.
    pub const QUAD: Format = Format {
        name: "quad",
        significand_bits: 104,
        emin: -1022,
        emax: 1023,
        unit_roundoff: 4.930380657631324e-32, // 2^-104
        kind: FormatKind::DoubleDouble,
    };

    const fn binary(name: &'static str, t: u32, emin: i32, emax: i32) -> Format {
        // 2^(1-t)/2 = 2^-t, built from the bit pattern so it is exact.
        let unit_roundoff = f64::from_bits(((1023 - t as i64) as u64) << 52);
        Format {
            name,
            significand_bits: t,
            emin,
            emax,
            unit_roundoff,
            kind: FormatKind::Binary,
        }
    }

    /// A user-defined binary format. Only `t <= 24` (simulated through a
    /// binary64 intermediate) or `t == 53` are accepted, and the exponent
    /// range must fit inside binary64's.
    pub fn parametric(name: &'static str, t: u32, emin: i32, emax: i32) -> Result<Format> {
        if !(2..=24).contains(&t) && t != 53 {
            return Err(Error::InvalidArgument(format!(
                "significand bits must be in 2..=24 or exactly 53, got {t}"
            )));
        }
        if emin < -1022 || emax > 1023 || emin >= emax {
            return Err(Error::InvalidArgument(format!(
                "exponent range {emin}..={emax} outside binary64"
            )));
        }
        Ok(Format::binary(name, t, emin, emax))
    }

    /// The built-in formats, loosest first.
    pub fn registry() -> [Format; 5] {
        [Format::HALF, Format::MP4, Format::SINGLE, Format::DOUBLE, Format::QUAD]
    }

    pub fn by_name(name: &str) -> Result<Format> {
        let lower = name.trim().to_ascii_lowercase();
        let key = match lower.as_str() {
            "fp16" | "binary16" => "half",
            "fp32" | "binary32" => "single",
            "fp64" | "binary64" => "double",
            "fp128" | "dd" => "quad",
            other => other,
        };
        Format::registry()
            .into_iter()
            .find(|f| f.name == key)
            .ok_or_else(|| Error::UnknownFormat(name.to_string()))
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn significand_bits(&self) -> u32 {
        self.significand_bits
    }

    pub fn emin(&self) -> i32 {
        self.emin
    }

    pub fn emax(&self) -> i32 {
        self.emax
    }

    pub fn unit_roundoff(&self) -> f64 {
        self.unit_roundoff
    }

    pub fn kind(&self) -> FormatKind {
        self.kind
    }

    pub fn is_quad(&self) -> bool {
        self.kind == FormatKind::DoubleDouble
    }

    /// Largest finite value, `(2 - 2^(1-t)) * 2^emax`.
    pub fn max_finite(&self) -> f64 {
        match self.kind {
            FormatKind::DoubleDouble => f64::MAX,
            FormatKind::Binary => (2.0 - exp2i(1 - self.significand_bits as i32)) * exp2i(self.emax),
        }
    }

    /// Smallest positive subnormal, `2^(emin - t + 1)`.
    pub fn min_subnormal(&self) -> f64 {
        match self.kind {
            FormatKind::DoubleDouble => exp2i(-1074),
            FormatKind::Binary => exp2i(self.emin + 1 - self.significand_bits as i32),
        }
    }

    /// Rounds `v` onto this format's grid without recording exceptions.
    pub fn round(&self, v: f64) -> f64 {
        self.round_raw(v)
    }

    /// Rounds `v`, raising overflow/underflow flags on `status`.
    pub fn round_with(&self, v: f64, status: &Status) -> f64 {
        let r = self.round_raw(v);
        if v.is_finite() {
            if r.is_infinite() {
                status.raise_overflow();
            } else if r != v && r.abs() < exp2i(self.emin) {
                status.raise_underflow();
            }
        }
        r
    }

    fn round_raw(&self, v: f64) -> f64 {
        if self.kind == FormatKind::DoubleDouble || self.significand_bits >= 53 {
            return v;
        }
        if !v.is_finite() || v == 0.0 {
            return v;
        }
        let t = self.significand_bits as i32;
        let a = v.abs();
        let e = exponent_of(a).max(self.emin);
        let quantum = exp2i(e - (t - 1));
        let r = (a / quantum).round_ties_even() * quantum;
        let r = if r > self.max_finite() { f64::INFINITY } else { r };
        r.copysign(v)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// Nearest value of `fmt`'s grid to `v`, ties to even.
pub fn round_to(fmt: Format, v: f64) -> f64 {
    fmt.round(v)
}

/// One rounded elementary operation in `fmt`. `b` is ignored for `Sqrt`.
///
/// For formats with at most 24 significand bits the exact result is
/// approximated by the binary64 result before the final rounding; the
/// double-double format computes it in pair arithmetic.
pub fn fl_op(fmt: Format, op: FpOp, a: f64, b: f64, status: &Status) -> f64 {
    let r = match fmt.kind {
        FormatKind::DoubleDouble => {
            let (x, y) = (QuadValue::from(a), QuadValue::from(b));
            let q = match op {
                FpOp::Add => x + y,
                FpOp::Sub => x - y,
                FpOp::Mul => x * y,
                FpOp::Div => x / y,
                FpOp::Sqrt => x.sqrt(),
            };
            q.hi()
        }
        FormatKind::Binary => {
            let exact = match op {
                FpOp::Add => a + b,
                FpOp::Sub => a - b,
                FpOp::Mul => a * b,
                FpOp::Div => a / b,
                FpOp::Sqrt => a.sqrt(),
            };
            fmt.round_with(exact, status)
        }
    };
    if r.is_nan() && !a.is_nan() && !(op != FpOp::Sqrt && b.is_nan()) {
        status.raise_invalid();
    }
    r
}

/// The four precisions of a mixed-precision solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionConfig {
    /// Working precision: orthogonalization, least squares, updates.
    pub u: Format,
    /// Products with the coefficient matrix.
    pub u_a: Format,
    /// Applications of the left preconditioner.
    pub u_l: Format,
    /// Applications of the right preconditioner.
    pub u_r: Format,
}

impl PrecisionConfig {
    pub fn uniform(fmt: Format) -> Self {
        PrecisionConfig { u: fmt, u_a: fmt, u_l: fmt, u_r: fmt }
    }

    pub fn new(u: Format, u_a: Format, u_l: Format, u_r: Format) -> Self {
        PrecisionConfig { u, u_a, u_l, u_r }
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig::uniform(Format::DOUBLE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_roundoffs_are_exact_powers_of_two() {
        assert_eq!(Format::HALF.unit_roundoff(), 2f64.powi(-11));
        assert_eq!(Format::SINGLE.unit_roundoff(), 2f64.powi(-24));
        assert_eq!(Format::DOUBLE.unit_roundoff(), 2f64.powi(-53));
        assert_eq!(Format::MP4.unit_roundoff(), 2f64.powi(-14));
        assert_eq!(Format::QUAD.unit_roundoff(), 2f64.powi(-104));
    }

    #[test]
    fn registry_lookup() {
        for f in Format::registry() {
            assert_eq!(Format::by_name(f.name()).unwrap(), f);
        }
        assert_eq!(Format::by_name("FP32").unwrap(), Format::SINGLE);
        assert!(matches!(Format::by_name("bfloat16"), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn half_examples() {
        assert_eq!(round_to(Format::HALF, 1.0), 1.0);
        assert_eq!(round_to(Format::HALF, 1.0 + 2f64.powi(-12)), 1.0);
        assert_eq!(round_to(Format::HALF, 1.0 + 3.0 * 2f64.powi(-12)), 1.0 + 2f64.powi(-10));
        assert_eq!(round_to(Format::HALF, 65504.0), 65504.0);
        assert_eq!(round_to(Format::HALF, 65519.99), 65504.0);
        assert_eq!(round_to(Format::HALF, 65520.0), f64::INFINITY);
        assert_eq!(round_to(Format::HALF, -65520.0), f64::NEG_INFINITY);
        assert_eq!(Format::HALF.max_finite(), 65504.0);
        assert_eq!(Format::HALF.min_subnormal(), 2f64.powi(-24));
    }

    #[test]
    fn half_underflow() {
        let tiny = 2f64.powi(-24);
        assert_eq!(round_to(Format::HALF, tiny), tiny);
        // exactly half the smallest subnormal ties to even (zero)
        assert_eq!(round_to(Format::HALF, tiny / 2.0), 0.0);
        assert_eq!(round_to(Format::HALF, -tiny / 2.0).to_bits(), (-0.0f64).to_bits());
        assert_eq!(round_to(Format::HALF, tiny * 0.75), tiny);
        assert_eq!(round_to(Format::HALF, 1e-9), 0.0);
        let status = Status::default();
        Format::HALF.round_with(1e-9, &status);
        assert!(status.underflow());
    }

    #[test]
    fn special_values_propagate() {
        for f in Format::registry() {
            assert!(round_to(f, f64::NAN).is_nan());
            assert_eq!(round_to(f, f64::INFINITY), f64::INFINITY);
            assert_eq!(round_to(f, -0.0).to_bits(), (-0.0f64).to_bits());
        }
    }

    #[test]
    fn fl_op_examples() {
        let st = Status::default();
        assert_eq!(fl_op(Format::DOUBLE, FpOp::Add, 1.0, 2f64.powi(-53), &st), 1.0);
        let x = round_to(Format::SINGLE, 0.3);
        assert_eq!(fl_op(Format::SINGLE, FpOp::Add, x, 0.0, &st), x);
        let tenth = round_to(Format::HALF, 0.1);
        // tenth * 10 = 1 - 2^-12 exactly, a tie between 1 - 2^-11 and 1;
        // ties-to-even picks 1
        assert_eq!(tenth * 10.0, 1.0 - 2f64.powi(-12));
        let p = fl_op(Format::HALF, FpOp::Mul, tenth, 10.0, &st);
        assert_eq!(p, 1.0);
        assert!((p - tenth * 10.0).abs() <= 2f64.powi(-11) * (tenth * 10.0));
        let eleventh = round_to(Format::HALF, 1.0 / 11.0);
        assert_eq!(fl_op(Format::HALF, FpOp::Mul, eleventh, 11.0, &st), 0.99951171875);
        assert!(!st.any());
        let q = fl_op(Format::HALF, FpOp::Div, 1.0, 0.0, &st);
        assert_eq!(q, f64::INFINITY);
        let n = fl_op(Format::HALF, FpOp::Sub, f64::INFINITY, f64::INFINITY, &st);
        assert!(n.is_nan());
        assert!(st.invalid());
    }

    #[test]
    fn parametric_rejects_unsupported_widths() {
        assert!(Format::parametric("t30", 30, -100, 100).is_err());
        assert!(Format::parametric("t8", 8, -6, 7).is_ok());
    }
}
