//! Simulated floating-point formats.
//!
//! Values are always stored as `f64`. A [`Format`] only constrains the
//! arithmetic: every elementary result is rounded onto the format's grid
//! (round to nearest, ties to even, gradual underflow, overflow to ±∞).
//! The quad format is a double-double pair type, [`QuadValue`].

mod arith;
mod format;
mod quad;

pub use arith::{Arith, FpOp, QuadArith, Rounded, Status};
pub use format::{fl_op, round_to, Format, FormatKind, PrecisionConfig};
pub(crate) use format::{exp2i, exponent_of};
pub use quad::{quad_add, quad_div, quad_mul, quad_sub, two_prod, two_sum, QuadValue};

/// Runs `$body` with `$ar` bound to the arithmetic context for `$fmt`.
///
/// Kernels are written once, generic over [`Arith`]; this picks the
/// rounded-binary64 or double-double implementation at run time.
#[macro_export]
macro_rules! with_arith {
    ($fmt:expr, $status:expr, |$ar:ident| $body:expr) => {{
        let fmt: $crate::precision::Format = $fmt;
        match fmt.kind() {
            $crate::precision::FormatKind::DoubleDouble => {
                let $ar = $crate::precision::QuadArith::new($status);
                $body
            }
            $crate::precision::FormatKind::Binary => {
                let $ar = $crate::precision::Rounded::new(fmt, $status);
                $body
            }
        }
    }};
}
