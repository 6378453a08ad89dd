use std::fmt;
use std::str::FromStr;

use crate::densela::{load_vec, matvec_quad, store_vec, tri_solve_s, LUFactors, Triangle};
use crate::error::{Error, Result};
use crate::precision::{Arith, Format, QuadArith, QuadValue, Status};
use crate::with_arith;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    None,
    Left,
    Right,
    Split,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::None => "none",
            Mode::Left => "left",
            Mode::Right => "right",
            Mode::Split => "split",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Mode::None),
            "left" => Ok(Mode::Left),
            "right" => Ok(Mode::Right),
            "split" => Ok(Mode::Split),
            other => Err(Error::InvalidArgument(format!("unknown preconditioning mode `{other}`"))),
        }
    }
}

/// One side of a split preconditioner, `M_L` or `M_R`.
#[derive(Debug, Clone)]
pub enum Side {
    Identity,
    /// `M = P^T L`: inverse applied as `L^{-1} P`.
    PermutedLower(LUFactors),
    /// `M = U`.
    Upper(LUFactors),
    /// `M = P^T L U`.
    Full(LUFactors),
}

impl Side {
    pub fn is_identity(&self) -> bool {
        matches!(self, Side::Identity)
    }

    pub(crate) fn apply_inv_s<A: Arith>(&self, ar: &A, v: Vec<A::S>) -> Result<Vec<A::S>> {
        match self {
            Side::Identity => Ok(v),
            Side::PermutedLower(f) => tri_solve_s(ar, &f.l, f.permute(&v), Triangle::Lower),
            Side::Upper(f) => tri_solve_s(ar, &f.u, v, Triangle::Upper),
            Side::Full(f) => {
                let y = tri_solve_s(ar, &f.l, f.permute(&v), Triangle::Lower)?;
                tri_solve_s(ar, &f.u, y, Triangle::Upper)
            }
        }
    }

    /// `M^{-1} v` with all arithmetic in `fmt`. The identity side returns
    /// `v` untouched (no rounding).
    pub fn apply_inv(&self, fmt: Format, v: &[f64], status: &Status) -> Result<Vec<f64>> {
        if self.is_identity() {
            return Ok(v.to_vec());
        }
        with_arith!(fmt, status, |ar| {
            let out = self.apply_inv_s(&ar, load_vec(&ar, v))?;
            Ok(store_vec(&ar, &out))
        })
    }

    /// `M^{-1} v` in double-double.
    pub fn apply_inv_quad(&self, v: Vec<QuadValue>) -> Result<Vec<QuadValue>> {
        let status = Status::default();
        self.apply_inv_s(&QuadArith::new(&status), v)
    }

    /// `M v` in double-double.
    pub fn apply_quad(&self, v: &[QuadValue]) -> Vec<QuadValue> {
        match self {
            Side::Identity => v.to_vec(),
            Side::PermutedLower(f) => {
                let lv = matvec_quad(&f.l, v);
                permute_t_quad(f, &lv)
            }
            Side::Upper(f) => matvec_quad(&f.u, v),
            Side::Full(f) => {
                let uv = matvec_quad(&f.u, v);
                let luv = matvec_quad(&f.l, &uv);
                permute_t_quad(f, &luv)
            }
        }
    }
}

fn permute_t_quad(f: &LUFactors, v: &[QuadValue]) -> Vec<QuadValue> {
    let mut out = vec![QuadValue::ZERO; v.len()];
    for (i, &p) in f.perm.iter().enumerate() {
        out[p] = v[i];
    }
    out
}

/// `P = M_L M_R`.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub mode: Mode,
    pub left: Side,
    pub right: Side,
}

impl Preconditioner {
    pub fn identity() -> Self {
        Preconditioner { mode: Mode::None, left: Side::Identity, right: Side::Identity }
    }

    /// LU preconditioner: split uses `M_L = P^T L`, `M_R = U`; left and
    /// right put the whole product on one side.
    pub fn from_lu(factors: LUFactors, mode: Mode) -> Self {
        let (left, right) = match mode {
            Mode::None => (Side::Identity, Side::Identity),
            Mode::Left => (Side::Full(factors), Side::Identity),
            Mode::Right => (Side::Identity, Side::Full(factors)),
            Mode::Split => (Side::PermutedLower(factors.clone()), Side::Upper(factors)),
        };
        Preconditioner { mode, left, right }
    }

    /// Explicit sides; `mode` is only a label.
    pub fn from_sides(mode: Mode, left: Side, right: Side) -> Self {
        Preconditioner { mode, left, right }
    }

    pub fn factors(&self) -> Option<&LUFactors> {
        for side in [&self.left, &self.right] {
            match side {
                Side::Identity => {}
                Side::PermutedLower(f) | Side::Upper(f) | Side::Full(f) => return Some(f),
            }
        }
        None
    }
}
