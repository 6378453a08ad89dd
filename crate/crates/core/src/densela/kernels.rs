//! Vector kernels in a chosen format. Accumulation is always left to right.

use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::precision::{Arith, Format, QuadValue, Status};
use crate::with_arith;

pub(crate) fn load_vec<A: Arith>(ar: &A, x: &[f64]) -> Vec<A::S> {
    x.iter().map(|&v| ar.load(v)).collect()
}

pub(crate) fn store_vec<A: Arith>(ar: &A, x: &[A::S]) -> Vec<f64> {
    x.iter().map(|&v| ar.store(v)).collect()
}

pub(crate) fn matvec_s<A: Arith>(ar: &A, a: &DenseMatrix, x: &[A::S]) -> Vec<A::S> {
    (0..a.rows())
        .map(|i| {
            let row = a.row(i);
            let mut acc = ar.mul(ar.load(row[0]), x[0]);
            for j in 1..a.cols() {
                acc = ar.add(acc, ar.mul(ar.load(row[j]), x[j]));
            }
            acc
        })
        .collect()
}

pub(crate) fn dot_s<A: Arith>(ar: &A, x: &[A::S], y: &[A::S]) -> A::S {
    let mut acc = ar.zero();
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let p = ar.mul(a, b);
        acc = if i == 0 { p } else { ar.add(acc, p) };
    }
    acc
}

pub(crate) fn nrm2_s<A: Arith>(ar: &A, x: &[A::S]) -> A::S {
    ar.sqrt(dot_s(ar, x, x))
}

/// `A x` with every product and sum rounded to `fmt`; `A` and `x` are
/// rounded to `fmt` on entry.
pub fn matvec(fmt: Format, a: &DenseMatrix, x: &[f64], status: &Status) -> Result<Vec<f64>> {
    if a.cols() != x.len() {
        return Err(Error::Dimension(format!(
            "matvec: {}x{} matrix with vector of length {}",
            a.rows(),
            a.cols(),
            x.len()
        )));
    }
    Ok(with_arith!(fmt, status, |ar| {
        let xs = load_vec(&ar, x);
        store_vec(&ar, &matvec_s(&ar, a, &xs))
    }))
}

pub fn dot(fmt: Format, x: &[f64], y: &[f64], status: &Status) -> f64 {
    assert_eq!(x.len(), y.len());
    with_arith!(fmt, status, |ar| {
        let (xs, ys) = (load_vec(&ar, x), load_vec(&ar, y));
        ar.store(dot_s(&ar, &xs, &ys))
    })
}

/// `sqrt(x . x)` in `fmt`, no scaling.
pub fn nrm2(fmt: Format, x: &[f64], status: &Status) -> f64 {
    with_arith!(fmt, status, |ar| {
        let xs = load_vec(&ar, x);
        ar.store(nrm2_s(&ar, &xs))
    })
}

/// `x - y` elementwise in `fmt`.
pub fn sub(fmt: Format, x: &[f64], y: &[f64], status: &Status) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    with_arith!(fmt, status, |ar| {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| ar.store(ar.sub(ar.load(a), ar.load(b))))
            .collect()
    })
}

/// `x / alpha` elementwise in `fmt`.
pub fn scale_div(fmt: Format, x: &[f64], alpha: f64, status: &Status) -> Vec<f64> {
    with_arith!(fmt, status, |ar| {
        let d = ar.load(alpha);
        x.iter().map(|&a| ar.store(ar.div(ar.load(a), d))).collect()
    })
}

/// `x0 + sum_j y_j z_j` in `fmt`, each entry accumulated over `j` in order.
pub fn combine(fmt: Format, x0: &[f64], columns: &[Vec<f64>], y: &[f64], status: &Status) -> Vec<f64> {
    assert_eq!(columns.len(), y.len());
    with_arith!(fmt, status, |ar| {
        let ys = load_vec(&ar, y);
        (0..x0.len())
            .map(|i| {
                let mut acc = ar.load(x0[i]);
                for (col, &yj) in columns.iter().zip(&ys) {
                    acc = ar.add(acc, ar.mul(ar.load(col[i]), yj));
                }
                ar.store(acc)
            })
            .collect()
    })
}

/// One modified Gram-Schmidt sweep of `w` against the columns of `basis`.
///
/// Returns the orthogonalized vector and the coefficients `h_i = v_i^T w`
/// (each computed against the partially updated `w`).
pub fn mgs_orthogonalize(fmt: Format, w: &[f64], basis: &[Vec<f64>], status: &Status) -> (Vec<f64>, Vec<f64>) {
    with_arith!(fmt, status, |ar| {
        let mut ws = load_vec(&ar, w);
        let mut h = Vec::with_capacity(basis.len());
        for v in basis {
            let vs = load_vec(&ar, v);
            let hi = dot_s(&ar, &vs, &ws);
            for (wj, &vj) in ws.iter_mut().zip(&vs) {
                *wj = ar.sub(*wj, ar.mul(hi, vj));
            }
            h.push(ar.store(hi));
        }
        (store_vec(&ar, &ws), h)
    })
}

/// A plane rotation `[c s; -s c]` taking `(a, b)` to `(r, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Givens {
    pub c: f64,
    pub s: f64,
    pub r: f64,
}

impl Givens {
    /// The stability hypothesis on computed sines, `|s| < 1 - u`.
    pub fn sine_within(&self, u: f64) -> bool {
        self.s.abs() < 1.0 - u
    }
}

pub(crate) fn givens_s<A: Arith>(ar: &A, a: A::S, b: A::S) -> (A::S, A::S, A::S) {
    if ar.is_zero(a) && ar.is_zero(b) {
        return (ar.load(1.0), ar.zero(), ar.zero());
    }
    let r = ar.sqrt(ar.add(ar.mul(a, a), ar.mul(b, b)));
    (ar.div(a, r), ar.div(b, r), r)
}

/// Rotation annihilating `b`, computed in `fmt` as `r = sqrt(a^2 + b^2)`,
/// `c = a / r`, `s = b / r`. `(0, 0)` gives the identity rotation.
pub fn givens(fmt: Format, a: f64, b: f64, status: &Status) -> Givens {
    with_arith!(fmt, status, |ar| {
        let (c, s, r) = givens_s(&ar, ar.load(a), ar.load(b));
        Givens { c: ar.store(c), s: ar.store(s), r: ar.store(r) }
    })
}

/// Like [`givens`] but fails when the computed sine violates `|s| < 1 - u`.
pub fn givens_checked(fmt: Format, a: f64, b: f64, status: &Status) -> Result<Givens> {
    let g = givens(fmt, a, b, status);
    if g.sine_within(fmt.unit_roundoff()) {
        Ok(g)
    } else {
        Err(Error::AssumptionViolated(format!(
            "Givens sine |s| = {} >= 1 - u",
            g.s.abs()
        )))
    }
}

/// Compensated 2-norm: scaled sum of squares accumulated in double-double.
pub fn norm2(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let scale = pow2_scale(scale);
    let mut acc = QuadValue::ZERO;
    for &v in x {
        let s = QuadValue::from(v / scale);
        acc = acc + s * s;
    }
    acc.sqrt().to_f64() * scale
}

/// Power of two near `m`, so scaling by it is exact.
fn pow2_scale(m: f64) -> f64 {
    let e = crate::precision::exponent_of(m).clamp(-1000, 1000);
    crate::precision::exp2i(e)
}

/// 2-norm of a double-double vector.
pub fn norm2_quad(x: &[QuadValue]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.hi().abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let scale = pow2_scale(scale);
    let inv = 1.0 / scale;
    let mut acc = QuadValue::ZERO;
    for &v in x {
        let s = v.mul_f64(inv);
        acc = acc + s * s;
    }
    acc.sqrt().to_f64() * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::round_to;

    #[test]
    fn matvec_identity_and_absorption() {
        let st = Status::default();
        let i3 = DenseMatrix::identity(3);
        assert_eq!(matvec(Format::DOUBLE, &i3, &[1.0, 2.0, 3.0], &st).unwrap(), vec![1.0, 2.0, 3.0]);
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let y = matvec(Format::HALF, &a, &[1.0, 2f64.powi(-12)], &st).unwrap();
        assert_eq!(y, vec![1.0]);
        assert!(matvec(Format::HALF, &a, &[1.0], &st).is_err());
    }

    #[test]
    fn matvec_rounds_inputs() {
        let st = Status::default();
        let a = DenseMatrix::from_rows(&[vec![0.1]]).unwrap();
        let y = matvec(Format::SINGLE, &a, &[1.0], &st).unwrap();
        assert_eq!(y[0], round_to(Format::SINGLE, 0.1));
    }

    #[test]
    fn mgs_orthogonal_input_unchanged() {
        let st = Status::default();
        let basis = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let (w, h) = mgs_orthogonalize(Format::DOUBLE, &[0.0, 0.0, 5.0], &basis, &st);
        assert_eq!(h, vec![0.0, 0.0]);
        assert_eq!(w, vec![0.0, 0.0, 5.0]);
    }

    #[test]
    fn mgs_self_projection() {
        let st = Status::default();
        for fmt in [Format::HALF, Format::SINGLE, Format::DOUBLE] {
            let s = round_to(fmt, 0.6);
            let c = round_to(fmt, 0.8);
            let v = vec![s, c];
            let (w, h) = mgs_orthogonalize(fmt, &v, std::slice::from_ref(&v), &st);
            let u = fmt.unit_roundoff();
            assert!((h[0] - 1.0).abs() <= 4.0 * u, "{fmt}: h = {}", h[0]);
            assert!(norm2(&w) <= 8.0 * u, "{fmt}: |w'| = {}", norm2(&w));
        }
    }

    #[test]
    fn givens_examples() {
        let st = Status::default();
        assert_eq!(givens(Format::DOUBLE, 3.0, 4.0, &st), Givens { c: 0.6, s: 0.8, r: 5.0 });
        assert_eq!(givens(Format::DOUBLE, 1.0, 0.0, &st), Givens { c: 1.0, s: 0.0, r: 1.0 });
        assert_eq!(givens(Format::DOUBLE, 0.0, 1.0, &st), Givens { c: 0.0, s: 1.0, r: 1.0 });
        assert_eq!(givens(Format::DOUBLE, 0.0, 0.0, &st), Givens { c: 1.0, s: 0.0, r: 0.0 });
        assert!(givens_checked(Format::DOUBLE, 0.0, 1.0, &st).is_err());
        assert!(givens_checked(Format::DOUBLE, 3.0, 4.0, &st).is_ok());
    }

    #[test]
    fn givens_annihilates() {
        let st = Status::default();
        for &(a, b) in &[(1.5, -2.25), (-1e-3, 7.0), (1e5, 3e-4)] {
            for fmt in [Format::SINGLE, Format::DOUBLE] {
                let (a, b) = (round_to(fmt, a), round_to(fmt, b));
                let g = givens(fmt, a, b, &st);
                let u = fmt.unit_roundoff();
                let scale = a.abs().max(b.abs());
                assert!((g.c * a + g.s * b - g.r).abs() <= 8.0 * u * scale);
                assert!((-g.s * a + g.c * b).abs() <= 8.0 * u * scale);
                assert!((g.c * g.c + g.s * g.s - 1.0).abs() <= 8.0 * u);
            }
        }
    }

    #[test]
    fn norm2_examples() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(norm2(&[0.0, 0.0]), 0.0);
        // the stored inputs are not exactly 3k and 4k; an exact rational
        // comparison puts the true norm just below the midpoint under 5e200
        assert_eq!(norm2(&[3e200, 4e200]), 4.9999999999999995e200);
        assert_eq!(norm2(&[3.0 * 2f64.powi(600), 4.0 * 2f64.powi(600)]), 5.0 * 2f64.powi(600));
        assert_eq!(norm2_quad(&[QuadValue::from(3.0), QuadValue::from(-4.0)]), 5.0);
    }
}
