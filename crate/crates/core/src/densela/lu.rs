//! LU with partial pivoting and triangular substitution in a chosen format.

use crate::densela::kernels::{load_vec, store_vec};
use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::precision::{Arith, Format, QuadArith, QuadValue, Status};
use crate::with_arith;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

/// `P A = L U` with `L` unit lower triangular.
#[derive(Debug, Clone)]
pub struct LUFactors {
    pub l: DenseMatrix,
    pub u: DenseMatrix,
    /// `perm[i]` is the row of `A` that ends up in row `i` of `P A`.
    pub perm: Vec<usize>,
    pub factor_format: Format,
}

impl LUFactors {
    pub fn n(&self) -> usize {
        self.l.rows()
    }

    /// `P v`.
    pub fn permute<T: Copy>(&self, v: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| v[p]).collect()
    }

    /// `P^T v`.
    pub fn permute_t<T: Copy + Default>(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); v.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = v[i];
        }
        out
    }

    /// `P^T L U` in binary64.
    pub fn reconstruct(&self) -> DenseMatrix {
        let lu = self.l.matmul(&self.u).expect("square factors");
        let mut out = DenseMatrix::zeros(lu.rows(), lu.cols());
        for (i, &p) in self.perm.iter().enumerate() {
            out.row_mut(p).copy_from_slice(lu.row(i));
        }
        out
    }

    /// `A^{-1} b` with both substitutions in `fmt`.
    pub fn solve(&self, fmt: Format, b: &[f64], status: &Status) -> Result<Vec<f64>> {
        with_arith!(fmt, status, |ar| {
            let pb = load_vec(&ar, &self.permute(b));
            let y = tri_solve_s(&ar, &self.l, pb, Triangle::Lower)?;
            let x = tri_solve_s(&ar, &self.u, y, Triangle::Upper)?;
            Ok(store_vec(&ar, &x))
        })
    }

    /// `A^{-T} b` in binary64.
    pub fn solve_t(&self, b: &[f64]) -> Result<Vec<f64>> {
        let y = tri_solve_t_f64(&self.u, b, Triangle::Upper)?;
        let z = tri_solve_t_f64(&self.l, &y, Triangle::Lower)?;
        Ok(self.permute_t(&z))
    }
}

pub(crate) fn singular(fmt: Format, index: usize) -> Error {
    Error::SingularInFormat { format: fmt.name().to_string(), index }
}

/// Packed in-place LU of `a` in the arithmetic `ar`. Returns the packed
/// factors (unit-L below the diagonal, U on and above) and the row order.
pub(crate) fn lu_factor_s<A: Arith>(ar: &A, a: &DenseMatrix) -> Result<(Vec<A::S>, Vec<usize>)> {
    let n = a.rows();
    let mut w: Vec<A::S> = a.data().iter().map(|&v| ar.load(v)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = ar.to_f64(ar.abs(w[k * n + k]));
        for i in k + 1..n {
            let cand = ar.to_f64(ar.abs(w[i * n + k]));
            if cand > best {
                best = cand;
                p = i;
            }
        }
        if best == 0.0 || best.is_nan() {
            return Err(singular(ar.format(), k));
        }
        if p != k {
            for j in 0..n {
                w.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = w[k * n + k];
        for i in k + 1..n {
            let l = ar.div(w[i * n + k], pivot);
            w[i * n + k] = l;
            if ar.is_zero(l) {
                continue;
            }
            for j in k + 1..n {
                w[i * n + j] = ar.sub(w[i * n + j], ar.mul(l, w[k * n + j]));
            }
        }
    }
    Ok((w, perm))
}

/// Right-looking Gaussian elimination with partial pivoting, every
/// operation rounded to `fmt`. `A` is rounded to `fmt` first.
pub fn lu_factor(fmt: Format, a: &DenseMatrix, status: &Status) -> Result<LUFactors> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("LU of non-square {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let (packed, perm) = with_arith!(fmt, status, |ar| {
        let (w, perm) = lu_factor_s(&ar, a)?;
        Ok::<_, Error>((store_vec(&ar, &w), perm))
    })?;
    let mut l = DenseMatrix::identity(n);
    let mut u = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = packed[i * n + j];
            if j < i {
                l[(i, j)] = v;
            } else {
                u[(i, j)] = v;
            }
        }
    }
    Ok(LUFactors { l, u, perm, factor_format: fmt })
}

pub(crate) fn tri_solve_s<A: Arith>(ar: &A, t: &DenseMatrix, mut x: Vec<A::S>, side: Triangle) -> Result<Vec<A::S>> {
    let n = t.rows();
    let order: Box<dyn Iterator<Item = usize>> = match side {
        Triangle::Lower => Box::new(0..n),
        Triangle::Upper => Box::new((0..n).rev()),
    };
    for i in order {
        let row = t.row(i);
        let range = match side {
            Triangle::Lower => 0..i,
            Triangle::Upper => i + 1..n,
        };
        let mut acc = x[i];
        for j in range {
            if row[j] != 0.0 {
                acc = ar.sub(acc, ar.mul(ar.load(row[j]), x[j]));
            }
        }
        let d = ar.load(row[i]);
        if ar.is_zero(d) {
            return Err(singular(ar.format(), i));
        }
        x[i] = if row[i] == 1.0 { acc } else { ar.div(acc, d) };
    }
    Ok(x)
}

/// Substitution with `T` (lower or upper) in `fmt`. `T` and `b` are rounded
/// to `fmt` on entry; a diagonal entry that rounds to zero is an error.
pub fn tri_solve(fmt: Format, t: &DenseMatrix, b: &[f64], side: Triangle, status: &Status) -> Result<Vec<f64>> {
    if !t.is_square() || t.rows() != b.len() {
        return Err(Error::Dimension("triangular solve dimensions".into()));
    }
    with_arith!(fmt, status, |ar| {
        let x = tri_solve_s(&ar, t, load_vec(&ar, b), side)?;
        Ok(store_vec(&ar, &x))
    })
}

/// Solve `T^T x = b` in binary64.
pub fn tri_solve_t_f64(t: &DenseMatrix, b: &[f64], side: Triangle) -> Result<Vec<f64>> {
    let n = t.rows();
    let mut x = b.to_vec();
    // T^T of an upper triangle is lower: forward substitution by columns.
    match side {
        Triangle::Upper => {
            for i in 0..n {
                let mut acc = x[i];
                for j in 0..i {
                    acc -= t[(j, i)] * x[j];
                }
                if t[(i, i)] == 0.0 {
                    return Err(singular(Format::DOUBLE, i));
                }
                x[i] = acc / t[(i, i)];
            }
        }
        Triangle::Lower => {
            for i in (0..n).rev() {
                let mut acc = x[i];
                for j in i + 1..n {
                    acc -= t[(j, i)] * x[j];
                }
                if t[(i, i)] == 0.0 {
                    return Err(singular(Format::DOUBLE, i));
                }
                x[i] = acc / t[(i, i)];
            }
        }
    }
    Ok(x)
}

/// Double-double substitution with a binary64 triangle.
pub fn tri_solve_quad(t: &DenseMatrix, b: Vec<QuadValue>, side: Triangle) -> Result<Vec<QuadValue>> {
    let status = Status::default();
    tri_solve_s(&QuadArith::new(&status), t, b, side)
}

/// Double-double `T x` for a binary64 matrix.
pub fn matvec_quad(a: &DenseMatrix, x: &[QuadValue]) -> Vec<QuadValue> {
    (0..a.rows())
        .map(|i| {
            let mut acc = QuadValue::ZERO;
            for (&aij, &xj) in a.row(i).iter().zip(x) {
                if aij != 0.0 {
                    acc = acc + xj.mul_f64(aij);
                }
            }
            acc
        })
        .collect()
}

/// `|T^{-1}|` formed column by column with binary64 substitution.
pub fn abs_inverse(t: &DenseMatrix, side: Triangle) -> Result<DenseMatrix> {
    Ok(inverse_triangular(t, side)?.abs())
}

/// `T^{-1}` formed column by column with binary64 substitution.
pub fn inverse_triangular(t: &DenseMatrix, side: Triangle) -> Result<DenseMatrix> {
    let n = t.rows();
    let status = Status::default();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(tri_solve(Format::DOUBLE, t, &e, side, &status)?);
    }
    DenseMatrix::from_columns(&cols)
}
