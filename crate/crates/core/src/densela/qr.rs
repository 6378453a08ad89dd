use crate::densela::kernels::norm2;
use crate::densela::DenseMatrix;
use crate::error::{Error, Result};

/// Thin Householder QR in binary64: `A = Q R` with `Q` of size `m x n`
/// having orthonormal columns and `R` upper triangular with nonnegative
/// diagonal.
pub fn householder_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Dimension(format!("QR needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x: Vec<f64> = (k..m).map(|i| w[(i, k)]).collect();
        let alpha = norm2(&x);
        let mut v = x;
        if alpha == 0.0 {
            reflectors.push(vec![0.0; m - k]);
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let nv = norm2(&v);
        v.iter_mut().for_each(|e| *e /= nv);
        for j in k..n {
            let dotp: f64 = (k..m).map(|i| v[i - k] * w[(i, j)]).sum();
            for i in k..m {
                w[(i, j)] -= 2.0 * v[i - k] * dotp;
            }
        }
        reflectors.push(v);
    }

    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = w[(i, j)];
        }
    }
    // Q = H_1 H_2 ... H_n applied to the first n columns of I.
    let mut q = DenseMatrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        for j in 0..n {
            let dotp: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            if dotp != 0.0 {
                for i in k..m {
                    q[(i, j)] -= 2.0 * v[i - k] * dotp;
                }
            }
        }
    }
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_and_orthonormal() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, -1.0, 0.5],
            vec![1.0, 3.0, -2.0],
            vec![0.0, 1.0, 4.0],
            vec![-1.0, 0.5, 1.0],
        ])
        .unwrap();
        let (q, r) = householder_qr(&a).unwrap();
        assert!(q.matmul(&r).unwrap().max_abs_diff(&a) < 1e-14);
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(3)) < 1e-15);
        for k in 0..3 {
            assert!(r[(k, k)] > 0.0);
        }
    }
}
