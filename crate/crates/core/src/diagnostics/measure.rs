use crate::densela::{matvec_quad, norm2_quad, DenseMatrix};
use crate::fgmres::{Preconditioner, SolveReport};
use crate::precision::{two_prod, two_sum, PrecisionConfig, QuadValue};

fn to_quad(v: &[f64]) -> Vec<QuadValue> {
    v.iter().map(|&x| QuadValue::from(x)).collect()
}

/// `b - A x` in double-double.
pub fn residual_quad(a: &DenseMatrix, b: &[f64], x: &[f64]) -> Vec<QuadValue> {
    let ax = matvec_quad(a, &to_quad(x));
    b.iter().zip(ax).map(|(&bi, axi)| QuadValue::from(bi) - axi).collect()
}

/// `||b - A x|| / (||A|| ||x|| + ||b||)` with the residual in double-double.
pub fn backward_error(a: &DenseMatrix, b: &[f64], x: &[f64], norm_a: f64) -> f64 {
    let r = norm2_quad(&residual_quad(a, b, x));
    let denom = norm_a * crate::densela::norm2(x) + crate::densela::norm2(b);
    if denom == 0.0 {
        return if r == 0.0 { 0.0 } else { f64::INFINITY };
    }
    r / denom
}

/// Backward error of the left-preconditioned system `M_L^{-1} A x = M_L^{-1} b`,
/// with `M_L^{-1}` applied in double-double. Returns `(error, ||b~ - A~ x||, ||b~||)`.
pub fn backward_error_leftprec(
    a: &DenseMatrix,
    b: &[f64],
    x: &[f64],
    precond: &Preconditioner,
    norm_a_tilde: f64,
) -> (f64, f64, f64) {
    let r = residual_quad(a, b, x);
    let (pr, pb) = match (precond.left.apply_inv_quad(r), precond.left.apply_inv_quad(to_quad(b))) {
        (Ok(pr), Ok(pb)) => (pr, pb),
        _ => return (f64::NAN, f64::NAN, f64::NAN),
    };
    let (nr, nb) = (norm2_quad(&pr), norm2_quad(&pb));
    let denom = nb + norm_a_tilde * crate::densela::norm2(x);
    let be = if denom == 0.0 { if nr == 0.0 { 0.0 } else { f64::INFINITY } } else { nr / denom };
    (be, nr, nb)
}

/// Residual norm by the compensated dot product (Dot2), independent of
/// the double-double type.
pub fn residual_norm_compensated(a: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let r: Vec<f64> = (0..a.rows())
        .map(|i| {
            let (mut s, mut c) = (b[i], 0.0);
            for (&aij, &xj) in a.row(i).iter().zip(x) {
                let (p, pe) = two_prod(-aij, xj);
                let (t, te) = two_sum(s, p);
                s = t;
                c += te + pe;
            }
            s + c
        })
        .collect();
    crate::densela::norm2(&r)
}

pub fn backward_error_compensated(a: &DenseMatrix, b: &[f64], x: &[f64], norm_a: f64) -> f64 {
    let r = residual_norm_compensated(a, b, x);
    r / (norm_a * crate::densela::norm2(x) + crate::densela::norm2(b))
}

/// `||x - x_ref|| / ||x_ref||` in double-double.
pub fn forward_error(x: &[f64], x_ref: &[QuadValue]) -> f64 {
    let d: Vec<QuadValue> = x.iter().zip(x_ref).map(|(&xi, &ri)| QuadValue::from(xi) - ri).collect();
    norm2_quad(&d) / norm2_quad(x_ref)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PsiSamples {
    pub psi_a: Vec<f64>,
    pub psi_l: Vec<f64>,
}

impl PsiSamples {
    pub fn max_a(&self) -> f64 {
        self.psi_a.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_l(&self) -> f64 {
        self.psi_l.iter().fold(0.0, |m, &v| m.max(v))
    }
}

/// Per-iteration normalized rounding errors of the product with `A` and
/// of the `M_L^{-1}` application, measured against double-double oracles.
pub fn measure_psi(
    a: &DenseMatrix,
    report: &SolveReport,
    precond: &Preconditioner,
    cfg: &PrecisionConfig,
    norm_a_tilde: f64,
) -> PsiSamples {
    let (ua, ul) = (cfg.u_a.unit_roundoff(), cfg.u_l.unit_roundoff());
    let identity_left = precond.left.is_identity();
    let mut out = PsiSamples::default();
    for rec in &report.records {
        let nz = crate::densela::norm2(&rec.z);
        if nz == 0.0 {
            continue;
        }
        let scale = norm_a_tilde * nz;
        let exact = matvec_quad(a, &to_quad(&rec.z));
        let diff: Vec<QuadValue> = rec.s.iter().zip(&exact).map(|(&s, &e)| QuadValue::from(s) - e).collect();
        let e_a = match precond.left.apply_inv_quad(diff) {
            Ok(v) => norm2_quad(&v),
            Err(_) => f64::NAN,
        };
        out.psi_a.push(e_a / (ua * scale));

        if identity_left {
            out.psi_l.push(0.0);
            continue;
        }
        let e_l = match precond.left.apply_inv_quad(to_quad(&rec.s)) {
            Ok(w) => {
                let d: Vec<QuadValue> = rec.w.iter().zip(&w).map(|(&x, &y)| QuadValue::from(x) - y).collect();
                norm2_quad(&d)
            }
            Err(_) => f64::NAN,
        };
        out.psi_l.push(e_l / (ul * scale));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgmres::{solve, SolveOptions};

    #[test]
    fn backward_error_trivial_cases() {
        let a = DenseMatrix::identity(3);
        let b = [1.0, 2.0, 3.0];
        assert_eq!(backward_error(&a, &b, &b, 1.0), 0.0);
        assert_eq!(backward_error(&a, &b, &[0.0; 3], 1.0), 1.0);
    }

    #[test]
    fn forward_error_trivial_cases() {
        let r: Vec<QuadValue> = [1.0, -2.0, 0.5].iter().map(|&v| QuadValue::from(v)).collect();
        assert_eq!(forward_error(&[1.0, -2.0, 0.5], &r), 0.0);
        assert!((forward_error(&[2.0, -4.0, 1.0], &r) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_for_identity_left_side() {
        let a = DenseMatrix::identity(5);
        let b = [1.0, 0.3, -0.7, 2.0, 0.1];
        let cfg = PrecisionConfig::default();
        let rep = solve(&a, &b, &Preconditioner::identity(), &cfg, &SolveOptions::default()).unwrap();
        let psi = measure_psi(&a, &rep, &Preconditioner::identity(), &cfg, 1.0);
        assert_eq!(psi.max_l(), 0.0);
        assert!(psi.max_a() <= 5.0);
    }

    #[test]
    fn compensated_residual_matches_quad() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1e-8, 3.0], vec![-2.0, 0.25, 1e5], vec![0.1, 0.2, 0.3]]).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = [0.3, -0.1, 1e-5];
        let q = norm2_quad(&residual_quad(&a, &b, &x));
        let c = residual_norm_compensated(&a, &b, &x);
        assert!((q - c).abs() <= 1e-12 * q);
    }
}
