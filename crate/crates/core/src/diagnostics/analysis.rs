use crate::densela::{inverse_triangular, lu_factor, DenseMatrix, Factor, LUFactors, LinearOp, Triangle};
use crate::error::Result;
use crate::fgmres::{Preconditioner, Side, NORM_SEED};
use crate::precision::{Format, Status};

/// Per-problem, per-preconditioner quantities that do not depend on the
/// precisions of a run. All norms are 2-norms estimated by power iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PreconditionerAnalysis {
    pub n: usize,
    pub norm_a: f64,
    pub kappa_a: f64,
    /// `||M_L^{-1} A||`.
    pub norm_a_tilde: f64,
    pub kappa_a_tilde: f64,
    /// `kappa(M_L^{-1} A M_R^{-1})`.
    pub kappa_a_hat: f64,
    pub kappa_ml: f64,
    pub kappa_mr: f64,
    pub norm_mr: f64,
    pub norm_mr_inv: f64,
    pub norm_el_ml: f64,
    pub norm_er: f64,
    /// The cheap surrogate for `||E_R|| / ||M_R^{-1}||` built from
    /// `| |T^{-1}| |T| |` products of the factors.
    pub er_ratio_approx: f64,
    pub psi_a_bound: f64,
    pub psi_l_bound: f64,
}

impl PreconditionerAnalysis {
    /// `||E_R|| / ||M_R^{-1}||`, zero for an identity right side.
    pub fn er_ratio(&self) -> f64 {
        if self.norm_er == 0.0 {
            0.0
        } else {
            self.norm_er / self.norm_mr_inv
        }
    }
}

/// Explicit inverses of the triangular factors, with absolute values.
struct Inverses {
    li: DenseMatrix,
    ui: DenseMatrix,
    uili: DenseMatrix,
    abs_l: DenseMatrix,
    abs_u: DenseMatrix,
    abs_li: DenseMatrix,
    abs_ui: DenseMatrix,
    abs_uili: DenseMatrix,
}

impl Inverses {
    fn new(f: &LUFactors) -> Result<Self> {
        let li = inverse_triangular(&f.l, Triangle::Lower)?;
        let ui = inverse_triangular(&f.u, Triangle::Upper)?;
        let uili = ui.matmul(&li)?;
        Ok(Inverses {
            abs_l: f.l.abs(),
            abs_u: f.u.abs(),
            abs_li: li.abs(),
            abs_ui: ui.abs(),
            abs_uili: uili.abs(),
            li,
            ui,
            uili,
        })
    }
}

fn inv_factors(side: &Side) -> Vec<Factor<'_>> {
    match side {
        Side::Identity => vec![],
        Side::PermutedLower(f) => vec![Factor::TriInv(&f.l, Triangle::Lower), Factor::Perm(f)],
        Side::Upper(f) => vec![Factor::TriInv(&f.u, Triangle::Upper)],
        Side::Full(f) => vec![Factor::TriInv(&f.u, Triangle::Upper), Factor::TriInv(&f.l, Triangle::Lower), Factor::Perm(f)],
    }
}

fn fwd_factors(side: &Side) -> Vec<Factor<'_>> {
    match side {
        Side::Identity => vec![],
        Side::PermutedLower(f) => vec![Factor::PermT(f), Factor::Mat(&f.l)],
        Side::Upper(f) => vec![Factor::Mat(&f.u)],
        Side::Full(f) => vec![Factor::PermT(f), Factor::Mat(&f.l), Factor::Mat(&f.u)],
    }
}

fn cat<'a>(parts: &[&[Factor<'a>]]) -> Vec<Factor<'a>> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn op_norm(factors: Vec<Factor<'_>>, seed: u64) -> f64 {
    LinearOp::product(factors).norm2(seed).value
}

fn side_factors(side: &Side) -> Option<&LUFactors> {
    match side {
        Side::Identity => None,
        Side::PermutedLower(f) | Side::Upper(f) | Side::Full(f) => Some(f),
    }
}

/// `||M||`, `||M^{-1}||`.
fn side_norms(side: &Side, seed: u64) -> (f64, f64) {
    if side.is_identity() {
        return (1.0, 1.0);
    }
    (op_norm(fwd_factors(side), seed), op_norm(inv_factors(side), seed + 1))
}

/// `||E M||` for a left side and `||E||` for a right side, where `E`
/// bounds the componentwise error of applying `M^{-1}` by substitution.
fn error_matrix_norms(side: &Side, inv: Option<&Inverses>, with_m: bool, seed: u64) -> f64 {
    let Some(iv) = inv else { return 0.0 };
    let tail: Vec<Factor<'_>> = if with_m {
        match side {
            Side::PermutedLower(f) => vec![Factor::Mat(&f.l)],
            Side::Upper(f) => vec![Factor::Mat(&f.u)],
            Side::Full(f) => vec![Factor::Mat(&f.l), Factor::Mat(&f.u)],
            Side::Identity => vec![],
        }
    } else {
        vec![]
    };
    let op = match side {
        Side::Identity => return 0.0,
        Side::PermutedLower(_) => LinearOp::product(cat(&[
            &[Factor::Mat(&iv.abs_li), Factor::Mat(&iv.abs_l), Factor::Mat(&iv.abs_li)],
            &tail,
        ])),
        Side::Upper(_) => LinearOp::product(cat(&[
            &[Factor::Mat(&iv.abs_ui), Factor::Mat(&iv.abs_u), Factor::Mat(&iv.abs_ui)],
            &tail,
        ])),
        Side::Full(_) => LinearOp::product(cat(&[
            &[Factor::Mat(&iv.abs_uili), Factor::Mat(&iv.abs_l), Factor::Mat(&iv.abs_li)],
            &tail,
        ]))
        .plus(cat(&[&[Factor::Mat(&iv.abs_ui), Factor::Mat(&iv.abs_u), Factor::Mat(&iv.abs_uili)], &tail])),
    };
    op.norm2(seed).value
}

/// `|| |B^{-1}| |B| ||`.
fn cond_abs(inv_abs: &DenseMatrix, abs: &DenseMatrix, seed: u64) -> f64 {
    op_norm(vec![Factor::Mat(inv_abs), Factor::Mat(abs)], seed)
}

fn er_ratio_approx(side: &Side, inv: Option<&Inverses>, seed: u64) -> f64 {
    let Some(iv) = inv else { return 0.0 };
    match side {
        Side::Identity => 0.0,
        Side::Upper(_) => cond_abs(&iv.abs_ui, &iv.abs_u, seed).min(cond_abs(&iv.abs_u, &iv.abs_ui, seed + 1)),
        Side::PermutedLower(_) => cond_abs(&iv.abs_li, &iv.abs_l, seed).min(cond_abs(&iv.abs_l, &iv.abs_li, seed + 1)),
        Side::Full(_) => cond_abs(&iv.abs_l, &iv.abs_li, seed) + cond_abs(&iv.abs_ui, &iv.abs_u, seed + 1),
    }
}

/// Bounds on `psi_A` and `psi_L` for triangular-solve preconditioners,
/// with all unknown constants set to one. Returns `(psi_A bound, psi_L bound)`.
pub fn lu_psi_bounds(a: &DenseMatrix, precond: &Preconditioner) -> Result<(f64, f64)> {
    let inv = match side_factors(&precond.left) {
        Some(f) => Some(Inverses::new(f)?),
        None => None,
    };
    Ok(psi_bounds_with(a, &precond.left, inv.as_ref(), NORM_SEED + 40))
}

fn psi_bounds_with(a: &DenseMatrix, left: &Side, inv: Option<&Inverses>, seed: u64) -> (f64, f64) {
    let n = a.rows();
    let abs_a = a.abs();
    let (Some(iv), Some(f)) = (inv, side_factors(left)) else {
        return ((n as f64).sqrt(), 0.0);
    };
    let ratio = |abs_inv: &DenseMatrix, inv_m: &DenseMatrix, s: u64| {
        let num = op_norm(vec![Factor::Mat(abs_inv), Factor::Perm(f), Factor::Mat(&abs_a)], s);
        let den = op_norm(vec![Factor::Mat(inv_m), Factor::Perm(f), Factor::Mat(a)], s + 1);
        (num / den, den)
    };
    match left {
        Side::Identity => ((n as f64).sqrt(), 0.0),
        Side::PermutedLower(_) => {
            let (psi_a, _) = ratio(&iv.abs_li, &iv.li, seed);
            let kappa_l = op_norm(vec![Factor::Mat(&f.l)], seed + 2) * op_norm(vec![Factor::Mat(&iv.li)], seed + 3);
            (psi_a, kappa_l)
        }
        Side::Upper(_) => {
            let num = op_norm(vec![Factor::Mat(&iv.abs_ui), Factor::Mat(&abs_a)], seed);
            let den = op_norm(vec![Factor::Mat(&iv.ui), Factor::Mat(a)], seed + 1);
            let kappa_u = op_norm(vec![Factor::Mat(&f.u)], seed + 2) * op_norm(vec![Factor::Mat(&iv.ui)], seed + 3);
            (num / den, kappa_u)
        }
        Side::Full(_) => {
            let (psi_a, norm_uila) = ratio(&iv.abs_uili, &iv.uili, seed);
            let norm_lia = op_norm(vec![Factor::Mat(&iv.li), Factor::Perm(f), Factor::Mat(a)], seed + 2);
            let norm_ui = op_norm(vec![Factor::Mat(&iv.ui)], seed + 3);
            let cond_l = cond_abs(&iv.abs_li, &iv.abs_l, seed + 4);
            let cond_u = cond_abs(&iv.abs_ui, &iv.abs_u, seed + 5);
            (psi_a, norm_ui * norm_lia / norm_uila * cond_l + cond_u)
        }
    }
}

/// Computes every precision-independent quantity for `A` and `precond`.
/// Inverses of `A` go through a binary64 LU factorization.
pub fn analyze(a: &DenseMatrix, precond: &Preconditioner) -> Result<PreconditionerAnalysis> {
    let seed = NORM_SEED;
    let st = Status::default();
    let fa = lu_factor(Format::DOUBLE, a, &st)?;
    let left_inv = match side_factors(&precond.left) {
        Some(f) => Some(Inverses::new(f)?),
        None => None,
    };
    let right_inv = match side_factors(&precond.right) {
        Some(f) => Some(Inverses::new(f)?),
        None => None,
    };

    let (li, lf) = (inv_factors(&precond.left), fwd_factors(&precond.left));
    let (ri, rf) = (inv_factors(&precond.right), fwd_factors(&precond.right));
    let a_mat = [Factor::Mat(a)];
    let a_inv = [Factor::LuInv(&fa)];

    let norm_a = op_norm(vec![Factor::Mat(a)], seed);
    let kappa_a = norm_a * op_norm(vec![Factor::LuInv(&fa)], seed + 1);
    let norm_a_tilde = op_norm(cat(&[&li, &a_mat]), seed + 2);
    let kappa_a_tilde = norm_a_tilde * op_norm(cat(&[&a_inv, &lf]), seed + 3);
    let kappa_a_hat = op_norm(cat(&[&li, &a_mat, &ri]), seed + 4) * op_norm(cat(&[&rf, &a_inv, &lf]), seed + 5);
    let (norm_ml, norm_ml_inv) = side_norms(&precond.left, seed + 6);
    let (norm_mr, norm_mr_inv) = side_norms(&precond.right, seed + 8);

    let norm_el_ml = error_matrix_norms(&precond.left, left_inv.as_ref(), true, seed + 10);
    let norm_er = error_matrix_norms(&precond.right, right_inv.as_ref(), false, seed + 11);
    let er_ratio_approx = er_ratio_approx(&precond.right, right_inv.as_ref(), seed + 12);
    let (psi_a_bound, psi_l_bound) = psi_bounds_with(a, &precond.left, left_inv.as_ref(), seed + 20);

    Ok(PreconditionerAnalysis {
        n: a.rows(),
        norm_a,
        kappa_a,
        norm_a_tilde,
        kappa_a_tilde,
        kappa_a_hat,
        kappa_ml: norm_ml * norm_ml_inv,
        kappa_mr: norm_mr * norm_mr_inv,
        norm_mr,
        norm_mr_inv,
        norm_el_ml,
        norm_er,
        er_ratio_approx,
        psi_a_bound,
        psi_l_bound,
    })
}
