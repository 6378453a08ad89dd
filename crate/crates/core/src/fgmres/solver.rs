use std::fmt;

use crate::densela::{combine, matrix_norm2, matvec, matvec_quad, mgs_orthogonalize, norm2_quad, nrm2, scale_div, sub, DenseMatrix};
use crate::error::{Error, Result};
use crate::fgmres::lsq::LeastSquaresState;
use crate::fgmres::precond::Preconditioner;
use crate::precision::{PrecisionConfig, QuadValue, Status};

/// Seed used for every power-iteration norm inside a solve report.
pub(crate) const NORM_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance; `None` means `4u` of the working format.
    pub tol: Option<f64>,
    pub maxit: usize,
    pub x0: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: None, maxit: 200, x0: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    /// `x0` already solves the system exactly in working precision.
    ZeroResidual,
    MaxIterations,
    /// `h_{k+1,k} = 0` with the tolerance unmet.
    Breakdown,
    /// A NaN or infinity reached the residual estimate.
    NonFinite,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::Converged => "converged",
            Termination::ZeroResidual => "zero-residual",
            Termination::MaxIterations => "max-iterations",
            Termination::Breakdown => "breakdown",
            Termination::NonFinite => "non-finite",
        };
        f.write_str(s)
    }
}

/// Vectors produced at one iteration, kept for error measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// `M_R^{-1} v_j` as computed in `u_R`.
    pub z: Vec<f64>,
    /// `A z_j` as computed in `u_A`.
    pub s: Vec<f64>,
    /// `M_L^{-1} s_j` as computed in `u_L`, before orthogonalization.
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub x0: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub tol: f64,
    pub beta: f64,
    /// `alpha_k / beta` for `k = 1..`.
    pub residual_history: Vec<f64>,
    /// `||y_k||` for `k = 1..`.
    pub y_norm_history: Vec<f64>,
    pub sines: Vec<f64>,
    /// Working residual `M_L^{-1} b - M_L^{-1} A x0` used to start the Arnoldi process.
    pub initial_residual: Vec<f64>,
    /// `r = b - A x_k` as computed by the algorithm (`u_A` then `u`).
    pub working_residual: Vec<f64>,
    /// `||b - A x_k||` in double-double.
    pub true_residual_norm: f64,
    pub norm_z: f64,
    pub norm_y: f64,
    /// `||M_R (x_k - x0)||` in double-double.
    pub norm_mr_dx: f64,
    pub records: Vec<IterationRecord>,
    pub status: Status,
}

impl SolveReport {
    pub fn z_columns(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.records.iter().map(|r| &r.z)
    }

    pub fn max_abs_sine(&self) -> f64 {
        self.sines.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

fn check_dims(a: &DenseMatrix, b: &[f64], x0: &[f64]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("matrix is {}x{}, expected square", a.rows(), a.cols())));
    }
    if b.len() != a.rows() || x0.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "n = {} but b has length {} and x0 has length {}",
            a.rows(),
            b.len(),
            x0.len()
        )));
    }
    Ok(())
}

/// Split-preconditioned FGMRES with four precisions and no restarts.
///
/// The convergence test uses only working-precision quantities. The
/// double-double residual is computed after the loop has finished.
pub fn solve(
    a: &DenseMatrix,
    b: &[f64],
    precond: &Preconditioner,
    cfg: &PrecisionConfig,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let n = a.rows();
    let x0 = opts.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    check_dims(a, b, &x0)?;
    let tol = opts.tol.unwrap_or(4.0 * cfg.u.unit_roundoff());
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let status = Status::default();
    let u = cfg.u;

    let t = matvec(cfg.u_a, a, &x0, &status)?;
    let tp = precond.left.apply_inv(cfg.u_l, &t, &status)?;
    let bp = precond.left.apply_inv(cfg.u_l, b, &status)?;
    let r0 = sub(u, &bp, &tp, &status);
    let beta = nrm2(u, &r0, &status);

    let mut report = SolveReport {
        x: x0.clone(),
        x0: x0.clone(),
        iterations: 0,
        converged: false,
        termination: Termination::MaxIterations,
        tol,
        beta,
        residual_history: Vec::new(),
        y_norm_history: Vec::new(),
        sines: Vec::new(),
        initial_residual: r0.clone(),
        working_residual: Vec::new(),
        true_residual_norm: 0.0,
        norm_z: 0.0,
        norm_y: 0.0,
        norm_mr_dx: 0.0,
        records: Vec::new(),
        status: Status::default(),
    };

    if beta == 0.0 {
        report.converged = true;
        report.termination = Termination::ZeroResidual;
        finish(a, b, precond, cfg, &mut report, &[], &status)?;
        return Ok(report);
    }
    if !beta.is_finite() {
        report.termination = Termination::NonFinite;
        finish(a, b, precond, cfg, &mut report, &[], &status)?;
        return Ok(report);
    }

    let mut basis = vec![scale_div(u, &r0, beta, &status)];
    let mut ls = LeastSquaresState::new(u, beta);
    let threshold = tol * beta;
    let scratch = Status::default();

    for k in 0..opts.maxit {
        let z = precond.right.apply_inv(cfg.u_r, &basis[k], &status)?;
        let s = matvec(cfg.u_a, a, &z, &status)?;
        let w = precond.left.apply_inv(cfg.u_l, &s, &status)?;
        let (w_orth, mut h) = mgs_orthogonalize(u, &w, &basis, &status);
        let h_next = nrm2(u, &w_orth, &status);
        h.push(h_next);
        report.records.push(IterationRecord { z, s, w });

        let alpha = ls.update(&h, &status);
        report.iterations = k + 1;
        report.sines.push(ls.rotations()[k].1);
        report.residual_history.push(alpha / beta);
        report.y_norm_history.push(crate::densela::norm2(&ls.solution(&scratch)));

        if !alpha.is_finite() {
            report.termination = Termination::NonFinite;
            break;
        }
        if alpha <= threshold {
            report.converged = true;
            report.termination = Termination::Converged;
            break;
        }
        if h_next == 0.0 {
            report.termination = Termination::Breakdown;
            break;
        }
        basis.push(scale_div(u, &w_orth, h_next, &status));
    }

    let y = ls.solution(&status);
    finish(a, b, precond, cfg, &mut report, &y, &status)?;
    Ok(report)
}

fn finish(
    a: &DenseMatrix,
    b: &[f64],
    precond: &Preconditioner,
    cfg: &PrecisionConfig,
    report: &mut SolveReport,
    y: &[f64],
    status: &Status,
) -> Result<()> {
    let zs: Vec<Vec<f64>> = report.records.iter().map(|r| r.z.clone()).collect();
    report.x = combine(cfg.u, &report.x0, &zs, y, status);
    let t = matvec(cfg.u_a, a, &report.x, status)?;
    report.working_residual = sub(cfg.u, b, &t, status);

    let xq: Vec<QuadValue> = report.x.iter().map(|&v| QuadValue::from(v)).collect();
    let ax = matvec_quad(a, &xq);
    let r: Vec<QuadValue> = b.iter().zip(&ax).map(|(&bi, &axi)| QuadValue::from(bi) - axi).collect();
    report.true_residual_norm = norm2_quad(&r);

    report.norm_y = crate::densela::norm2(y);
    report.norm_z = if zs.is_empty() { 0.0 } else { matrix_norm2(&DenseMatrix::from_columns(&zs)?, NORM_SEED).value };
    let dx: Vec<QuadValue> = report
        .x
        .iter()
        .zip(&report.x0)
        .map(|(&xi, &x0i)| QuadValue::from(xi) - QuadValue::from(x0i))
        .collect();
    report.norm_mr_dx = norm2_quad(&precond.right.apply_quad(&dx));
    report.status = status.clone();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::lu_factor;
    use crate::fgmres::precond::{Mode, Side};
    use crate::precision::Format;
    use crate::problems::synthetic;

    #[test]
    fn identity_converges_in_one_step() {
        let a = DenseMatrix::identity(6);
        let b = vec![0.5, -1.0, 2.0, 3.25, 0.0, 7.0];
        let rep = solve(&a, &b, &Preconditioner::identity(), &PrecisionConfig::default(), &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (x, bi) in rep.x.iter().zip(&b) {
            assert!((x - bi).abs() <= 4.0 * 2f64.powi(-53) * bi.abs());
        }
    }

    #[test]
    fn exact_start_returns_immediately() {
        let a = DenseMatrix::identity(3);
        let b = vec![1.0, 2.0, 3.0];
        let opts = SolveOptions { x0: Some(b.clone()), ..Default::default() };
        let rep = solve(&a, &b, &Preconditioner::identity(), &PrecisionConfig::default(), &opts).unwrap();
        assert_eq!(rep.termination, Termination::ZeroResidual);
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.x, b);
    }

    #[test]
    fn rejects_bad_input() {
        let a = DenseMatrix::identity(3);
        let cfg = PrecisionConfig::default();
        let p = Preconditioner::identity();
        assert!(matches!(solve(&a, &[1.0], &p, &cfg, &SolveOptions::default()), Err(Error::Dimension(_))));
        let opts = SolveOptions { tol: Some(0.0), ..Default::default() };
        assert!(matches!(solve(&a, &[1.0; 3], &p, &cfg, &opts), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn residual_estimate_non_increasing() {
        let p = synthetic(40, 3.0, 7).unwrap();
        let rep = solve(&p.a, &p.b, &Preconditioner::identity(), &PrecisionConfig::default(), &SolveOptions::default()).unwrap();
        let u = 2f64.powi(-53);
        for w in rep.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 10.0 * u, "{w:?}");
        }
    }

    #[test]
    fn mode_labels_do_not_change_iterates() {
        let p = synthetic(30, 4.0, 3).unwrap();
        let st = Status::default();
        let f = lu_factor(Format::MP4, &p.a, &st).unwrap();
        let cfg = PrecisionConfig { u_l: Format::SINGLE, ..PrecisionConfig::default() };
        let opts = SolveOptions::default();

        let left = Preconditioner::from_lu(f.clone(), Mode::Left);
        let split_left = Preconditioner::from_sides(Mode::Split, Side::Full(f.clone()), Side::Identity);
        let r1 = solve(&p.a, &p.b, &left, &cfg, &opts).unwrap();
        let r2 = solve(&p.a, &p.b, &split_left, &cfg, &opts).unwrap();
        assert_eq!(r1.x, r2.x);
        assert_eq!(r1.residual_history, r2.residual_history);

        let right = Preconditioner::from_lu(f.clone(), Mode::Right);
        let split_right = Preconditioner::from_sides(Mode::Split, Side::Identity, Side::Full(f));
        let r3 = solve(&p.a, &p.b, &right, &cfg, &opts).unwrap();
        let r4 = solve(&p.a, &p.b, &split_right, &cfg, &opts).unwrap();
        assert_eq!(r3.x, r4.x);

        let none = Preconditioner::identity();
        let split_none = Preconditioner::from_sides(Mode::Split, Side::Identity, Side::Identity);
        let r5 = solve(&p.a, &p.b, &none, &cfg, &opts).unwrap();
        let r6 = solve(&p.a, &p.b, &split_none, &cfg, &opts).unwrap();
        assert_eq!(r5.x, r6.x);
    }

    #[test]
    fn split_lu_converges_fast() {
        let p = synthetic(60, 5.0, 1).unwrap();
        let st = Status::default();
        let f = lu_factor(Format::MP4, &p.a, &st).unwrap();
        let pre = Preconditioner::from_lu(f, Mode::Split);
        let rep = solve(&p.a, &p.b, &pre, &PrecisionConfig::default(), &SolveOptions::default()).unwrap();
        assert!(rep.converged, "{:?}", rep.termination);
        assert!(rep.iterations < 60);
        assert_eq!(rep.records.len(), rep.iterations);
    }

    #[test]
    fn maxit_reports_unconverged() {
        let p = synthetic(40, 6.0, 2).unwrap();
        let opts = SolveOptions { maxit: 3, ..Default::default() };
        let rep = solve(&p.a, &p.b, &Preconditioner::identity(), &PrecisionConfig::default(), &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.termination, Termination::MaxIterations);
        assert_eq!(rep.iterations, 3);
    }
}
