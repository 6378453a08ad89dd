use crate::densela::{householder_qr, DenseMatrix, Factor, LinearOp, Triangle};
use crate::fgmres::solver::{SolveReport, NORM_SEED};
use crate::precision::Format;

/// `c0(n) = 18.53 n^{3/2}`.
pub fn c0(n: usize) -> f64 {
    18.53 * (n as f64).powf(1.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    /// Left-hand side of the inequality.
    pub value: f64,
    /// Strict upper limit.
    pub limit: f64,
    pub holds: bool,
}

impl AssumptionCheck {
    fn new(name: &'static str, value: f64, limit: f64) -> Self {
        AssumptionCheck { name, value, limit, holds: value < limit }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionFlags {
    pub checks: Vec<AssumptionCheck>,
    /// `kappa_2` of the Krylov matrix `[r0, M_L^{-1} A Z_k]`.
    pub kappa_c: f64,
}

impl AssumptionFlags {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of failing checks joined by `|`.
    pub fn failures(&self) -> String {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.name).collect::<Vec<_>>().join("|")
    }
}

/// Condition number of `[r0, w_1, ..., w_k]` through a thin QR.
pub fn krylov_condition(report: &SolveReport) -> f64 {
    let mut cols = vec![report.initial_residual.clone()];
    cols.extend(report.records.iter().map(|r| r.w.clone()));
    let Ok(c) = DenseMatrix::from_columns(&cols) else { return f64::NAN };
    if c.rows() < c.cols() {
        return f64::INFINITY;
    }
    let Ok((_, r)) = householder_qr(&c) else { return f64::NAN };
    if (0..r.rows()).any(|i| r[(i, i)] == 0.0) {
        return f64::INFINITY;
    }
    let big = LinearOp::product(vec![Factor::Mat(&r)]).norm2(NORM_SEED).value;
    let inv = LinearOp::product(vec![Factor::TriInv(&r, Triangle::Upper)]).norm2(NORM_SEED + 1).value;
    big * inv
}

/// Evaluates the hypotheses of the backward error theorem for a finished
/// solve. `rho` comes from the diagnostics.
pub fn check_assumptions(report: &SolveReport, n: usize, u: Format, rho: f64) -> AssumptionFlags {
    let uu = u.unit_roundoff();
    let kappa_c = krylov_condition(report);
    let checks = vec![
        AssumptionCheck::new("dimension", 2.12 * (n as f64 + 1.0) * uu, 0.01),
        AssumptionCheck::new("krylov", c0(n) * uu * kappa_c, 0.1),
        AssumptionCheck::new("sine", report.max_abs_sine(), 1.0 - uu),
        AssumptionCheck::new("rho", rho, 1.0),
    ];
    AssumptionFlags { checks, kappa_c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgmres::{solve, Preconditioner, SolveOptions};
    use crate::precision::PrecisionConfig;

    fn identity_run() -> SolveReport {
        let a = DenseMatrix::identity(4);
        solve(&a, &[1.0; 4], &Preconditioner::identity(), &PrecisionConfig::default(), &SolveOptions::default()).unwrap()
    }

    #[test]
    fn dimension_condition_at_n200() {
        let flags = check_assumptions(&identity_run(), 200, Format::DOUBLE, 1e-12);
        let dim = flags.get("dimension").unwrap();
        assert!((dim.value - 4.73e-14).abs() < 1e-15);
        assert!(dim.holds);
        assert!(flags.get("sine").unwrap().holds);
        assert!(flags.get("rho").unwrap().holds);
    }

    #[test]
    fn exact_one_step_solve_has_rank_deficient_krylov_matrix() {
        // A = I: the single basis column is parallel to r0
        let flags = check_assumptions(&identity_run(), 4, Format::DOUBLE, 0.0);
        assert!(flags.kappa_c > 1e12);
        assert_eq!(flags.failures(), "krylov");
    }

    #[test]
    fn rho_above_one_is_flagged() {
        let rep = identity_run();
        let flags = check_assumptions(&rep, 4, Format::DOUBLE, 1.38);
        assert!(rep.converged);
        assert!(!flags.get("rho").unwrap().holds);
        assert!(!flags.all_hold());
    }

    #[test]
    fn well_conditioned_krylov_matrix_passes() {
        let a = DenseMatrix::from_diag(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let opts = SolveOptions { maxit: 2, ..Default::default() };
        let rep = solve(&a, &[1.0; 6], &Preconditioner::identity(), &PrecisionConfig::default(), &opts).unwrap();
        let flags = check_assumptions(&rep, 6, Format::DOUBLE, 0.0);
        assert!(flags.kappa_c < 1e3, "{}", flags.kappa_c);
        assert!(flags.all_hold(), "{flags:?}");
    }

    #[test]
    fn c0_value() {
        assert!((c0(100) - 18530.0).abs() < 1e-9);
    }
}
