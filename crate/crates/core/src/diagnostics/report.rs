use crate::densela::norm2;
use crate::diagnostics::analysis::PreconditionerAnalysis;
use crate::diagnostics::bounds::{bound_suite, rho, zeta_terms, AnalysisConstants, BoundCheck, BoundInputs, ZetaInputs, ZetaTerms};
use crate::diagnostics::measure::{backward_error, backward_error_compensated, backward_error_leftprec, forward_error, measure_psi};
use crate::fgmres::{check_assumptions, AssumptionFlags, Preconditioner, SolveReport};
use crate::precision::{PrecisionConfig, QuadValue};
use crate::problems::Problem;

/// Everything measured about one finished solve.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub be_original: f64,
    /// Same quantity through the compensated dot product.
    pub be_original_compensated: f64,
    pub be_leftprec: f64,
    pub residual_leftprec: f64,
    pub forward_error: f64,
    pub psi_a: f64,
    pub psi_l: f64,
    pub psi_a_samples: Vec<f64>,
    pub psi_l_samples: Vec<f64>,
    pub rho: f64,
    pub zeta: ZetaTerms,
    pub analysis: PreconditionerAnalysis,
    pub bounds: Vec<BoundCheck>,
    pub assumptions: AssumptionFlags,
}

impl DiagnosticsReport {
    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

/// Runs every measurement for `report`. `x_ref` is the reference
/// solution of the unpreconditioned system.
pub fn diagnose(
    problem: &Problem,
    precond: &Preconditioner,
    analysis: &PreconditionerAnalysis,
    report: &SolveReport,
    cfg: &PrecisionConfig,
    consts: &AnalysisConstants,
    x_ref: &[QuadValue],
) -> DiagnosticsReport {
    let (a, b, x) = (&problem.a, &problem.b, &report.x);
    let be_original = backward_error(a, b, x, analysis.norm_a);
    let be_original_compensated = backward_error_compensated(a, b, x, analysis.norm_a);
    let (be_leftprec, residual_leftprec, norm_b_tilde) = backward_error_leftprec(a, b, x, precond, analysis.norm_a_tilde);
    let fe = forward_error(x, x_ref);

    let psi = measure_psi(a, report, precond, cfg, analysis.norm_a_tilde);
    let (psi_a, psi_l) = (psi.max_a(), psi.max_l());
    let rho = rho(analysis.norm_mr, report.norm_z, analysis.norm_er, cfg, consts);
    let zeta = zeta_terms(
        &ZetaInputs {
            norm_b_tilde,
            norm_a_tilde: analysis.norm_a_tilde,
            norm_z: report.norm_z,
            norm_mr_dx: report.norm_mr_dx,
            norm_x0: norm2(&report.x0),
            norm_x: norm2(x),
            norm_el_ml: analysis.norm_el_ml,
            psi_a,
            psi_l,
        },
        cfg,
    );
    let bounds = bound_suite(
        &BoundInputs {
            rho,
            zeta,
            residual_leftprec,
            be_leftprec,
            be_original,
            forward_error: fe,
            kappa_ml: analysis.kappa_ml,
            kappa_a_tilde: analysis.kappa_a_tilde,
            kappa_a_hat: analysis.kappa_a_hat,
            kappa_mr: analysis.kappa_mr,
            psi_a,
            psi_l,
            psi_a_bound: analysis.psi_a_bound,
            psi_l_bound: analysis.psi_l_bound,
        },
        consts,
    );
    let assumptions = check_assumptions(report, problem.n(), cfg.u, rho);

    DiagnosticsReport {
        be_original,
        be_original_compensated,
        be_leftprec,
        residual_leftprec,
        forward_error: fe,
        psi_a,
        psi_l,
        psi_a_samples: psi.psi_a,
        psi_l_samples: psi.psi_l,
        rho,
        zeta,
        analysis: analysis.clone(),
        bounds,
        assumptions,
    }
}
