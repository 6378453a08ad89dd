//! Error measurement against double-double oracles, the computable
//! quantities of the backward error bound, and precision recommendations.

mod analysis;
mod bounds;
mod measure;
mod recommend;
mod report;

pub use analysis::{analyze, lu_psi_bounds, PreconditionerAnalysis};
pub use bounds::{bound_suite, rho, zeta_terms, AnalysisConstants, BoundCheck, BoundInputs, ZetaInputs, ZetaTerms};
pub use measure::{
    backward_error, backward_error_compensated, backward_error_leftprec, forward_error, measure_psi, residual_norm_compensated,
    residual_quad, PsiSamples,
};
pub use recommend::{recommend_precisions, PilotMeasurements, Recommendation, DEFAULT_SLACK};
pub use report::{diagnose, DiagnosticsReport};
