use mpfgmres::densela::lu_factor;
use mpfgmres::diagnostics::{
    analyze, diagnose, recommend_precisions, AnalysisConstants, DiagnosticsReport, PilotMeasurements,
    PreconditionerAnalysis, Recommendation, DEFAULT_SLACK,
};
use mpfgmres::fgmres::{solve, Mode, Preconditioner, SolveOptions, SolveReport};
use mpfgmres::precision::{Format, PrecisionConfig, QuadValue, Status};
use mpfgmres::problems::{load_matrix_market, reference_solution, synthetic, uniform_rhs, Problem, Provenance};
use mpfgmres::{densela::DenseMatrix, Error};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ProblemSpec};
use crate::CliError;

pub fn build_problem(spec: &ProblemSpec) -> Result<Problem, CliError> {
    Ok(match spec {
        ProblemSpec::Synthetic { n, c, seed } => synthetic(*n, *c, *seed)?,
        ProblemSpec::File { path, seed } => load_matrix_market(path, *seed)?,
        ProblemSpec::Identity { n, seed } => {
            Problem::new(DenseMatrix::identity(*n), uniform_rhs(*n, *seed), format!("identity-n{n}"), Provenance::Constructed)?
        }
    })
}

fn singular_preconditioner(e: Error) -> CliError {
    match e {
        Error::SingularInFormat { format, index } => CliError::SingularPreconditioner { format, index },
        other => CliError::Core(other),
    }
}

/// Everything about a run that does not depend on `u_L` and `u_R`.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: Problem,
    pub precond: Preconditioner,
    /// `None` when no preconditioner is used.
    pub factor_format: Option<Format>,
    pub analysis: PreconditionerAnalysis,
    pub x_ref: Vec<QuadValue>,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, CliError> {
    let problem = build_problem(&cfg.problem)?;
    let (precond, factor_format) = if cfg.mode == Mode::None {
        (Preconditioner::identity(), None)
    } else {
        let fmt = cfg.factor_format();
        let factors = lu_factor(fmt, &problem.a, &Status::default()).map_err(singular_preconditioner)?;
        (Preconditioner::from_lu(factors, cfg.mode), Some(fmt))
    };
    let analysis = analyze(&problem.a, &precond)?;
    let x_ref = reference_solution(&problem)?;
    Ok(Prepared { problem, precond, factor_format, analysis, x_ref })
}

/// One solve plus its diagnostics.
#[derive(Debug, Clone)]
pub struct Cell {
    pub precisions: PrecisionConfig,
    pub solve: SolveReport,
    pub diagnostics: DiagnosticsReport,
}

pub fn run_cell(prep: &Prepared, pc: PrecisionConfig, cfg: &ExperimentConfig) -> Result<Cell, CliError> {
    let opts = SolveOptions { tol: Some(cfg.tol.resolve(pc.u)), maxit: cfg.maxit, x0: None };
    let p = &prep.problem;
    let rep = solve(&p.a, &p.b, &prep.precond, &pc, &opts).map_err(singular_preconditioner)?;
    let diag = diagnose(p, &prep.precond, &prep.analysis, &rep, &pc, &AnalysisConstants::default(), &prep.x_ref);
    Ok(Cell { precisions: pc, solve: rep, diagnostics: diag })
}

pub fn run_single(cfg: &ExperimentConfig) -> Result<(Prepared, Cell), CliError> {
    let prep = prepare(cfg)?;
    let cell = run_cell(&prep, cfg.precisions(), cfg)?;
    Ok((prep, cell))
}

/// One `(u_L, u_R)` entry of a sweep; failures keep their reason.
#[derive(Debug)]
pub struct GridCell {
    pub u_l: Format,
    pub u_r: Format,
    pub outcome: Result<Cell, CliError>,
}

/// Cells run concurrently; the result is ordered row-major by `u_L` then `u_R`.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<(Prepared, Vec<GridCell>), CliError> {
    let prep = prepare(cfg)?;
    let pairs: Vec<(Format, Format)> =
        cfg.u_l_list.iter().flat_map(|&l| cfg.u_r_list.iter().map(move |&r| (l, r))).collect();
    let cells = pairs
        .into_par_iter()
        .map(|(u_l, u_r)| GridCell { u_l, u_r, outcome: run_cell(&prep, cfg.precisions_with(u_l, u_r), cfg) })
        .collect();
    Ok((prep, cells))
}

#[derive(Debug)]
pub struct RecommendOutcome {
    pub pilot: Cell,
    pub measurements: PilotMeasurements,
    pub recommendation: Recommendation,
    pub verification: Cell,
}

/// Pilot in uniform double, recommendation for the working format, then a
/// verification solve at the recommended precisions.
pub fn run_recommend(cfg: &ExperimentConfig) -> Result<(Prepared, RecommendOutcome), CliError> {
    let prep = prepare(cfg)?;
    let pilot = run_cell(&prep, PrecisionConfig::uniform(Format::DOUBLE), cfg)?;
    let an = &prep.analysis;
    let measurements = PilotMeasurements {
        psi_a: pilot.diagnostics.psi_a,
        psi_l: pilot.diagnostics.psi_l,
        norm_el_ml: an.norm_el_ml,
        norm_er: an.norm_er,
        norm_mr_inv: an.norm_mr_inv,
    };
    let recommendation = recommend_precisions(&measurements, cfg.u, DEFAULT_SLACK)?;
    let verification = run_cell(&prep, recommendation.config, cfg)?;
    Ok((prep, RecommendOutcome { pilot, measurements, recommendation, verification }))
}
