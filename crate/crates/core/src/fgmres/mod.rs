//! Flexible GMRES with split preconditioning, where the matrix products,
//! the left and right preconditioner applications and everything else may
//! each run in its own precision.

mod assumptions;
mod lsq;
mod precond;
mod solver;

pub use assumptions::{c0, check_assumptions, krylov_condition, AssumptionCheck, AssumptionFlags};
pub use lsq::LeastSquaresState;
pub use precond::{Mode, Preconditioner, Side};
pub use solver::{solve, IterationRecord, SolveOptions, SolveReport, Termination};

pub(crate) use solver::NORM_SEED;
