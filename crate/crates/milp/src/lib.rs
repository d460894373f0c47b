//! Solver-agnostic mixed-integer linear programming layer.
//!
//! Models are plain data ([`MilpModel`]) built through a small expression API
//! and handed to a [`Solver`]. The only backend shipped is HiGHS. Every
//! incumbent can be re-checked against the model without trusting the
//! backend via [`MilpModel::check_feasibility`].

mod highs_backend;
mod lp_format;
mod model;
mod solve;

pub use highs_backend::HighsSolver;
pub use lp_format::to_lp_string;
pub use model::{
    Cmp, Constraint, FeasibilityViolation, LinExpr, MilpModel, ObjSense, SolveParams, VarId,
    VarKind, Variable,
};
pub use solve::{default_solver, solve, solver_by_name, SolveOutcome, SolveStatus, Solver, SOLVER_ENV};

#[derive(Debug, thiserror::Error)]
pub enum MilpError {
    #[error("solver backend '{0}' is not available")]
    SolverUnavailable(String),
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("{model}: limit reached after {seconds:.1}s without a feasible solution")]
    LimitWithoutIncumbent { model: String, seconds: f64 },
    #[error("solver could not decide between infeasible and unbounded")]
    Ambiguous,
    #[error("{0}")]
    Backend(String),
}
