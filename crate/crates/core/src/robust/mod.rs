//! Robust timetabling against budgeted source delays.
//!
//! [`cutting_plane`] alternates a scenario-indexed master over the no-wait
//! strategy with the worst-case program [`fwc::solve_fwc`] and returns an
//! upper bound. [`iterative_heuristic`] replaces the worst-case program by
//! sampled scenarios evaluated with optimal delay management and returns a
//! lower bound.

mod cutting_plane;
pub mod fwc;
mod heuristic;
pub mod master;
mod state;
#[cfg(test)]
pub(crate) mod testing;

pub use cutting_plane::{cutting_plane, CuttingPlaneConfig};
pub use fwc::{build_fwc, solve_fwc, FwcModel, WorstCase};
pub use heuristic::{iterative_heuristic, HeuristicConfig};
pub use master::{build_frpt_master, build_rpt_master, solve_master, MasterKind, MasterModel, MasterSolution};
pub use state::{IterationRecord, RobustRunState, Termination};

use crate::scenario::Scenario;

/// Pool membership with elementwise tolerance.
pub fn pool_contains(pool: &[Scenario], s: &Scenario) -> bool {
    pool.iter().any(|p| p.approx_eq(s, POOL_TOL))
}

pub const POOL_TOL: f64 = 1e-9;
