use std::fmt;
use std::time::Instant;

use crate::highs_backend::HighsSolver;
use crate::model::{MilpModel, ObjSense, VarId};
use crate::MilpError;

/// Environment variable naming the backend; only `highs` is built in.
pub const SOLVER_ENV: &str = "ROBTT_SOLVER";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    FeasibleLimitHit,
    CutoffTriggered,
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn has_incumbent(self) -> bool {
        matches!(
            self,
            SolveStatus::Optimal | SolveStatus::FeasibleLimitHit | SolveStatus::CutoffTriggered
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleLimitHit => "feasible_limit_hit",
            SolveStatus::CutoffTriggered => "cutoff_triggered",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Incumbent assignment, indexed by [`VarId::index`]. Integral variables
    /// are snapped to the nearest integer.
    pub values: Option<Vec<f64>>,
    /// Objective re-evaluated from `values`.
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub seconds: f64,
}

impl SolveOutcome {
    pub fn without_incumbent(status: SolveStatus, seconds: f64) -> Self {
        SolveOutcome {
            status,
            values: None,
            objective: None,
            best_bound: None,
            seconds,
        }
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values.as_ref().expect("outcome has no incumbent")[var.index()]
    }

    pub fn values(&self) -> &[f64] {
        self.values.as_deref().expect("outcome has no incumbent")
    }

    pub fn objective(&self) -> f64 {
        self.objective.expect("outcome has no incumbent")
    }

    /// Relative gap between incumbent and bound, 0 when unknown bound equals objective.
    pub fn gap(&self) -> Option<f64> {
        let (obj, bound) = (self.objective?, self.best_bound?);
        Some((obj - bound).abs() / obj.abs().max(1e-10))
    }
}

pub trait Solver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &MilpModel) -> Result<SolveOutcome, MilpError>;
}

/// Backend selected through [`SOLVER_ENV`], defaulting to HiGHS.
pub fn default_solver() -> Result<Box<dyn Solver>, MilpError> {
    match std::env::var(SOLVER_ENV) {
        Err(_) => Ok(Box::new(HighsSolver::default())),
        Ok(name) => solver_by_name(&name),
    }
}

pub fn solver_by_name(name: &str) -> Result<Box<dyn Solver>, MilpError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "" | "highs" => Ok(Box::new(HighsSolver::default())),
        other => Err(MilpError::SolverUnavailable(other.to_string())),
    }
}

/// Solves with the default backend.
pub fn solve(model: &MilpModel) -> Result<SolveOutcome, MilpError> {
    default_solver()?.solve(model)
}

/// Builds the outcome for an assignment found by a backend: snaps integral
/// variables and recomputes the objective from the snapped values.
pub(crate) fn finish_incumbent(
    model: &MilpModel,
    status: SolveStatus,
    mut values: Vec<f64>,
    best_bound: Option<f64>,
    started: Instant,
) -> SolveOutcome {
    for (v, x) in model.vars.iter().zip(values.iter_mut()) {
        if v.kind.is_integral() {
            *x = x.round();
        }
        *x = x.clamp(v.lo, v.hi);
    }
    let objective = model.objective_value(&values);
    let best_bound = best_bound.map(|b| match model.sense {
        ObjSense::Minimize => b.min(objective),
        ObjSense::Maximize => b.max(objective),
    });
    SolveOutcome {
        status,
        values: Some(values),
        objective: Some(objective),
        best_bound,
        seconds: started.elapsed().as_secs_f64(),
    }
}
