//! Delay-robust periodic timetabling.
//!
//! The crate covers the whole pipeline: periodic event-activity networks
//! ([`ean`]), nominal timetabling ([`pesp`]), delay management ([`dm`]),
//! robust timetabling by cutting planes and scenario sampling ([`robust`]),
//! and the rollout-based evaluation harness ([`eval`]).

pub mod demo;
pub mod dm;
pub mod ean;
pub mod eval;
pub mod io;
pub mod par;
pub mod pesp;
pub mod robust;
pub mod rollout;
pub mod scenario;
pub mod timetable;

pub use dm::{no_wait_propagate, tau, DelaySolution};
pub use ean::{Activity, ActivityKind, Event, EventKind, PeriodicEan, Violation};
pub use rollout::{rollout, AperiodicEan};
pub use scenario::{sample_scenario, scenario_rollout, BudgetMode, Scenario, UncertaintySet};
pub use timetable::{timetable_durations, Timetable};

/// Absolute tolerance for delay values and constraint rechecks.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid event-activity network: {}", join(.0))]
    InvalidEan(Vec<Violation>),
    #[error("timetable infeasible on activities {0:?}")]
    InfeasibleTimetable(Vec<u32>),
    #[error("{model} is infeasible")]
    Infeasible { model: String },
    #[error("budget {budget} cannot be spread over {domain} elements capped at {sigma}")]
    InfeasibleBudget { budget: f64, sigma: f64, domain: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Milp(#[from] milp::MilpError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("unknown config key '{0}'")]
    UnknownConfigKey(String),
    #[error("{algorithm}: {source}")]
    Algorithm {
        algorithm: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The innermost error, past algorithm attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::Algorithm { source, .. } => source.root(),
            other => other,
        }
    }

    /// Infeasibility, as opposed to bad input or I/O.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self.root(),
            Error::Infeasible { .. } | Error::InfeasibleTimetable(_) | Error::InfeasibleBudget { .. }
        )
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
