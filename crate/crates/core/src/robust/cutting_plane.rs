use std::time::Instant;

use milp::{SolveParams, SolveStatus};

use super::fwc::solve_fwc;
use super::master::{solve_master, MasterKind};
use super::state::{IterationRecord, RobustRunState, Termination};
use super::pool_contains;
use crate::ean::PeriodicEan;
use crate::scenario::{Scenario, UncertaintySet};
use crate::timetable::Timetable;
use crate::Error;

#[derive(Clone, Debug)]
pub struct CuttingPlaneConfig {
    pub epsilon: f64,
    pub iter_cap: usize,
    pub master_time_limit: Option<f64>,
    pub fwc_time_limit: Option<f64>,
    /// Relative gap for both subproblems; bounds are only as tight as this.
    pub mip_gap: f64,
    /// Start timetable for the first master.
    pub start: Option<Timetable>,
}

impl Default for CuttingPlaneConfig {
    fn default() -> Self {
        CuttingPlaneConfig {
            epsilon: 1e-3,
            iter_cap: 20,
            master_time_limit: Some(60.0),
            fwc_time_limit: Some(60.0),
            mip_gap: 1e-7,
            start: None,
        }
    }
}

/// Lower bound implied by a master solve. An optimal incumbent may sit up to
/// the MIP gap above the optimum, so the dual bound caps it.
pub(crate) fn master_bound(status: SolveStatus, objective: f64, best_bound: Option<f64>) -> f64 {
    match (status, best_bound) {
        (SolveStatus::Optimal, Some(b)) => objective.min(b),
        (SolveStatus::Optimal, None) => objective,
        (_, b) => b.unwrap_or(f64::NEG_INFINITY),
    }
}

/// Alternates F-RPT over the pool with F-WC for the master's timetable until
/// `ub - lb <= ε` or the iteration cap. Returns the timetable attaining `ub`,
/// `ub` itself, and the run trace.
pub fn cutting_plane(
    ean: &PeriodicEan,
    unc: &UncertaintySet,
    s_nom: &Scenario,
    cfg: &CuttingPlaneConfig,
) -> Result<(Timetable, f64, RobustRunState), Error> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {}", cfg.epsilon)));
    }
    let clock = Instant::now();
    let mut state = RobustRunState::new(s_nom.clone());
    let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut best: Option<Timetable> = None;
    let mut prev = cfg.start.clone();
    for k in 1..=cfg.iter_cap.max(1) {
        let params = SolveParams {
            time_limit: cfg.master_time_limit,
            cutoff: None,
            mip_gap: cfg.mip_gap,
        };
        let m = solve_master(MasterKind::NoWait, ean, &state.pool, prev.as_ref(), params)?;
        lb = lb.max(master_bound(m.outcome.status, m.objective, m.outcome.best_bound));

        let params = SolveParams {
            time_limit: cfg.fwc_time_limit,
            cutoff: ub.is_finite().then_some(ub),
            mip_gap: cfg.mip_gap,
        };
        let wc = solve_fwc(ean, &m.timetable, unc, params)?;
        if wc.value <= ub {
            ub = wc.value;
            best = Some(m.timetable.clone());
        }
        log::info!(
            "iteration {k}: lb {lb:.4} ub {ub:.4} pool {} (master {}, F-WC {})",
            state.pool.len(),
            m.outcome.status,
            wc.outcome.status
        );
        if !pool_contains(&state.pool, &wc.scenario) {
            state.pool.push(wc.scenario.clone());
        }
        state.records.push(IterationRecord {
            k,
            lb,
            ub,
            wall_seconds: clock.elapsed().as_secs_f64(),
            pool_size: state.pool.len(),
            master_status: m.outcome.status,
            sub_status: Some(wc.outcome.status),
            scenario_value: wc.value,
        });
        prev = Some(m.timetable);
        if !(ub - lb > cfg.epsilon) {
            state.termination = Some(Termination::Converged);
            break;
        }
    }
    if state.termination.is_none() {
        state.termination = Some(Termination::IterationCap);
    }
    let best = best.expect("first iteration sets ub");
    state.incumbent = Some(best.clone());
    Ok((best, ub, state))
}
