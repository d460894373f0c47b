use std::time::Instant;

use highs::{Col, HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use crate::model::{Cmp, MilpModel, ObjSense};
use crate::solve::{finish_incumbent, SolveOutcome, SolveStatus, Solver};
use crate::MilpError;

/// HiGHS backend. Each solve runs single-threaded so distinct models can be
/// solved concurrently from different threads.
#[derive(Clone, Debug)]
pub struct HighsSolver {
    pub feasibility_tolerance: f64,
    pub random_seed: i32,
}

impl Default for HighsSolver {
    fn default() -> Self {
        HighsSolver {
            feasibility_tolerance: 1e-9,
            random_seed: 0,
        }
    }
}

impl HighsSolver {
    fn run(&self, model: &MilpModel, presolve: bool) -> Result<SolveOutcome, MilpError> {
        let started = Instant::now();
        let mut pb = RowProblem::default();
        let cols: Vec<Col> = model
            .vars
            .iter()
            .map(|v| pb.add_column_with_integrality(0.0, v.lo..=v.hi, v.kind.is_integral()))
            .collect();
        let mut costs = vec![0.0; cols.len()];
        for &(v, c) in &model.objective.terms {
            costs[v.index()] += c;
        }
        for c in &model.constraints {
            let row: Vec<(Col, f64)> = c.terms.iter().map(|&(v, k)| (cols[v.index()], k)).collect();
            match c.cmp {
                Cmp::Le => pb.add_row(f64::NEG_INFINITY..=c.rhs, row),
                Cmp::Ge => pb.add_row(c.rhs..=f64::INFINITY, row),
                Cmp::Eq => pb.add_row(c.rhs..=c.rhs, row),
            }
        }
        for (col, cost) in cols.iter().zip(&costs) {
            if *cost != 0.0 {
                pb.change_column_cost(*col, *cost);
            }
        }
        let sense = match model.sense {
            ObjSense::Minimize => Sense::Minimise,
            ObjSense::Maximize => Sense::Maximise,
        };
        let mut hm = pb
            .try_optimise(sense)
            .map_err(|s| MilpError::Backend(format!("HiGHS rejected model {}: {s:?}", model.name)))?;
        hm.make_quiet();
        let set = |hm: &mut highs::Model, key: &str, value: f64| {
            hm.try_set_option(key, value)
                .map_err(|_| MilpError::Backend(format!("cannot set HiGHS option {key}")))
        };
        hm.try_set_option("threads", 1)
            .map_err(|_| MilpError::Backend("cannot set threads".into()))?;
        hm.try_set_option("random_seed", self.random_seed)
            .map_err(|_| MilpError::Backend("cannot set random_seed".into()))?;
        if !presolve {
            hm.try_set_option("presolve", "off")
                .map_err(|_| MilpError::Backend("cannot disable presolve".into()))?;
        }
        set(&mut hm, "mip_rel_gap", model.params.mip_gap)?;
        set(&mut hm, "mip_feasibility_tolerance", self.feasibility_tolerance)?;
        set(&mut hm, "primal_feasibility_tolerance", self.feasibility_tolerance)?;
        if let Some(t) = model.params.time_limit {
            set(&mut hm, "time_limit", t)?;
        }
        // The objective offset is not passed to HiGHS, so the target is shifted.
        if let Some(cutoff) = model.params.cutoff {
            set(&mut hm, "objective_target", cutoff - model.objective.constant)?;
        }
        if let Some(ws) = &model.warm_start {
            if hm.try_set_solution(Some(ws), None, None, None).is_err() {
                log::debug!("HiGHS refused warm start for {}", model.name);
            }
        }

        let solved = hm.solve();
        let status = solved.status();
        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let bound = solved
            .double_info_value(c"mip_dual_bound")
            .ok()
            .filter(|b| b.is_finite())
            .map(|b| b + model.objective.constant);
        let mapped = match status {
            HighsModelStatus::Optimal => Some(SolveStatus::Optimal),
            HighsModelStatus::ObjectiveTarget => Some(SolveStatus::CutoffTriggered),
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ReachedMemoryLimit
            | HighsModelStatus::ObjectiveBound => {
                if has_primal {
                    Some(SolveStatus::FeasibleLimitHit)
                } else {
                    return Err(MilpError::LimitWithoutIncumbent {
                        model: model.name.clone(),
                        seconds: started.elapsed().as_secs_f64(),
                    });
                }
            }
            HighsModelStatus::Infeasible => {
                return Ok(SolveOutcome::without_incumbent(
                    SolveStatus::Infeasible,
                    started.elapsed().as_secs_f64(),
                ))
            }
            HighsModelStatus::Unbounded => {
                return Ok(SolveOutcome::without_incumbent(
                    SolveStatus::Unbounded,
                    started.elapsed().as_secs_f64(),
                ))
            }
            HighsModelStatus::UnboundedOrInfeasible if presolve => return Err(MilpError::Ambiguous),
            HighsModelStatus::UnboundedOrInfeasible => {
                return Ok(SolveOutcome::without_incumbent(
                    SolveStatus::Infeasible,
                    started.elapsed().as_secs_f64(),
                ))
            }
            HighsModelStatus::ModelEmpty => Some(SolveStatus::Optimal),
            other => {
                return Err(MilpError::Backend(format!(
                    "HiGHS ended solving {} with status {other:?}",
                    model.name
                )))
            }
        };
        let status = mapped.expect("mapped above");
        let values = if model.vars.is_empty() {
            Vec::new()
        } else {
            solved.get_solution().columns().to_vec()
        };
        let bound = match status {
            SolveStatus::Optimal if bound.is_none() => Some(solved.objective_value() + model.objective.constant),
            _ => bound,
        };
        Ok(finish_incumbent(model, status, values, bound, started))
    }
}

impl Solver for HighsSolver {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MilpModel) -> Result<SolveOutcome, MilpError> {
        model.validate()?;
        match self.run(model, true) {
            Err(MilpError::Ambiguous) => self.run(model, false),
            other => other,
        }
    }
}
