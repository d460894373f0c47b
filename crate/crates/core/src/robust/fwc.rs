//! Worst-case scenario for a fixed timetable under the no-wait strategy.

use milp::{LinExpr, MilpModel, ObjSense, SolveOutcome, SolveParams, VarId};

use crate::dm::{no_wait_propagate, tau};
use crate::ean::{EventKind, PeriodicEan};
use crate::pesp::solve_checked;
use crate::scenario::{Scenario, ScenarioDomain, UncertaintySet};
use crate::timetable::Timetable;
use crate::Error;

pub struct FwcModel {
    pub model: MilpModel,
    pub s_event: Vec<VarId>,
    /// Source delay variable per drive/wait activity.
    pub s_activity: Vec<Option<VarId>>,
    pub d_event: Vec<VarId>,
    /// Modulo variable of each change activity.
    pub k_change: Vec<Option<VarId>>,
    /// Binary selecting `d_j = s_j` for events with a drive/wait predecessor.
    pub source_wins: Vec<Option<VarId>>,
    pub big_m: f64,
}

/// `max τ(π, d)` over `s ∈ S` with `d` the no-wait propagation of `s`,
/// linearized with one binary per propagated event.
pub fn build_fwc(ean: &PeriodicEan, tt: &Timetable, unc: &UncertaintySet) -> FwcModel {
    let t = ean.period as f64;
    let cap = unc.sigma.min(unc.rho);
    let max_slack = ean
        .dw_activities()
        .map(|(k, _)| tt.slack(ean, k) as f64)
        .fold(0.0, f64::max);
    let big_m = unc.rho + unc.sigma + t.max(max_slack);
    let mut model = MilpModel::new("fwc", ObjSense::Maximize);

    let s_event: Vec<VarId> = ean
        .events
        .iter()
        .map(|e| model.continuous(format!("s_{}", e.id), 0.0, cap))
        .collect();
    let s_activity: Vec<Option<VarId>> = ean
        .activities
        .iter()
        .map(|a| (!a.is_change()).then(|| model.continuous(format!("sa_{}", a.id), 0.0, cap)))
        .collect();
    let budget = s_event
        .iter()
        .chain(s_activity.iter().flatten())
        .fold(LinExpr::new(), |acc, &v| acc + LinExpr::from(v));
    model.add_le("budget", budget, unc.rho);

    let d_event: Vec<VarId> = ean
        .events
        .iter()
        .map(|e| model.continuous(format!("d_{}", e.id), 0.0, unc.rho))
        .collect();
    let mut source_wins = vec![None; ean.num_events()];
    for j in 0..ean.num_events() {
        let id = ean.events[j].id;
        let dj = LinExpr::from(d_event[j]);
        let sj = LinExpr::from(s_event[j]);
        match ean.incoming_dw(j) {
            None => model.add_eq(format!("start_{id}"), dj - sj, 0.0),
            Some(k) => {
                let a = &ean.activities[k];
                let slack = tt.slack(ean, k) as f64;
                let sa = s_activity[k].expect("drive/wait source delay");
                let prop = dj.clone() - LinExpr::from(d_event[a.source]) - LinExpr::from(sa);
                let z = model.binary(format!("b_{id}"));
                source_wins[j] = Some(z);
                model.add_ge(format!("prop_lo_{id}"), prop.clone(), -slack);
                model.add_ge(format!("src_lo_{id}"), dj.clone() - sj.clone(), 0.0);
                model.add_le(format!("prop_hi_{id}"), prop - LinExpr::from(z) * big_m, -slack);
                model.add_le(format!("src_hi_{id}"), dj - sj + LinExpr::from(z) * big_m, big_m);
            }
        }
    }

    let mut obj = LinExpr::constant(0.0);
    let mut k_change = vec![None; ean.num_activities()];
    for (k, a) in ean.activities.iter().enumerate() {
        let pi_a = tt.durations[k] as f64;
        let diff = LinExpr::from(d_event[a.target]) - LinExpr::from(d_event[a.source]);
        if a.is_change() {
            let lower = a.lower as f64;
            let klo = ((lower - pi_a - unc.rho) / t).floor();
            let khi = ((lower + t - 1.0 - pi_a + unc.rho) / t).ceil();
            let ka = model.integer(format!("k_{}", a.id), klo, khi);
            k_change[k] = Some(ka);
            let dur = diff + LinExpr::from(ka) * t + LinExpr::constant(pi_a);
            model.add_ge(format!("rep_lo_{}", a.id), dur.clone(), lower);
            model.add_le(format!("rep_hi_{}", a.id), dur.clone(), lower + t - 1.0);
            obj.add_scaled(&dur, a.weight);
        } else {
            obj.add_scaled(&(diff + LinExpr::constant(pi_a)), a.weight);
        }
    }
    for (i, e) in ean.events.iter().enumerate() {
        if e.kind == EventKind::Departure && e.weight != 0.0 {
            obj.add_term(d_event[i], e.weight);
        }
    }
    model.set_objective(obj);
    FwcModel {
        model,
        s_event,
        s_activity,
        d_event,
        k_change,
        source_wins,
        big_m,
    }
}

impl FwcModel {
    /// Scenario read from an incumbent, projected onto `S` to remove solver
    /// round-off.
    pub fn scenario(&self, outcome: &SolveOutcome, unc: &UncertaintySet) -> Scenario {
        let s = Scenario {
            event: self.s_event.iter().map(|&v| outcome.value(v)).collect(),
            activity: self
                .s_activity
                .iter()
                .map(|v| v.map_or(0.0, |v| outcome.value(v)))
                .collect(),
        };
        s.projected(unc)
    }
}

#[derive(Clone, Debug)]
pub struct WorstCase {
    pub scenario: Scenario,
    /// Solver objective.
    pub objective: f64,
    /// `τ(π, d)` recomputed by no-wait propagation of the scenario.
    pub value: f64,
    pub outcome: SolveOutcome,
}

/// Solves F-WC; `cutoff` stops the search once a scenario worse than it is
/// found.
pub fn solve_fwc(ean: &PeriodicEan, tt: &Timetable, unc: &UncertaintySet, params: SolveParams) -> Result<WorstCase, Error> {
    let mut fm = build_fwc(ean, tt, unc);
    fm.model.params = params;
    let mut ws = vec![0.0; fm.model.num_vars()];
    // Zero scenario as a start: d = 0, every representative equals π_a.
    for (k, v) in fm.k_change.iter().enumerate() {
        if let Some(v) = v {
            let shift = (tt.durations[k] - ean.activities[k].lower).div_euclid(ean.period);
            ws[v.index()] = -(shift as f64);
        }
    }
    for v in fm.source_wins.iter().flatten() {
        ws[v.index()] = 1.0;
    }
    fm.model.warm_start = Some(ws);
    let out = solve_checked(&fm.model)?;
    let scenario = fm.scenario(&out, unc);
    let bad = scenario.violations(unc, &ScenarioDomain::periodic(ean));
    if !bad.is_empty() {
        return Err(Error::Invalid(format!("F-WC scenario outside S: {}", bad.join("; "))));
    }
    let value = tau(ean, tt, &no_wait_propagate(ean, tt, &scenario));
    if (value - out.objective()).abs() > 1e-4 * (1.0 + value.abs()) {
        log::warn!(
            "F-WC objective {} differs from no-wait evaluation {} of its scenario",
            out.objective(),
            value
        );
    }
    Ok(WorstCase {
        scenario,
        objective: out.objective(),
        value,
        outcome: out,
    })
}
