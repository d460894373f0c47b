//! Delay management: aperiodic (DM) and periodic (P-DM) models and the
//! closed-form no-wait propagation.

use milp::{LinExpr, MilpModel, ObjSense, SolveOutcome, SolveParams, VarId};
use serde::{Deserialize, Serialize};

use crate::ean::{EventKind, PeriodicEan};
use crate::pesp::solve_checked;
use crate::rollout::AperiodicEan;
use crate::scenario::Scenario;
use crate::timetable::Timetable;
use crate::{Error, FEAS_TOL};

/// Propagated delays for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaySolution {
    pub event: Vec<f64>,
    pub activity: Vec<f64>,
    /// Modulo shift `z_a` of each change activity (periodic models, else 0).
    pub modulo: Vec<i64>,
    /// Dropped connections `y_a = 1` (aperiodic model, else false).
    pub dropped: Vec<bool>,
    /// Objective of the delay management model that produced the solution.
    pub objective: f64,
}

/// Representative of `x` modulo `T` in `[lower, lower + T)`.
pub(crate) fn representative(x: f64, lower: f64, period: f64) -> f64 {
    let mut r = lower + (x - lower).rem_euclid(period);
    if r >= lower + period - 1e-9 {
        r -= period;
    }
    r
}

/// `Σ_a w_a d_a + Σ_{i ∈ dep} w_i d_i`.
pub fn pdm_objective(ean: &PeriodicEan, d: &DelaySolution) -> f64 {
    let acts: f64 = ean.activities.iter().zip(&d.activity).map(|(a, x)| a.weight * x).sum();
    let deps: f64 = ean
        .events
        .iter()
        .zip(&d.event)
        .filter(|(e, _)| e.kind == EventKind::Departure)
        .map(|(e, x)| e.weight * x)
        .sum();
    acts + deps
}

/// `τ(π, d) = Σ_a w_a (π_a + d_a) + Σ_{i ∈ dep} w_i d_i`.
pub fn tau(ean: &PeriodicEan, tt: &Timetable, d: &DelaySolution) -> f64 {
    tt.weighted_duration(ean) + pdm_objective(ean, d)
}

/// Delays when no train ever waits for a connection.
pub fn no_wait_propagate(ean: &PeriodicEan, tt: &Timetable, s: &Scenario) -> DelaySolution {
    let t = ean.period as f64;
    let mut event = vec![0.0; ean.num_events()];
    for e in ean.propagation_order() {
        event[e] = match ean.incoming_dw(e) {
            None => s.event[e],
            Some(k) => {
                let a = &ean.activities[k];
                let slack = tt.slack(ean, k) as f64;
                (event[a.source] + s.activity[k] - slack).max(s.event[e])
            }
        };
    }
    let mut activity = vec![0.0; ean.num_activities()];
    let mut modulo = vec![0i64; ean.num_activities()];
    for (k, a) in ean.activities.iter().enumerate() {
        let diff = event[a.target] - event[a.source];
        if a.is_change() {
            let pi_a = tt.durations[k] as f64;
            let r = representative(pi_a + diff, a.lower as f64, t);
            activity[k] = r - pi_a;
            modulo[k] = ((activity[k] - diff) / t).round() as i64;
        } else {
            activity[k] = diff;
        }
    }
    let mut d = DelaySolution {
        event,
        activity,
        modulo,
        dropped: vec![false; ean.num_activities()],
        objective: 0.0,
    };
    d.objective = pdm_objective(ean, &d);
    d
}

/// Independent check of `d ∈ D(π, s)`; returns one message per violation.
pub fn pdm_violations(ean: &PeriodicEan, tt: &Timetable, s: &Scenario, d: &DelaySolution, tol: f64) -> Vec<String> {
    let t = ean.period as f64;
    let mut out = Vec::new();
    for (i, (&x, &si)) in d.event.iter().zip(&s.event).enumerate() {
        if x < si - tol {
            out.push(format!("event {}: d={x} < s={si}", ean.events[i].id));
        }
    }
    for (k, a) in ean.activities.iter().enumerate() {
        let mut expect = d.event[a.target] - d.event[a.source];
        if a.is_change() {
            expect += d.modulo[k] as f64 * t;
        }
        if (d.activity[k] - expect).abs() > tol {
            out.push(format!("activity {}: d_a={} but d_j-d_i(+zT)={expect}", a.id, d.activity[k]));
        }
        if tt.durations[k] as f64 + d.activity[k] < a.lower as f64 + s.activity[k] - tol {
            out.push(format!("activity {}: disposed duration below L_a + s_a", a.id));
        }
    }
    out
}

pub struct PdmModel {
    pub model: MilpModel,
    pub d_event: Vec<VarId>,
    pub d_activity: Vec<VarId>,
    /// `z_a` for change activities.
    pub z: Vec<Option<VarId>>,
}

/// Periodic delay management for a fixed timetable and scenario.
pub fn build_pdm(ean: &PeriodicEan, tt: &Timetable, s: &Scenario) -> PdmModel {
    let t = ean.period as f64;
    let dmax = s.total() + t;
    let mut model = MilpModel::new("pdm", ObjSense::Minimize);
    let d_event: Vec<VarId> = ean
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| model.continuous(format!("d_{}", e.id), s.event[i], dmax.max(s.event[i])))
        .collect();
    let mut d_activity = Vec::with_capacity(ean.num_activities());
    let mut z = Vec::with_capacity(ean.num_activities());
    for (k, a) in ean.activities.iter().enumerate() {
        let pi_a = tt.durations[k] as f64;
        let lower = a.lower as f64;
        let mut diff = LinExpr::from(d_event[a.target]) - LinExpr::from(d_event[a.source]);
        let (lo, hi) = if a.is_change() {
            let zlo = ((lower - pi_a - dmax) / t).floor();
            let zhi = ((lower - pi_a + t + dmax) / t).ceil();
            let za = model.integer(format!("z_{}", a.id), zlo, zhi);
            diff.add_term(za, t);
            z.push(Some(za));
            (lower - pi_a, lower - pi_a + t)
        } else {
            z.push(None);
            (-dmax, dmax)
        };
        let da = model.continuous(format!("da_{}", a.id), lo, hi);
        model.add_eq(format!("def_{}", a.id), LinExpr::from(da) - diff, 0.0);
        model.add_ge(format!("min_dur_{}", a.id), LinExpr::from(da), lower + s.activity[k] - pi_a);
        d_activity.push(da);
    }
    let mut obj = LinExpr::new();
    for (k, a) in ean.activities.iter().enumerate() {
        if a.weight != 0.0 {
            obj.add_term(d_activity[k], a.weight);
        }
    }
    for (i, e) in ean.events.iter().enumerate() {
        if e.kind == EventKind::Departure && e.weight != 0.0 {
            obj.add_term(d_event[i], e.weight);
        }
    }
    model.set_objective(obj);
    PdmModel {
        model,
        d_event,
        d_activity,
        z,
    }
}

impl PdmModel {
    pub fn solution(&self, outcome: &SolveOutcome) -> DelaySolution {
        DelaySolution {
            event: self.d_event.iter().map(|&v| outcome.value(v)).collect(),
            activity: self.d_activity.iter().map(|&v| outcome.value(v)).collect(),
            modulo: self
                .z
                .iter()
                .map(|z| z.map_or(0, |v| outcome.value(v).round() as i64))
                .collect(),
            dropped: vec![false; self.d_activity.len()],
            objective: outcome.objective(),
        }
    }

    /// Start values derived from the no-wait solution.
    pub fn start_from(&self, d: &DelaySolution) -> Vec<f64> {
        let mut ws = vec![0.0; self.model.num_vars()];
        for (v, x) in self.d_event.iter().zip(&d.event) {
            ws[v.index()] = *x;
        }
        for (v, x) in self.d_activity.iter().zip(&d.activity) {
            ws[v.index()] = *x;
        }
        for (z, m) in self.z.iter().zip(&d.modulo) {
            if let Some(v) = z {
                ws[v.index()] = *m as f64;
            }
        }
        ws
    }
}

/// Solves P-DM, warm-started with the no-wait solution. The returned solution
/// is checked against `D(π, s)` independently of the solver.
pub fn solve_pdm(ean: &PeriodicEan, tt: &Timetable, s: &Scenario, params: SolveParams) -> Result<(DelaySolution, SolveOutcome), Error> {
    let mut pm = build_pdm(ean, tt, s);
    pm.model.params = params;
    pm.model.warm_start = Some(pm.start_from(&no_wait_propagate(ean, tt, s)));
    let out = solve_checked(&pm.model)?;
    let d = pm.solution(&out);
    let bad = pdm_violations(ean, tt, s, &d, FEAS_TOL);
    if !bad.is_empty() {
        return Err(Error::Invalid(format!("P-DM incumbent infeasible: {}", bad.join("; "))));
    }
    Ok((d, out))
}

pub struct DmModel {
    pub model: MilpModel,
    pub d_event: Vec<VarId>,
    /// `y_a` for change activities.
    pub y: Vec<Option<VarId>>,
}

/// Aperiodic delay management with wait/depart decisions on connections.
/// Missing a connection costs its passengers one period.
pub fn build_dm(aper: &AperiodicEan, s: &Scenario) -> DmModel {
    let t = aper.period as f64;
    let big_m = s.total() + t;
    let mut model = MilpModel::new("dm", ObjSense::Minimize);
    let d_event: Vec<VarId> = (0..aper.events.len())
        .map(|i| model.continuous(format!("d_{i}"), s.event[i], big_m.max(s.event[i])))
        .collect();
    let mut y = Vec::with_capacity(aper.activities.len());
    let mut obj = LinExpr::new();
    for (k, a) in aper.activities.iter().enumerate() {
        let span = aper.duration(k) as f64;
        let diff = LinExpr::from(d_event[a.target]) - LinExpr::from(d_event[a.source]);
        if a.kind.is_driving_or_waiting() {
            model.add_ge(format!("dw_{k}"), diff, a.lower as f64 + s.activity[k] - span);
            y.push(None);
        } else {
            let ya = model.binary(format!("y_{k}"));
            model.add_ge(format!("ch_{k}"), diff + LinExpr::from(ya) * big_m, a.lower as f64 - span);
            if a.weight != 0.0 {
                obj.add_term(ya, a.weight * t);
            }
            y.push(Some(ya));
        }
    }
    for (i, e) in aper.events.iter().enumerate() {
        if e.kind == EventKind::Arrival && e.weight != 0.0 {
            obj.add_term(d_event[i], e.weight);
        }
    }
    model.set_objective(obj);
    DmModel { model, d_event, y }
}

/// Aperiodic no-wait delays: propagation along drive/wait activities only,
/// with every connection that no longer holds dropped.
pub fn aperiodic_no_wait(aper: &AperiodicEan, s: &Scenario) -> DelaySolution {
    let n = aper.events.len();
    let mut incoming = vec![None; n];
    for (k, a) in aper.activities.iter().enumerate() {
        if a.kind.is_driving_or_waiting() {
            incoming[a.target] = Some(k);
        }
    }
    // Drive/wait chains run forward in time, so time order is a valid order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (aper.events[i].time, i));
    let mut event = vec![0.0; n];
    for i in order {
        event[i] = match incoming[i] {
            None => s.event[i],
            Some(k) => {
                let a = &aper.activities[k];
                let slack = (aper.duration(k) - a.lower) as f64;
                (event[a.source] + s.activity[k] - slack).max(s.event[i])
            }
        };
    }
    let mut activity = vec![0.0; aper.activities.len()];
    let mut dropped = vec![false; aper.activities.len()];
    let mut objective = 0.0;
    for (k, a) in aper.activities.iter().enumerate() {
        activity[k] = event[a.target] - event[a.source];
        if !a.kind.is_driving_or_waiting() && aper.duration(k) as f64 + activity[k] < a.lower as f64 - FEAS_TOL {
            dropped[k] = true;
            objective += a.weight * aper.period as f64;
        }
    }
    for (i, e) in aper.events.iter().enumerate() {
        if e.kind == EventKind::Arrival {
            objective += e.weight * event[i];
        }
    }
    DelaySolution {
        event,
        activity,
        modulo: vec![0; aper.activities.len()],
        dropped,
        objective,
    }
}

/// Solves DM, warm-started with the no-wait solution.
pub fn solve_dm(aper: &AperiodicEan, s: &Scenario, params: SolveParams) -> Result<(DelaySolution, SolveOutcome), Error> {
    let mut dm = build_dm(aper, s);
    dm.model.params = params;
    let start = aperiodic_no_wait(aper, s);
    let mut ws = vec![0.0; dm.model.num_vars()];
    for (v, x) in dm.d_event.iter().zip(&start.event) {
        ws[v.index()] = *x;
    }
    for (y, &dr) in dm.y.iter().zip(&start.dropped) {
        if let Some(v) = y {
            ws[v.index()] = if dr { 1.0 } else { 0.0 };
        }
    }
    dm.model.warm_start = Some(ws);
    let out = solve_checked(&dm.model)?;
    let event: Vec<f64> = dm.d_event.iter().map(|&v| out.value(v)).collect();
    let activity = aper
        .activities
        .iter()
        .map(|a| event[a.target] - event[a.source])
        .collect();
    let dropped = dm.y.iter().map(|y| y.is_some_and(|v| out.value(v) > 0.5)).collect();
    let d = DelaySolution {
        event,
        activity,
        modulo: vec![0; aper.activities.len()],
        dropped,
        objective: out.objective(),
    };
    Ok((d, out))
}

/// Aperiodic travel time: nominal durations plus the DM objective.
pub fn aperiodic_tau(aper: &AperiodicEan, d: &DelaySolution) -> f64 {
    aper.weighted_duration() + d.objective
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::ean::fixtures::{act, ev};
    use crate::ean::{ActivityKind, EventKind};
    use crate::rollout::rollout;
    use crate::timetable::timetable_durations;

    fn demo_setup() -> (PeriodicEan, Timetable, Scenario) {
        let ean = demo::ean();
        let tt = timetable_durations(&ean, &demo::TIMES).unwrap();
        (ean, tt, demo::scenario())
    }

    #[test]
    fn demo_no_wait() {
        let (ean, tt, s) = demo_setup();
        let d = no_wait_propagate(&ean, &tt, &s);
        assert_eq!(d.event, demo::no_wait_delays().to_vec());
        let changes: Vec<f64> = ean
            .change_activities()
            .map(|(k, _)| tt.durations[k] as f64 + d.activity[k])
            .collect();
        assert_eq!(changes, vec![12.0, 55.0, 4.0]);
        assert!(pdm_violations(&ean, &tt, &s, &d, 0.0).is_empty());
    }

    #[test]
    fn demo_pdm_agrees_with_no_wait() {
        let (ean, tt, s) = demo_setup();
        let (d, _) = solve_pdm(&ean, &tt, &s, SolveParams::default()).unwrap();
        let nw = no_wait_propagate(&ean, &tt, &s);
        for (a, b) in d.event.iter().zip(&nw.event) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", d.event, nw.event);
        }
        for (a, b) in d.activity.iter().zip(&nw.activity) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_scenario() {
        let (ean, tt, _) = demo_setup();
        let s = Scenario::zero(&ean);
        let d = no_wait_propagate(&ean, &tt, &s);
        assert!(d.event.iter().chain(&d.activity).all(|&x| x == 0.0));
        assert_eq!(tau(&ean, &tt, &d), tt.weighted_duration(&ean));
        let (pd, out) = solve_pdm(&ean, &tt, &s, SolveParams::default()).unwrap();
        assert!(out.objective().abs() < 1e-9);
        assert!(pd.event.iter().all(|&x| x.abs() < 1e-9));
    }

    #[test]
    fn demo_tau_by_hand() {
        let (mut ean, tt, s) = demo_setup();
        for a in ean.activities.iter_mut() {
            a.weight = 1.0;
        }
        for e in ean.events.iter_mut() {
            e.weight = 1.0;
        }
        let d = no_wait_propagate(&ean, &tt, &s);
        // Disposed durations: line 1 (23, 3, 14, 3, 22), line 2 (22, 3, 22, 13, 15),
        // changes (12, 55, 4); departure delays (0, 8, 10) and (0, 0, 10).
        let durations = 23 + 3 + 14 + 3 + 22 + 22 + 3 + 22 + 13 + 15 + 12 + 55 + 4;
        let departures = 8 + 10 + 10;
        assert_eq!(tau(&ean, &tt, &d), (durations + departures) as f64);
        let mut doubled = ean.clone();
        for a in doubled.activities.iter_mut() {
            a.weight *= 2.0;
        }
        for e in doubled.events.iter_mut() {
            e.weight *= 2.0;
        }
        assert_eq!(tau(&doubled, &tt, &d), 2.0 * tau(&ean, &tt, &d));
    }

    fn chain(slack2: i64) -> (PeriodicEan, Timetable) {
        let events = vec![
            ev(0, EventKind::Departure, "A", "1", 1.0),
            ev(1, EventKind::Arrival, "B", "1", 1.0),
            ev(2, EventKind::Departure, "B", "1", 1.0),
            ev(3, EventKind::Arrival, "C", "1", 1.0),
        ];
        let acts = vec![
            act(0, ActivityKind::Drive, 0, 1, 5, Some(10), 1.0),
            act(1, ActivityKind::Wait, 1, 2, 1, Some(5), 1.0),
            act(2, ActivityKind::Drive, 2, 3, 5, Some(10), 1.0),
        ];
        let ean = PeriodicEan::new(events, acts, 60);
        let tt = timetable_durations(&ean, &[0, 5, 6, 11 + slack2]).unwrap();
        (ean, tt)
    }

    #[test]
    fn chain_slack_absorbs_delay() {
        let (ean, tt) = chain(2);
        let mut s = Scenario::zero(&ean);
        s.activity[0] = 5.0;
        let d = no_wait_propagate(&ean, &tt, &s);
        assert_eq!(d.event, vec![0.0, 5.0, 5.0, 3.0]);
        let (pd, _) = solve_pdm(&ean, &tt, &s, SolveParams::default()).unwrap();
        assert!((pd.event[3] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn event_delay_dominates_upstream() {
        let (ean, tt) = chain(0);
        let mut s = Scenario::zero(&ean);
        s.activity[0] = 5.0;
        s.event[2] = 7.0;
        let d = no_wait_propagate(&ean, &tt, &s);
        assert_eq!(d.event[2], 7.0);
    }

    #[test]
    fn dm_zero_and_single_drive() {
        let (ean, tt) = chain(0);
        let aper = rollout(&ean, &tt, (0, 0));
        let s = Scenario::zeros(aper.events.len(), aper.activities.len());
        let (d, out) = solve_dm(&aper, &s, SolveParams::default()).unwrap();
        assert!(out.objective().abs() < 1e-9 && d.event.iter().all(|&x| x == 0.0));

        let (mut ean, _) = chain(0);
        ean.activities[0].upper = Some(10);
        let tt = timetable_durations(&ean, &[0, 6, 7, 12]).unwrap();
        let aper = rollout(&ean, &tt, (0, 59));
        let mut s = Scenario::zeros(aper.events.len(), aper.activities.len());
        let first = aper.activities.iter().position(|a| a.origin == 0).unwrap();
        s.activity[first] = 4.0;
        let (d, _) = solve_dm(&aper, &s, SolveParams::default()).unwrap();
        let target = aper.activities[first].target;
        assert!((d.event[target] - 3.0).abs() < 1e-9);
    }

    /// Feeder line 1 arrives at B, line 2 departs B after a tight change.
    fn transfer(w_change: f64, w_after: f64) -> AperiodicEan {
        let events = vec![
            ev(0, EventKind::Departure, "A", "1", 0.0),
            ev(1, EventKind::Arrival, "B", "1", 0.0),
            ev(2, EventKind::Departure, "B", "2", 0.0),
            ev(3, EventKind::Arrival, "C", "2", w_after),
        ];
        let acts = vec![
            act(0, ActivityKind::Drive, 0, 1, 5, Some(5), 0.0),
            act(1, ActivityKind::Drive, 2, 3, 5, Some(5), 0.0),
            act(2, ActivityKind::Change, 1, 2, 2, None, w_change),
        ];
        let ean = PeriodicEan::new(events, acts, 60);
        let tt = timetable_durations(&ean, &[0, 5, 7, 12]).unwrap();
        rollout(&ean, &tt, (0, 30))
    }

    #[test]
    fn wait_or_depart_matches_enumeration() {
        for (w_change, w_after) in [(1.0, 3.0), (1.0, 10.0), (5.0, 20.0), (0.0, 1.0), (2.0, 0.0)] {
            let aper = transfer(w_change, w_after);
            let mut s = Scenario::zeros(aper.events.len(), aper.activities.len());
            s.event[0] = 10.0;
            // y = 0: line 2 waits the full 10 minutes; y = 1: passengers wait T.
            let wait = 10.0 * w_after;
            let depart = w_change * 60.0;
            let (d, out) = solve_dm(&aper, &s, SolveParams::default()).unwrap();
            assert!((out.objective() - wait.min(depart)).abs() < 1e-6, "{w_change} {w_after}");
            assert!(d.event[1] >= 10.0 - 1e-9);
        }
    }
}
