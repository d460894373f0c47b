//! Scenario-indexed master problems: `min t` s.t. `t >= τ(π, d_s)` for every
//! pool scenario, with `d_s` either the no-wait propagation (F-RPT) or any
//! feasible delay management (RPT on a finite pool).

use milp::{LinExpr, MilpModel, ObjSense, SolveOutcome, SolveParams, VarId};

use crate::dm::{no_wait_propagate, representative, tau};
use crate::ean::{EventKind, PeriodicEan};
use crate::pesp::{solve_checked, PeriodicVars};
use crate::scenario::Scenario;
use crate::timetable::Timetable;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MasterKind {
    /// Delays follow the no-wait strategy.
    NoWait,
    /// Delays range over all of `D(π, s)`.
    Optimal,
}

struct ScenarioBlock {
    /// Delay variable per event; `None` where the delay is the constant in `fixed`.
    d: Vec<Option<VarId>>,
    fixed: Vec<f64>,
    /// No-wait branch binaries (`1` when the event's own source delay wins).
    b: Vec<Option<VarId>>,
    /// Modulo variable per change activity.
    k: Vec<Option<VarId>>,
}

pub struct MasterModel {
    pub model: MilpModel,
    pub kind: MasterKind,
    pub vars: PeriodicVars,
    pub t: VarId,
    blocks: Vec<ScenarioBlock>,
}

/// Upper bound on no-wait delays: every source delay upstream on the line.
fn no_wait_bounds(ean: &PeriodicEan, s: &Scenario) -> Vec<f64> {
    let mut ub = vec![0.0; ean.num_events()];
    for e in ean.propagation_order() {
        ub[e] = match ean.incoming_dw(e) {
            None => s.event[e],
            Some(k) => (ub[ean.activities[k].source] + s.activity[k]).max(s.event[e]),
        };
    }
    ub
}

fn d_expr(block: &ScenarioBlock, e: usize) -> LinExpr {
    match block.d[e] {
        Some(v) => LinExpr::from(v),
        None => LinExpr::constant(block.fixed[e]),
    }
}

fn build(ean: &PeriodicEan, pool: &[Scenario], kind: MasterKind) -> MasterModel {
    let t = ean.period as f64;
    let name = match kind {
        MasterKind::NoWait => "frpt_master",
        MasterKind::Optimal => "rpt_master",
    };
    let mut model = MilpModel::new(name, ObjSense::Minimize);
    let vars = PeriodicVars::add_to(&mut model, ean);
    let tv = model.continuous("t", 0.0, f64::INFINITY);
    let mut blocks = Vec::with_capacity(pool.len());
    for (q, s) in pool.iter().enumerate() {
        let n = ean.num_events();
        let mut block = ScenarioBlock {
            d: vec![None; n],
            fixed: vec![0.0; n],
            b: vec![None; n],
            k: vec![None; ean.num_activities()],
        };
        let (lo, hi): (Vec<f64>, Vec<f64>) = match kind {
            MasterKind::NoWait => (s.event.clone(), no_wait_bounds(ean, s)),
            MasterKind::Optimal => {
                let dmax = s.total() + t;
                (s.event.clone(), s.event.iter().map(|&x| dmax.max(x)).collect())
            }
        };
        for e in 0..n {
            let start = ean.incoming_dw(e).is_none();
            if kind == MasterKind::NoWait && (start || hi[e] <= lo[e]) {
                block.fixed[e] = lo[e];
            } else {
                block.d[e] = Some(model.continuous(format!("d{q}_{}", ean.events[e].id), lo[e], hi[e]));
            }
        }
        for (k, a) in ean.activities.iter().enumerate() {
            let dur = vars.duration(ean, k);
            let diff = d_expr(&block, a.target) - d_expr(&block, a.source);
            if a.is_change() {
                continue;
            }
            match kind {
                MasterKind::Optimal => {
                    model.add_ge(format!("dw{q}_{}", a.id), dur + diff, (a.lower as f64) + s.activity[k]);
                }
                MasterKind::NoWait => {
                    let j = a.target;
                    let Some(dj) = block.d[j] else { continue };
                    // prop = d_j - d_i - s_a + (π_a - L_a) >= 0, zero unless b_j = 1.
                    let prop = diff + dur + LinExpr::constant(-(a.lower as f64) - s.activity[k]);
                    let max_slack = (a.effective_upper(ean.period) - a.lower) as f64;
                    let m1 = hi[j] + max_slack;
                    let m2 = hi[j] - s.event[j];
                    let b = model.binary(format!("b{q}_{}", ean.events[j].id));
                    block.b[j] = Some(b);
                    model.add_ge(format!("prop_lo{q}_{}", a.id), prop.clone(), 0.0);
                    model.add_le(format!("prop_hi{q}_{}", a.id), prop - LinExpr::from(b) * m1, 0.0);
                    model.add_le(
                        format!("src_hi{q}_{}", a.id),
                        LinExpr::from(dj) + LinExpr::from(b) * m2,
                        s.event[j] + m2,
                    );
                }
            }
        }
        let mut tau_s = LinExpr::new();
        for (k, a) in ean.activities.iter().enumerate() {
            let diff = d_expr(&block, a.target) - d_expr(&block, a.source);
            if a.is_change() {
                let lower = a.lower as f64;
                let (dhi_i, dhi_j) = (hi[a.source], hi[a.target]);
                let span_hi = match kind {
                    MasterKind::NoWait => lower + t - 1.0,
                    MasterKind::Optimal => lower + t,
                };
                let klo = ((lower - (t - 1.0) - dhi_j) / t).floor();
                let khi = ((span_hi + (t - 1.0) + dhi_i) / t).ceil();
                let kv = model.integer(format!("k{q}_{}", a.id), klo, khi);
                block.k[k] = Some(kv);
                let r = LinExpr::from(vars.pi[a.target]) - LinExpr::from(vars.pi[a.source]) + diff + LinExpr::from(kv) * t;
                model.add_ge(format!("rep_lo{q}_{}", a.id), r.clone(), lower);
                model.add_le(format!("rep_hi{q}_{}", a.id), r.clone(), span_hi);
                if a.weight != 0.0 {
                    tau_s.add_scaled(&r, a.weight);
                }
            } else if a.weight != 0.0 {
                tau_s.add_scaled(&(vars.duration(ean, k) + diff), a.weight);
            }
        }
        for (i, e) in ean.events.iter().enumerate() {
            if e.kind == EventKind::Departure && e.weight != 0.0 {
                tau_s.add_scaled(&d_expr(&block, i), e.weight);
            }
        }
        model.add_ge(format!("epi{q}"), LinExpr::from(tv) - tau_s, 0.0);
        blocks.push(block);
    }
    model.set_objective(LinExpr::from(tv));
    MasterModel {
        model,
        kind,
        vars,
        t: tv,
        blocks,
    }
}

/// F-RPT on a finite pool.
pub fn build_frpt_master(ean: &PeriodicEan, pool: &[Scenario]) -> MasterModel {
    build(ean, pool, MasterKind::NoWait)
}

/// RPT on a finite pool.
pub fn build_rpt_master(ean: &PeriodicEan, pool: &[Scenario]) -> MasterModel {
    build(ean, pool, MasterKind::Optimal)
}

impl MasterModel {
    /// Full start assignment for timetable `tt`: no-wait delays for every
    /// scenario and `t` at the largest resulting `τ`.
    pub fn start_values(&self, ean: &PeriodicEan, pool: &[Scenario], tt: &Timetable) -> Vec<f64> {
        let period = ean.period as f64;
        let mut ws = vec![0.0; self.model.num_vars()];
        self.vars.start_values(tt, &mut ws);
        let mut worst: f64 = 0.0;
        for (block, s) in self.blocks.iter().zip(pool) {
            let d = no_wait_propagate(ean, tt, s);
            worst = worst.max(tau(ean, tt, &d));
            for (e, v) in block.d.iter().enumerate() {
                if let Some(v) = v {
                    ws[v.index()] = d.event[e];
                }
                if let (Some(b), Some(k)) = (block.b[e], ean.incoming_dw(e)) {
                    let a = &ean.activities[k];
                    let prop = d.event[a.source] + s.activity[k] - tt.slack(ean, k) as f64;
                    ws[b.index()] = if s.event[e] >= prop { 1.0 } else { 0.0 };
                }
            }
            for (k, kv) in block.k.iter().enumerate() {
                if let Some(kv) = kv {
                    let a = &ean.activities[k];
                    let raw = (tt.times[a.target] - tt.times[a.source]) as f64 + d.event[a.target] - d.event[a.source];
                    let r = representative(raw, a.lower as f64, period);
                    ws[kv.index()] = ((r - raw) / period).round();
                }
            }
        }
        ws[self.t.index()] = worst;
        ws
    }

    pub fn timetable(&self, ean: &PeriodicEan, outcome: &SolveOutcome) -> Result<Timetable, Error> {
        self.vars.timetable(ean, outcome)
    }
}

#[derive(Clone, Debug)]
pub struct MasterSolution {
    pub timetable: Timetable,
    pub objective: f64,
    pub outcome: SolveOutcome,
}

/// Builds and solves a master, warm-started from `start` when given.
pub fn solve_master(
    kind: MasterKind,
    ean: &PeriodicEan,
    pool: &[Scenario],
    start: Option<&Timetable>,
    params: SolveParams,
) -> Result<MasterSolution, Error> {
    let mut mm = build(ean, pool, kind);
    mm.model.params = params;
    if let Some(tt) = start.filter(|tt| tt.is_feasible()) {
        mm.model.warm_start = Some(mm.start_values(ean, pool, tt));
    }
    let outcome = solve_checked(&mm.model)?;
    let timetable = mm.timetable(ean, &outcome)?;
    Ok(MasterSolution {
        timetable,
        objective: outcome.objective(),
        outcome,
    })
}
