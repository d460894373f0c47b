//! Nominal periodic timetabling: the PESP model and a zero-buffer heuristic.

use std::collections::BTreeMap;
use std::sync::Mutex;

use milp::{LinExpr, MilpModel, ObjSense, SolveOutcome, SolveParams, SolveStatus, VarId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ean::PeriodicEan;
use crate::timetable::{periodic_duration, timetable_durations, Timetable};
use crate::{Error, FEAS_TOL};

/// Event time and modulo variables shared by every periodic model.
#[derive(Clone, Debug)]
pub struct PeriodicVars {
    pub pi: Vec<VarId>,
    pub z: Vec<VarId>,
}

impl PeriodicVars {
    /// Adds `π_e ∈ [0, T-1]`, `z_a` and `L_a <= π_j - π_i + z_a T <= U_a`.
    pub fn add_to(model: &mut MilpModel, ean: &PeriodicEan) -> PeriodicVars {
        let t = ean.period;
        let pi: Vec<VarId> = ean
            .events
            .iter()
            .map(|e| model.integer(format!("pi_{}", e.id), 0.0, (t - 1) as f64))
            .collect();
        let mut z = Vec::with_capacity(ean.num_activities());
        for a in &ean.activities {
            let upper = a.effective_upper(t);
            let zlo = (a.lower - (t - 1)).div_euclid(t) + i64::from((a.lower - (t - 1)).rem_euclid(t) != 0);
            let zhi = (upper + t - 1).div_euclid(t);
            let za = model.integer(format!("z_{}", a.id), zlo as f64, zhi as f64);
            let dur = PeriodicVars::duration_expr(pi[a.source], pi[a.target], za, t);
            model.add_ge(format!("pesp_lo_{}", a.id), dur.clone(), a.lower as f64);
            model.add_le(format!("pesp_hi_{}", a.id), dur, upper as f64);
            z.push(za);
        }
        PeriodicVars { pi, z }
    }

    fn duration_expr(pi_i: VarId, pi_j: VarId, z: VarId, t: i64) -> LinExpr {
        LinExpr::from(pi_j) - LinExpr::from(pi_i) + LinExpr::from(z) * t as f64
    }

    /// `π_a` as a linear expression.
    pub fn duration(&self, ean: &PeriodicEan, activity: usize) -> LinExpr {
        let a = &ean.activities[activity];
        Self::duration_expr(self.pi[a.source], self.pi[a.target], self.z[activity], ean.period)
    }

    /// `Σ w_a π_a`.
    pub fn weighted_duration(&self, ean: &PeriodicEan) -> LinExpr {
        let mut e = LinExpr::new();
        for (k, a) in ean.activities.iter().enumerate() {
            if a.weight != 0.0 {
                e.add_scaled(&self.duration(ean, k), a.weight);
            }
        }
        e
    }

    /// Start values for these variables taken from a feasible timetable.
    pub fn start_values(&self, tt: &Timetable, values: &mut [f64]) {
        for (v, &x) in self.pi.iter().zip(&tt.times) {
            values[v.index()] = x as f64;
        }
        for (v, &x) in self.z.iter().zip(&tt.offsets) {
            values[v.index()] = x as f64;
        }
    }

    /// Reads event times from an incumbent and rederives durations.
    pub fn timetable(&self, ean: &PeriodicEan, outcome: &SolveOutcome) -> Result<Timetable, Error> {
        let times: Vec<i64> = self.pi.iter().map(|&v| outcome.value(v).round() as i64).collect();
        let tt = timetable_durations(ean, &times)?;
        tt.ensure_feasible(ean)?;
        Ok(tt)
    }
}

pub struct PespModel {
    pub model: MilpModel,
    pub vars: PeriodicVars,
}

/// `min Σ w_a π_a` over feasible periodic timetables.
pub fn build_pesp(ean: &PeriodicEan) -> PespModel {
    let mut model = MilpModel::new("pesp", ObjSense::Minimize);
    let vars = PeriodicVars::add_to(&mut model, ean);
    model.set_objective(vars.weighted_duration(ean));
    PespModel { model, vars }
}

static RECHECKED: Mutex<BTreeMap<String, usize>> = Mutex::new(BTreeMap::new());

/// Number of incumbents that passed the recheck in this process, per model name.
pub fn rechecked_incumbents() -> BTreeMap<String, usize> {
    RECHECKED.lock().unwrap_or_else(|e| e.into_inner()).clone()
}

/// Rejects incumbents that break a constraint, without trusting the solver.
pub(crate) fn recheck(model: &MilpModel, outcome: &SolveOutcome) -> Result<(), Error> {
    if let Some(values) = &outcome.values {
        let bad = model.check_feasibility(values, FEAS_TOL);
        if let Some(v) = bad.first() {
            return Err(Error::Invalid(format!(
                "{}: incumbent violates {} by {:.3e} ({} violations)",
                model.name,
                v.item,
                v.amount,
                bad.len()
            )));
        }
        *RECHECKED
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry(model.name.clone())
            .or_default() += 1;
    }
    Ok(())
}

/// Solves a model and fails on infeasibility or an incumbent that does not
/// pass the independent recheck.
pub(crate) fn solve_checked(model: &MilpModel) -> Result<SolveOutcome, Error> {
    let out = milp::solve(model)?;
    match out.status {
        SolveStatus::Infeasible => Err(Error::Infeasible {
            model: model.name.clone(),
        }),
        SolveStatus::Unbounded => Err(Error::Invalid(format!("{} is unbounded", model.name))),
        _ => {
            recheck(model, &out)?;
            Ok(out)
        }
    }
}

/// Solves PESP, optionally warm-started from `start`.
pub fn solve_pesp(ean: &PeriodicEan, params: SolveParams, start: Option<&Timetable>) -> Result<(Timetable, SolveOutcome), Error> {
    let mut pm = build_pesp(ean);
    pm.model.params = params;
    if let Some(tt) = start.filter(|tt| tt.is_feasible()) {
        let mut ws = vec![0.0; pm.model.num_vars()];
        pm.vars.start_values(tt, &mut ws);
        pm.model.warm_start = Some(ws);
    }
    let out = solve_checked(&pm.model)?;
    let tt = pm.vars.timetable(ean, &out)?;
    Ok((tt, out))
}

/// Drops change activities with at most `cutoff` passengers.
pub fn apply_passenger_cutoff(ean: &PeriodicEan, cutoff: f64) -> PeriodicEan {
    let kept = ean
        .activities
        .iter()
        .filter(|a| !a.is_change() || a.weight > cutoff)
        .cloned()
        .collect();
    ean.with_activities(kept)
}

struct LineLayout {
    /// Line label, used for tie-breaking.
    label: String,
    events: Vec<usize>,
    /// Event time relative to the line's first event.
    rel: Vec<i64>,
}

/// Zero-buffer heuristic: every drive and wait activity runs at its lower
/// bound and lines are merged greedily, each new line taking the offset that
/// minimizes weighted change durations towards the lines already placed.
///
/// The seed only fixes the absolute offset of the first line.
pub fn match_heuristic(ean: &PeriodicEan, seed: u64) -> Result<Timetable, Error> {
    let t = ean.period;
    let mut lines: Vec<LineLayout> = ean
        .line_paths()
        .into_iter()
        .map(|path| {
            let mut rel = vec![0i64; path.len()];
            for k in 1..path.len() {
                let a = ean.incoming_dw(path[k]).expect("path step");
                rel[k] = rel[k - 1] + ean.activities[a].lower;
            }
            LineLayout {
                label: ean.events[path[0]].line.clone(),
                events: path,
                rel,
            }
        })
        .collect();
    lines.sort_by(|a, b| a.label.cmp(&b.label));
    let nl = lines.len();
    let mut line_of = vec![0usize; ean.num_events()];
    let mut rel_of = vec![0i64; ean.num_events()];
    for (l, line) in lines.iter().enumerate() {
        for (&e, &r) in line.events.iter().zip(&line.rel) {
            line_of[e] = l;
            rel_of[e] = r;
        }
    }
    // Change activities grouped by the pair of lines they connect.
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); nl];
    let mut pair_weight: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (k, a) in ean.change_activities() {
        let (p, q) = (line_of[a.source], line_of[a.target]);
        links[p].push(k);
        if q != p {
            links[q].push(k);
        }
        *pair_weight.entry((p.min(q), p.max(q))).or_default() += a.weight;
    }
    let weight_between = |l: usize, placed: &[bool]| -> f64 {
        pair_weight
            .iter()
            .filter(|((p, q), _)| (*p == l && placed[*q]) || (*q == l && placed[*p]))
            .map(|(_, w)| *w)
            .sum()
    };
    // Weighted change duration of `line` at `offset` against placed lines.
    let cost = |line: usize, offset: i64, offsets: &[i64], placed: &[bool]| -> f64 {
        links[line]
            .iter()
            .filter_map(|&k| {
                let a = &ean.activities[k];
                let (p, q) = (line_of[a.source], line_of[a.target]);
                let other = if p == line { q } else { p };
                if other != line && !placed[other] {
                    return None;
                }
                let off = |l: usize| if l == line { offset } else { offsets[l] };
                let ti = off(p) + rel_of[a.source];
                let tj = off(q) + rel_of[a.target];
                Some(a.weight * periodic_duration(tj - ti, a.lower, t) as f64)
            })
            .sum()
    };
    let best_offset = |line: usize, offsets: &[i64], placed: &[bool]| -> i64 {
        let mut best = (f64::INFINITY, 0);
        for o in 0..t {
            let c = cost(line, o, offsets, placed);
            if c < best.0 - 1e-9 {
                best = (c, o);
            }
        }
        best.1
    };

    let mut offsets = vec![0i64; nl];
    let mut placed = vec![false; nl];
    if nl > 0 {
        let all = vec![true; nl];
        let first = (0..nl)
            .max_by(|&a, &b| {
                weight_between(a, &all)
                    .partial_cmp(&weight_between(b, &all))
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        offsets[first] = rng.random_range(0..t);
        placed[first] = true;
        for _ in 1..nl {
            let next = (0..nl)
                .filter(|&l| !placed[l])
                .max_by(|&a, &b| {
                    weight_between(a, &placed)
                        .partial_cmp(&weight_between(b, &placed))
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            offsets[next] = best_offset(next, &offsets, &placed);
            placed[next] = true;
        }
        // Re-optimize single offsets until no line improves.
        for _ in 0..20 {
            let mut improved = false;
            for l in 0..nl {
                let current = cost(l, offsets[l], &offsets, &placed);
                let o = best_offset(l, &offsets, &placed);
                if cost(l, o, &offsets, &placed) < current - 1e-9 {
                    offsets[l] = o;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
    let mut times = vec![0i64; ean.num_events()];
    for e in 0..ean.num_events() {
        times[e] = (offsets[line_of[e]] + rel_of[e]).rem_euclid(t);
    }
    let tt = timetable_durations(ean, &times)?;
    tt.ensure_feasible(ean)?;
    Ok(tt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::ean::fixtures::{act, ev, single_drive};
    use crate::ean::{ActivityKind, EventKind};

    /// Two lines A->B and C->B->D style, joined by one change at B.
    pub(crate) fn two_line(t: i64, change_upper: Option<i64>) -> PeriodicEan {
        let events = vec![
            ev(0, EventKind::Departure, "A", "1", 1.0),
            ev(1, EventKind::Arrival, "B", "1", 1.0),
            ev(2, EventKind::Departure, "B", "2", 1.0),
            ev(3, EventKind::Arrival, "C", "2", 1.0),
        ];
        let acts = vec![
            act(0, ActivityKind::Drive, 0, 1, 3, Some(5), 1.0),
            act(1, ActivityKind::Drive, 2, 3, 3, Some(5), 1.0),
            act(2, ActivityKind::Change, 1, 2, 1, change_upper, 1.0),
        ];
        PeriodicEan::new(events, acts, t)
    }

    #[test]
    fn forced_duration() {
        let (tt, out) = solve_pesp(&single_drive(5, 5, 60), SolveParams::default(), None).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective() - 5.0).abs() < 1e-9);
        assert_eq!(tt.durations, vec![5]);
    }

    #[test]
    fn two_line_matches_enumeration() {
        let ean = two_line(10, Some(60));
        let mut best = f64::INFINITY;
        for a in 0..10 {
            for b in 0..10 {
                for c in 0..10 {
                    for d in 0..10 {
                        let tt = timetable_durations(&ean, &[a, b, c, d]).unwrap();
                        if tt.is_feasible() {
                            best = best.min(tt.weighted_duration(&ean));
                        }
                    }
                }
            }
        }
        let (tt, out) = solve_pesp(&ean, SolveParams::default(), None).unwrap();
        assert!((out.objective() - best).abs() < 1e-9);
        assert!((tt.weighted_duration(&ean) - best).abs() < 1e-9);
        assert_eq!(best, 7.0);
    }

    #[test]
    fn demo_timetable_is_pesp_feasible() {
        let ean = demo::ean();
        let pm = build_pesp(&ean);
        let tt = timetable_durations(&ean, &demo::TIMES).unwrap();
        let mut values = vec![0.0; pm.model.num_vars()];
        pm.vars.start_values(&tt, &mut values);
        assert!(pm.model.check_feasibility(&values, 0.0).is_empty());
    }

    #[test]
    fn cutoff_drops_light_changes_only() {
        let ean = demo::ean();
        assert_eq!(apply_passenger_cutoff(&ean, 0.0).num_activities(), 13);
        let none = apply_passenger_cutoff(&ean, 1.0);
        assert_eq!(none.change_activities().count(), 0);
        assert_eq!(none.dw_activities().count(), 10);
        let mut zero = ean.clone();
        zero.activities[11].weight = 0.0;
        assert_eq!(apply_passenger_cutoff(&zero, 0.0).change_activities().count(), 2);
    }

    #[test]
    fn match_single_line_has_no_buffers() {
        let ean = single_drive(4, 9, 60);
        let tt = match_heuristic(&ean, 3).unwrap();
        assert_eq!(tt.durations, vec![4]);
        assert_eq!(tt.weighted_duration(&ean), 4.0);
    }

    #[test]
    fn match_two_lines_hits_change_lower_bound() {
        let ean = two_line(10, None);
        for seed in 0..5 {
            let tt = match_heuristic(&ean, seed).unwrap();
            assert_eq!(tt.durations, vec![3, 3, 1]);
            // Best zero-buffer timetable by scanning the second line's offset.
            let best = (0..10)
                .map(|o| {
                    let times = [tt.times[0], tt.times[1], o, (o + 3) % 10];
                    timetable_durations(&ean, &times).unwrap().weighted_duration(&ean)
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(tt.weighted_duration(&ean), best);
        }
    }
}
