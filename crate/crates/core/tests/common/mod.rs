//! Random small line networks and brute-force oracles for integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robtt::{no_wait_propagate, tau, Activity, ActivityKind, Event, EventKind, PeriodicEan, Scenario, Timetable};

/// Two or three lines of two or three stops, all passing through hub `H`,
/// with changes at the hub. Returns the network and a feasible timetable.
pub fn random_lines(seed: u64, period: i64) -> (PeriodicEan, Timetable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_lines = rng.random_range(2..=3);
    let mut events: Vec<Event> = Vec::new();
    let mut acts: Vec<Activity> = Vec::new();
    let mut times: Vec<i64> = Vec::new();
    let mut hub_arr = Vec::new();
    let mut hub_dep = Vec::new();
    for l in 0..n_lines {
        let stations: Vec<String> = match rng.random_range(0..3) {
            0 => vec![format!("X{l}"), "H".into(), format!("Y{l}")],
            1 => vec![format!("X{l}"), "H".into()],
            _ => vec!["H".into(), format!("Y{l}")],
        };
        let line = (l + 1).to_string();
        let mut t = rng.random_range(0..period);
        let mut arrival: Option<usize> = None;
        for (m, st) in stations.iter().enumerate() {
            if st == "H" {
                if let Some(a) = arrival {
                    hub_arr.push((l, a));
                }
            }
            if m + 1 == stations.len() {
                break;
            }
            if let Some(a) = arrival {
                let (lo, hi) = (1, 1 + rng.random_range(0..=1));
                t += rng.random_range(lo..=hi);
                acts.push(activity(&acts, ActivityKind::Wait, a, events.len(), lo, hi, rng.random_range(1..=5)));
            }
            let d = push_event(&mut events, &mut times, EventKind::Departure, st, &line, rng.random_range(0..=3), t, period);
            if st == "H" {
                hub_dep.push((l, d));
            }
            let (lo, hi) = {
                let lo = rng.random_range(1..=3);
                (lo, lo + rng.random_range(0..=2))
            };
            t += rng.random_range(lo..=hi);
            acts.push(activity(&acts, ActivityKind::Drive, d, events.len(), lo, hi, rng.random_range(1..=5)));
            let a = push_event(&mut events, &mut times, EventKind::Arrival, &stations[m + 1], &line, 0, t, period);
            arrival = Some(a);
        }
    }
    let mut any = false;
    for &(la, a) in &hub_arr {
        for &(ld, d) in &hub_dep {
            if la != ld && (rng.random_bool(0.7) || !any) {
                any = true;
                let mut c = activity(&acts, ActivityKind::Change, a, d, rng.random_range(1..=2), 0, rng.random_range(1..=5));
                c.upper = None;
                acts.push(c);
            }
        }
    }
    let ean = PeriodicEan::new(events, acts, period);
    assert!(ean.validate().is_empty(), "{:?}", ean.validate());
    let tt = robtt::timetable_durations(&ean, &times).expect("durations");
    tt.ensure_feasible(&ean).expect("random timetable within bounds");
    (ean, tt)
}

#[allow(clippy::too_many_arguments)]
fn push_event(
    events: &mut Vec<Event>,
    times: &mut Vec<i64>,
    kind: EventKind,
    station: &str,
    line: &str,
    weight: i64,
    t: i64,
    period: i64,
) -> usize {
    events.push(Event {
        id: events.len() as u32 + 1,
        kind,
        station: station.to_string(),
        line: line.to_string(),
        weight: weight as f64,
    });
    times.push(t.rem_euclid(period));
    events.len() - 1
}

fn activity(acts: &[Activity], kind: ActivityKind, source: usize, target: usize, lower: i64, upper: i64, weight: i64) -> Activity {
    Activity {
        id: acts.len() as u32 + 1,
        kind,
        source,
        target,
        lower,
        upper: Some(upper),
        weight: weight as f64,
    }
}

/// Total weight that one unit of delay can move `τ` by along continuous
/// pieces; the grid resolution slack is `step` times this.
pub fn weight_sum(ean: &PeriodicEan) -> f64 {
    let acts: f64 = ean.activities.iter().map(|a| a.weight).sum();
    let deps: f64 = ean
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Departure)
        .map(|e| e.weight)
        .sum();
    acts + deps
}

/// Maximum of no-wait `τ` over every scenario whose entries are multiples of
/// `step`, capped at `sigma`, with total at most `rho`. With `cap_changes`,
/// scenarios that stretch a change beyond `L + T - 1` are skipped.
pub fn grid_max_no_wait(ean: &PeriodicEan, tt: &Timetable, sigma: f64, rho: f64, step: f64, cap_changes: bool) -> f64 {
    let slots: Vec<(bool, usize)> = (0..ean.num_events())
        .map(|i| (true, i))
        .chain(ean.dw_activities().map(|(k, _)| (false, k)))
        .collect();
    let units = (rho / step + 1e-9).floor() as usize;
    let cap = ((sigma.min(rho)) / step + 1e-9).floor() as usize;
    let mut s = Scenario::zero(ean);
    let mut best = f64::NEG_INFINITY;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        ean: &PeriodicEan,
        tt: &Timetable,
        slots: &[(bool, usize)],
        cap_changes: bool,
        pos: usize,
        left: usize,
        cap: usize,
        step: f64,
        s: &mut Scenario,
        best: &mut f64,
    ) {
        if pos == slots.len() {
            let d = no_wait_propagate(ean, tt, s);
            let t = ean.period as f64;
            let stretched = ean.change_activities().any(|(_, a)| {
                let raw = (tt.times[a.target] - tt.times[a.source]) as f64 + d.event[a.target] - d.event[a.source];
                let rep = a.lower as f64 + (raw - a.lower as f64).rem_euclid(t);
                rep > a.lower as f64 + t - 1.0 + 1e-9
            });
            if cap_changes && stretched {
                return;
            }
            let v = tau(ean, tt, &d);
            if v > *best {
                *best = v;
            }
            return;
        }
        let (is_event, i) = slots[pos];
        for u in 0..=left.min(cap) {
            let x = u as f64 * step;
            if is_event {
                s.event[i] = x;
            } else {
                s.activity[i] = x;
            }
            rec(ean, tt, slots, cap_changes, pos + 1, left - u, cap, step, s, best);
        }
        if is_event {
            s.event[i] = 0.0;
        } else {
            s.activity[i] = 0.0;
        }
    }
    rec(ean, tt, &slots, cap_changes, 0, units, cap, step, &mut s, &mut best);
    best
}
