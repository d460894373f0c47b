use serde::{Deserialize, Serialize};

use crate::ean::PeriodicEan;
use crate::Error;

/// Periodic timetable: event times in `[0, T)` and the derived activity
/// durations `π_a = π_j - π_i + z_a T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timetable {
    pub times: Vec<i64>,
    pub offsets: Vec<i64>,
    pub durations: Vec<i64>,
    /// Activity indices whose smallest admissible duration exceeds `U_a`.
    pub infeasible: Vec<usize>,
}

/// Smallest value `>= lower` congruent to `diff` modulo `period`.
pub fn periodic_duration(diff: i64, lower: i64, period: i64) -> i64 {
    lower + (diff - lower).rem_euclid(period)
}

/// Derives durations and modulo offsets for `times`, choosing the minimal
/// `z_a` with `π_a >= L_a`.
pub fn timetable_durations(ean: &PeriodicEan, times: &[i64]) -> Result<Timetable, Error> {
    let t = ean.period;
    if times.len() != ean.num_events() {
        return Err(Error::Invalid(format!(
            "timetable has {} times for {} events",
            times.len(),
            ean.num_events()
        )));
    }
    if let Some((e, &x)) = times.iter().enumerate().find(|(_, &x)| !(0..t).contains(&x)) {
        return Err(Error::Invalid(format!(
            "event {} time {x} outside [0, {})",
            ean.events[e].id, t
        )));
    }
    let mut offsets = Vec::with_capacity(ean.num_activities());
    let mut durations = Vec::with_capacity(ean.num_activities());
    let mut infeasible = Vec::new();
    for (k, a) in ean.activities.iter().enumerate() {
        let diff = times[a.target] - times[a.source];
        let dur = periodic_duration(diff, a.lower, t);
        offsets.push((dur - diff) / t);
        durations.push(dur);
        if dur > a.effective_upper(t) {
            infeasible.push(k);
        }
    }
    Ok(Timetable {
        times: times.to_vec(),
        offsets,
        durations,
        infeasible,
    })
}

impl Timetable {
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_empty()
    }

    /// Fails with the ids of the violated activities.
    pub fn ensure_feasible(&self, ean: &PeriodicEan) -> Result<(), Error> {
        if self.infeasible.is_empty() {
            Ok(())
        } else {
            Err(Error::InfeasibleTimetable(
                self.infeasible.iter().map(|&k| ean.activities[k].id).collect(),
            ))
        }
    }

    pub fn slack(&self, ean: &PeriodicEan, activity: usize) -> i64 {
        self.durations[activity] - ean.activities[activity].lower
    }

    /// Nominal weighted travel time `Σ w_a π_a`.
    pub fn weighted_duration(&self, ean: &PeriodicEan) -> f64 {
        ean.activities
            .iter()
            .zip(&self.durations)
            .map(|(a, &d)| a.weight * d as f64)
            .sum()
    }

    /// Recomputes the timetable for a network with the same events, e.g. the
    /// full network after optimizing on a reduced one.
    pub fn on(&self, ean: &PeriodicEan) -> Result<Timetable, Error> {
        timetable_durations(ean, &self.times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::ean::fixtures::single_drive;
    use proptest::prelude::*;

    #[test]
    fn demo_changes() {
        let ean = demo::ean();
        let tt = timetable_durations(&ean, &demo::TIMES).unwrap();
        assert!(tt.is_feasible());
        let changes: Vec<i64> = ean.change_activities().map(|(k, _)| tt.durations[k]).collect();
        assert_eq!(changes, demo::NOMINAL_CHANGES.to_vec());
        // H arr line 2 at 22, H dep line 1 at 18.
        assert_eq!(tt.durations[12], 56);
        assert_eq!(tt.offsets[12], 1);
        assert_eq!(tt.durations[10], 10);
    }

    #[test]
    fn identity_case() {
        let ean = single_drive(0, 5, 60);
        let tt = timetable_durations(&ean, &[7, 7]).unwrap();
        assert_eq!((tt.durations[0], tt.offsets[0]), (0, 0));
    }

    #[test]
    fn upper_bound_violation_is_flagged() {
        let ean = single_drive(5, 6, 60);
        let tt = timetable_durations(&ean, &[0, 10]).unwrap();
        assert_eq!(tt.infeasible, vec![0]);
        assert!(matches!(tt.ensure_feasible(&ean), Err(Error::InfeasibleTimetable(ids)) if ids == vec![0]));
        assert!(timetable_durations(&ean, &[0, 60]).is_err());
    }

    proptest! {
        #[test]
        fn duration_is_congruent_and_minimal(pi in 0i64..60, pj in 0i64..60, lower in 0i64..200) {
            let d = periodic_duration(pj - pi, lower, 60);
            prop_assert_eq!((d - (pj - pi)).rem_euclid(60), 0);
            prop_assert!(d >= lower && d < lower + 60);
        }
    }
}
