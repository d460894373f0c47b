//! Expansion of a periodic timetable into an aperiodic network over a horizon.

use crate::ean::{ActivityKind, EventKind, PeriodicEan};
use crate::timetable::Timetable;

#[derive(Clone, Debug, PartialEq)]
pub struct AperEvent {
    /// Index of the periodic event this is a copy of.
    pub origin: usize,
    pub copy: i64,
    /// Absolute time `π_e + copy * T`.
    pub time: i64,
    pub kind: EventKind,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AperActivity {
    pub origin: usize,
    pub source: usize,
    pub target: usize,
    pub kind: ActivityKind,
    pub lower: i64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AperiodicEan {
    pub events: Vec<AperEvent>,
    pub activities: Vec<AperActivity>,
    pub horizon: (i64, i64),
    pub period: i64,
}

impl AperiodicEan {
    pub fn duration(&self, activity: usize) -> i64 {
        let a = &self.activities[activity];
        self.events[a.target].time - self.events[a.source].time
    }

    /// Nominal weighted travel time `Σ w_a π*_a`.
    pub fn weighted_duration(&self) -> f64 {
        (0..self.activities.len())
            .map(|k| self.activities[k].weight * self.duration(k) as f64)
            .sum()
    }

    /// Number of periods covered, `(U - L) / T`.
    pub fn periods(&self) -> f64 {
        (self.horizon.1 - self.horizon.0) as f64 / self.period as f64
    }
}

/// Copy indices `n` with `lo <= time + n T <= hi`.
pub fn copy_range(time: i64, period: i64, horizon: (i64, i64)) -> std::ops::RangeInclusive<i64> {
    let first = (horizon.0 - time).div_euclid(period) + i64::from((horizon.0 - time).rem_euclid(period) != 0);
    let last = (horizon.1 - time).div_euclid(period);
    first..=last
}

/// Rolls `tt` out over the closed horizon `[lo, hi]`.
pub fn rollout(ean: &PeriodicEan, tt: &Timetable, horizon: (i64, i64)) -> AperiodicEan {
    let t = ean.period;
    if horizon.1 - horizon.0 < t {
        log::warn!(
            "rollout horizon [{}, {}] is shorter than one period; the network may be disconnected",
            horizon.0,
            horizon.1
        );
    }
    let mut events = Vec::new();
    let mut first_copy = Vec::with_capacity(ean.num_events());
    let mut base = Vec::with_capacity(ean.num_events());
    let mut count = Vec::with_capacity(ean.num_events());
    for (e, ev) in ean.events.iter().enumerate() {
        let range = copy_range(tt.times[e], t, horizon);
        first_copy.push(*range.start());
        base.push(events.len());
        let before = events.len();
        for n in range {
            events.push(AperEvent {
                origin: e,
                copy: n,
                time: tt.times[e] + n * t,
                kind: ev.kind,
                weight: ev.weight,
            });
        }
        count.push((events.len() - before) as i64);
    }
    let index = |e: usize, n: i64| -> Option<usize> {
        let off = n - first_copy[e];
        (0..count[e]).contains(&off).then(|| base[e] + off as usize)
    };
    let mut activities = Vec::new();
    for (k, a) in ean.activities.iter().enumerate() {
        let diff = tt.times[a.target] - tt.times[a.source];
        let upper = a.effective_upper(t);
        // m - n ranges over shifts with L <= diff + shift * T <= U.
        let lo_shift = (a.lower - diff).div_euclid(t) + i64::from((a.lower - diff).rem_euclid(t) != 0);
        let hi_shift = (upper - diff).div_euclid(t);
        for n in first_copy[a.source]..first_copy[a.source] + count[a.source] {
            let source = index(a.source, n).expect("copy in range");
            for shift in lo_shift..=hi_shift {
                if let Some(target) = index(a.target, n + shift) {
                    activities.push(AperActivity {
                        origin: k,
                        source,
                        target,
                        kind: a.kind,
                        lower: a.lower,
                        weight: a.weight,
                    });
                }
            }
        }
    }
    AperiodicEan {
        events,
        activities,
        horizon,
        period: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::ean::fixtures::single_drive;
    use crate::timetable::timetable_durations;
    use proptest::prelude::*;

    fn copies_by_enumeration(time: i64, period: i64, horizon: (i64, i64)) -> i64 {
        (-100..100)
            .filter(|n| (horizon.0..=horizon.1).contains(&(n * period + time)))
            .count() as i64
    }

    #[test]
    fn copies_match_enumeration() {
        assert_eq!(copies_by_enumeration(0, 60, (0, 480)), 9);
        assert_eq!(copy_range(0, 60, (0, 480)).count(), 9);
        assert_eq!(copies_by_enumeration(30, 60, (0, 480)), 8);
        assert_eq!(copy_range(30, 60, (0, 480)).count(), 8);
        assert_eq!(copy_range(0, 60, (0, 0)).count(), 1);
    }

    #[test]
    fn single_drive_rollout() {
        let ean = single_drive(5, 8, 60);
        let tt = timetable_durations(&ean, &[0, 6]).unwrap();
        let aper = rollout(&ean, &tt, (0, 480));
        assert_eq!(aper.events.len(), 17);
        assert_eq!(aper.activities.len(), 8);
        assert!((0..8).all(|k| aper.duration(k) == 6));
    }

    #[test]
    fn demo_rollout_is_consistent() {
        let ean = demo::ean();
        let tt = timetable_durations(&ean, &demo::TIMES).unwrap();
        let aper = rollout(&ean, &tt, (0, 480));
        for (k, a) in aper.activities.iter().enumerate() {
            let d = aper.duration(k);
            let orig = &ean.activities[a.origin];
            assert!(d >= orig.lower && d <= orig.effective_upper(60));
            assert_eq!(d, tt.durations[a.origin]);
        }
    }

    proptest! {
        #[test]
        fn copy_count_formula(time in 0i64..60, lo in -200i64..200, len in 0i64..600) {
            let h = (lo, lo + len);
            let ceil_lo = -(time - h.0).div_euclid(60);
            let formula = (h.1 - time).div_euclid(60) - ceil_lo + 1;
            let expected = copies_by_enumeration(time, 60, h);
            prop_assert_eq!(copy_range(time, 60, h).count() as i64, expected);
            prop_assert_eq!(formula.max(0), expected);
        }
    }
}
