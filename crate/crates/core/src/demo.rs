//! Two-line worked example: GÖ-H-HH-HB and OL-HB-H-BS with three transfers.
//!
//! Drive and wait activities have `L = U =` their nominal duration, so the
//! timetable carries no slack and every source delay propagates in full.

use crate::ean::{Activity, ActivityKind, Event, EventKind, PeriodicEan};
use crate::scenario::Scenario;

pub const PERIOD: i64 = 60;
pub const CHANGE_LOWER: i64 = 3;

/// Nominal event times, events in line order.
pub const TIMES: [i64; 12] = [0, 15, 18, 30, 33, 50, 35, 57, 0, 22, 25, 40];

/// Disposition times (nominal plus propagated delay), not reduced modulo T.
pub const DISPOSITION: [i64; 12] = [0, 23, 26, 40, 43, 65, 35, 57, 0, 22, 35, 50];

/// Change durations before and after the delays, in activity order.
pub const NOMINAL_CHANGES: [i64; 3] = [10, 10, 56];
pub const DISPOSED_CHANGES: [i64; 3] = [12, 55, 4];

/// Drives carry the through passengers plus those changing off, so delaying
/// an arrival to shorten a change never pays either.
const DRIVE_WEIGHT: f64 = 12.0;
const WAIT_WEIGHT: f64 = 10.0;
const CHANGE_WEIGHT: f64 = 1.0;
/// Heavy enough that shifting a whole line to rotate a change never pays.
const EVENT_WEIGHT: f64 = 50.0;

pub fn ean() -> PeriodicEan {
    use EventKind::{Arrival as A, Departure as D};
    let spec: [(EventKind, &str, &str); 12] = [
        (D, "GÖ", "1"),
        (A, "H", "1"),
        (D, "H", "1"),
        (A, "HH", "1"),
        (D, "HH", "1"),
        (A, "HB", "1"),
        (D, "OL", "2"),
        (A, "HB", "2"),
        (D, "HB", "2"),
        (A, "H", "2"),
        (D, "H", "2"),
        (A, "BS", "2"),
    ];
    let events = spec
        .iter()
        .enumerate()
        .map(|(i, &(kind, station, line))| Event {
            id: i as u32 + 1,
            kind,
            station: station.into(),
            line: line.into(),
            weight: EVENT_WEIGHT,
        })
        .collect();
    let mut activities = Vec::new();
    for line in 0..2 {
        for k in 0..5 {
            let (i, j) = (6 * line + k, 6 * line + k + 1);
            let d = TIMES[j] - TIMES[i];
            let d = d.rem_euclid(PERIOD);
            activities.push(Activity {
                id: activities.len() as u32 + 1,
                kind: if k % 2 == 0 { ActivityKind::Drive } else { ActivityKind::Wait },
                source: i,
                target: j,
                lower: d,
                upper: Some(d),
                weight: if k % 2 == 0 { DRIVE_WEIGHT } else { WAIT_WEIGHT },
            });
        }
    }
    for (i, j) in [(1, 10), (5, 8), (9, 2)] {
        activities.push(Activity {
            id: activities.len() as u32 + 1,
            kind: ActivityKind::Change,
            source: i,
            target: j,
            lower: CHANGE_LOWER,
            upper: None,
            weight: CHANGE_WEIGHT,
        });
    }
    PeriodicEan::new(events, activities, PERIOD)
}

/// Source delays: 8, 2 and 5 on the drives of line 1, 7 on the wait of line 2
/// at H and 10 on the departure of line 2 at H.
pub fn scenario() -> Scenario {
    let ean = ean();
    let mut s = Scenario::zero(&ean);
    s.activity[0] = 8.0;
    s.activity[2] = 2.0;
    s.activity[4] = 5.0;
    s.activity[8] = 7.0;
    s.event[10] = 10.0;
    s
}

/// Event delays under the no-wait strategy.
pub fn no_wait_delays() -> [f64; 12] {
    let mut d = [0.0; 12];
    for (k, x) in d.iter_mut().enumerate() {
        *x = (DISPOSITION[k] - TIMES[k]) as f64;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drive_wait_durations_match_nominal_times() {
        let ean = ean();
        let dur: Vec<i64> = ean.dw_activities().map(|(_, a)| a.lower).collect();
        assert_eq!(dur, vec![15, 3, 12, 3, 17, 22, 3, 22, 3, 15]);
    }

    #[test]
    fn expected_delays() {
        assert_eq!(no_wait_delays(), [0.0, 8.0, 8.0, 10.0, 10.0, 15.0, 0.0, 0.0, 0.0, 0.0, 10.0, 10.0]);
    }
}
