//! Small fixtures shared by the robust tests.

use crate::ean::fixtures::{act, ev};
use crate::ean::{ActivityKind, EventKind, PeriodicEan};

/// Two lines of two drives each, joined by a change at station B. Drives have
/// lower bound 2 and `slack` minutes of allowed buffer.
pub(crate) fn two_line_toy(period: i64, slack: i64) -> PeriodicEan {
    let events = vec![
        ev(0, EventKind::Departure, "A", "1", 2.0),
        ev(1, EventKind::Arrival, "B", "1", 0.0),
        ev(2, EventKind::Departure, "B", "1", 1.0),
        ev(3, EventKind::Arrival, "C", "1", 0.0),
        ev(4, EventKind::Departure, "D", "2", 1.0),
        ev(5, EventKind::Arrival, "B", "2", 0.0),
        ev(6, EventKind::Departure, "B", "2", 2.0),
        ev(7, EventKind::Arrival, "E", "2", 0.0),
    ];
    let acts = vec![
        act(0, ActivityKind::Drive, 0, 1, 2, Some(2 + slack), 2.0),
        act(1, ActivityKind::Wait, 1, 2, 1, Some(1 + slack.min(1)), 1.0),
        act(2, ActivityKind::Drive, 2, 3, 2, Some(2 + slack), 1.0),
        act(3, ActivityKind::Drive, 4, 5, 2, Some(2 + slack), 1.0),
        act(4, ActivityKind::Wait, 5, 6, 1, Some(1 + slack.min(1)), 1.0),
        act(5, ActivityKind::Drive, 6, 7, 2, Some(2 + slack), 2.0),
        act(6, ActivityKind::Change, 1, 6, 1, None, 1.0),
    ];
    PeriodicEan::new(events, acts, period)
}
