//! Periodic event-activity networks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Departure,
    Arrival,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityKind {
    Drive,
    Wait,
    Change,
}

impl ActivityKind {
    /// Drive and wait activities are operated by the same train.
    pub fn is_driving_or_waiting(self) -> bool {
        matches!(self, ActivityKind::Drive | ActivityKind::Wait)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: u32,
    pub kind: EventKind,
    pub station: String,
    pub line: String,
    /// Passengers boarding (departures) or alighting (arrivals).
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: u32,
    pub kind: ActivityKind,
    /// Index of the source event in [`PeriodicEan::events`].
    pub source: usize,
    /// Index of the target event in [`PeriodicEan::events`].
    pub target: usize,
    pub lower: i64,
    /// `None` means no upper bound (only sensible for change activities).
    pub upper: Option<i64>,
    pub weight: f64,
}

impl Activity {
    /// Upper bound used in periodic models. An unbounded activity accepts any
    /// residue class, which `lower + period - 1` already covers.
    pub fn effective_upper(&self, period: i64) -> i64 {
        self.upper.unwrap_or(self.lower + period - 1)
    }

    pub fn is_change(&self) -> bool {
        self.kind == ActivityKind::Change
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicEan {
    pub events: Vec<Event>,
    pub activities: Vec<Activity>,
    pub period: i64,
    dw_in: Vec<Vec<usize>>,
    dw_out: Vec<Vec<usize>>,
}

/// A single broken invariant found by [`PeriodicEan::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    PeriodTooSmall(i64),
    DanglingEndpoint { activity: u32 },
    BoundsInverted { activity: u32, lower: i64, upper: i64 },
    NegativeLowerBound { activity: u32 },
    NegativeWeight { element: String },
    NotNodeDisjoint { event: u32 },
    LineCycle { event: u32 },
    WrongEndpointKinds { activity: u32 },
    LineMismatch { activity: u32 },
    ChangeWithinLine { activity: u32 },
    LineSplit { line: String, paths: usize },
    NoStartEvent,
    DuplicateId { element: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PeriodTooSmall(t) => write!(f, "period {t} < 2"),
            Violation::DanglingEndpoint { activity } => {
                write!(f, "activity {activity}: endpoint is not an event")
            }
            Violation::BoundsInverted { activity, lower, upper } => {
                write!(f, "activity {activity}: L_a > U_a ({lower} > {upper})")
            }
            Violation::NegativeLowerBound { activity } => {
                write!(f, "activity {activity}: negative lower bound")
            }
            Violation::NegativeWeight { element } => write!(f, "{element}: negative weight"),
            Violation::NotNodeDisjoint { event } => {
                write!(f, "event {event}: line paths not node-disjoint")
            }
            Violation::LineCycle { event } => write!(f, "event {event}: line path contains a cycle"),
            Violation::WrongEndpointKinds { activity } => {
                write!(f, "activity {activity}: endpoint kinds do not match activity kind")
            }
            Violation::LineMismatch { activity } => {
                write!(f, "activity {activity}: drive/wait activity joins two lines")
            }
            Violation::ChangeWithinLine { activity } => {
                write!(f, "activity {activity}: change activity within a single line")
            }
            Violation::LineSplit { line, paths } => {
                write!(f, "line {line}: events form {paths} paths instead of one")
            }
            Violation::NoStartEvent => write!(f, "no event without incoming drive/wait activity"),
            Violation::DuplicateId { element } => write!(f, "duplicate id {element}"),
        }
    }
}

impl PeriodicEan {
    pub fn new(events: Vec<Event>, activities: Vec<Activity>, period: i64) -> Self {
        let n = events.len();
        let mut dw_in = vec![Vec::new(); n];
        let mut dw_out = vec![Vec::new(); n];
        for (k, a) in activities.iter().enumerate() {
            if a.kind.is_driving_or_waiting() && a.source < n && a.target < n {
                dw_out[a.source].push(k);
                dw_in[a.target].push(k);
            }
        }
        PeriodicEan {
            events,
            activities,
            period,
            dw_in,
            dw_out,
        }
    }

    /// Builds the EAN and fails with the collected violations if it is invalid.
    pub fn try_new(events: Vec<Event>, activities: Vec<Activity>, period: i64) -> Result<Self, Error> {
        let ean = Self::new(events, activities, period);
        let violations = ean.validate();
        if violations.is_empty() {
            Ok(ean)
        } else {
            Err(Error::InvalidEan(violations))
        }
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn num_activities(&self) -> usize {
        self.activities.len()
    }

    /// Incoming drive/wait activity of `event`, if any.
    pub fn incoming_dw(&self, event: usize) -> Option<usize> {
        self.dw_in[event].first().copied()
    }

    pub fn outgoing_dw(&self, event: usize) -> Option<usize> {
        self.dw_out[event].first().copied()
    }

    /// Events without an incoming drive/wait activity.
    pub fn start_events(&self) -> Vec<usize> {
        (0..self.events.len()).filter(|&e| self.dw_in[e].is_empty()).collect()
    }

    pub fn change_activities(&self) -> impl Iterator<Item = (usize, &Activity)> {
        self.activities.iter().enumerate().filter(|(_, a)| a.is_change())
    }

    pub fn dw_activities(&self) -> impl Iterator<Item = (usize, &Activity)> {
        self.activities
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind.is_driving_or_waiting())
    }

    /// Line paths as event index sequences, ordered from start event.
    /// Only meaningful for a valid EAN.
    pub fn line_paths(&self) -> Vec<Vec<usize>> {
        self.start_events()
            .into_iter()
            .map(|start| {
                let mut path = vec![start];
                let mut cur = start;
                while let Some(a) = self.outgoing_dw(cur) {
                    cur = self.activities[a].target;
                    if path.len() > self.events.len() {
                        break;
                    }
                    path.push(cur);
                }
                path
            })
            .collect()
    }

    /// Events in an order where every drive/wait predecessor comes first.
    pub fn propagation_order(&self) -> Vec<usize> {
        self.line_paths().into_iter().flatten().collect()
    }

    /// Total boarding passengers: sum of departure event weights.
    pub fn passengers(&self) -> f64 {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Departure)
            .map(|e| e.weight)
            .sum()
    }

    pub fn event_index_by_id(&self) -> HashMap<u32, usize> {
        self.events.iter().enumerate().map(|(i, e)| (e.id, i)).collect()
    }

    /// Same network with a subset of activities.
    pub fn with_activities(&self, activities: Vec<Activity>) -> PeriodicEan {
        PeriodicEan::new(self.events.clone(), activities, self.period)
    }

    /// Checks every structural invariant; an empty list means the EAN is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.events.len();
        if self.period < 2 {
            out.push(Violation::PeriodTooSmall(self.period));
        }
        let mut seen = BTreeMap::new();
        for e in &self.events {
            if seen.insert(e.id, ()).is_some() {
                out.push(Violation::DuplicateId {
                    element: format!("event {}", e.id),
                });
            }
            if !(e.weight >= 0.0) {
                out.push(Violation::NegativeWeight {
                    element: format!("event {}", e.id),
                });
            }
        }
        let mut seen = BTreeMap::new();
        for a in &self.activities {
            if seen.insert(a.id, ()).is_some() {
                out.push(Violation::DuplicateId {
                    element: format!("activity {}", a.id),
                });
            }
            if a.source >= n || a.target >= n {
                out.push(Violation::DanglingEndpoint { activity: a.id });
                continue;
            }
            if let Some(u) = a.upper {
                if a.lower > u {
                    out.push(Violation::BoundsInverted {
                        activity: a.id,
                        lower: a.lower,
                        upper: u,
                    });
                }
            }
            if a.lower < 0 {
                out.push(Violation::NegativeLowerBound { activity: a.id });
            }
            if !(a.weight >= 0.0) {
                out.push(Violation::NegativeWeight {
                    element: format!("activity {}", a.id),
                });
            }
            let (src, dst) = (&self.events[a.source], &self.events[a.target]);
            let kinds_ok = match a.kind {
                ActivityKind::Drive => src.kind == EventKind::Departure && dst.kind == EventKind::Arrival,
                ActivityKind::Wait => src.kind == EventKind::Arrival && dst.kind == EventKind::Departure,
                ActivityKind::Change => src.kind == EventKind::Arrival && dst.kind == EventKind::Departure,
            };
            if !kinds_ok {
                out.push(Violation::WrongEndpointKinds { activity: a.id });
            }
            if a.kind.is_driving_or_waiting() && src.line != dst.line {
                out.push(Violation::LineMismatch { activity: a.id });
            }
            if a.kind == ActivityKind::Change && src.line == dst.line {
                out.push(Violation::ChangeWithinLine { activity: a.id });
            }
        }
        for (e, ev) in self.events.iter().enumerate() {
            if self.dw_in[e].len() > 1 || self.dw_out[e].len() > 1 {
                out.push(Violation::NotNodeDisjoint { event: ev.id });
            }
        }
        // Cycle detection along unique successors.
        let mut state = vec![0u8; n];
        for s in 0..n {
            if state[s] != 0 {
                continue;
            }
            let mut trail = Vec::new();
            let mut cur = s;
            loop {
                if state[cur] == 1 {
                    out.push(Violation::LineCycle {
                        event: self.events[cur].id,
                    });
                    break;
                }
                if state[cur] == 2 {
                    break;
                }
                state[cur] = 1;
                trail.push(cur);
                match self.dw_out[cur].first() {
                    Some(&a) if self.activities[a].target < n => cur = self.activities[a].target,
                    _ => break,
                }
            }
            for t in trail {
                state[t] = 2;
            }
        }
        let starts = self.start_events();
        if starts.is_empty() && n > 0 {
            out.push(Violation::NoStartEvent);
        }
        let mut paths_per_line: BTreeMap<&str, usize> = BTreeMap::new();
        for &s in &starts {
            *paths_per_line.entry(self.events[s].line.as_str()).or_default() += 1;
        }
        for (line, paths) in paths_per_line {
            if paths > 1 {
                out.push(Violation::LineSplit {
                    line: line.to_string(),
                    paths,
                });
            }
        }
        out
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::demo;

    #[test]
    fn demo_network_is_valid() {
        let ean = demo::ean();
        assert_eq!(ean.num_events(), 12);
        assert_eq!(ean.dw_activities().count(), 10);
        assert_eq!(ean.change_activities().count(), 3);
        assert!(ean.validate().is_empty(), "{:?}", ean.validate());
        assert_eq!(ean.start_events().len(), 2);
    }

    #[test]
    fn two_incoming_drives_break_disjointness() {
        let events = vec![
            ev(0, EventKind::Departure, "A", "1", 0.0),
            ev(1, EventKind::Arrival, "B", "1", 0.0),
            ev(2, EventKind::Departure, "C", "1", 0.0),
        ];
        let acts = vec![
            act(0, ActivityKind::Drive, 0, 1, 1, Some(2), 0.0),
            act(1, ActivityKind::Drive, 2, 1, 1, Some(2), 0.0),
        ];
        let v = PeriodicEan::new(events, acts, 60).validate();
        assert!(v.contains(&Violation::NotNodeDisjoint { event: 1 }));
        assert!(v.iter().any(|x| x.to_string().contains("line paths not node-disjoint")));
    }

    #[test]
    fn inverted_bounds_are_flagged() {
        let ean = single_drive(10, 5, 60);
        let v = ean.validate();
        assert_eq!(
            v,
            vec![Violation::BoundsInverted {
                activity: 0,
                lower: 10,
                upper: 5
            }]
        );
        assert!(v[0].to_string().contains("L_a > U_a"));
    }

    #[test]
    fn change_inside_line_and_small_period() {
        let events = vec![
            ev(0, EventKind::Departure, "A", "1", 0.0),
            ev(1, EventKind::Arrival, "B", "1", 0.0),
            ev(2, EventKind::Departure, "B", "1", 0.0),
        ];
        let acts = vec![
            act(0, ActivityKind::Drive, 0, 1, 1, Some(2), 0.0),
            act(1, ActivityKind::Change, 1, 2, 1, None, 0.0),
        ];
        let v = PeriodicEan::new(events, acts, 1).validate();
        assert!(v.contains(&Violation::PeriodTooSmall(1)));
        assert!(v.contains(&Violation::ChangeWithinLine { activity: 1 }));
        assert!(v.contains(&Violation::LineSplit {
            line: "1".into(),
            paths: 2
        }));
    }

    #[test]
    fn line_paths_follow_drive_wait_chain() {
        let ean = demo::ean();
        let paths = ean.line_paths();
        assert_eq!(paths.len(), 2);
        assert!(paths.iter().all(|p| p.len() == 6));
        assert_eq!(ean.propagation_order().len(), 12);
    }
}
