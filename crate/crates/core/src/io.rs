//! Semicolon-separated CSV files for instances, timetables, scenarios,
//! delay solutions, run configuration and run outputs.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dm::DelaySolution;
use crate::ean::{Activity, ActivityKind, Event, EventKind, PeriodicEan};
use crate::eval::EvalReport;
use crate::robust::RobustRunState;
use crate::rollout::AperiodicEan;
use crate::scenario::{Scenario, UncertaintySet};
use crate::timetable::{timetable_durations, Timetable};
use crate::Error;

pub const EVENTS_FILE: &str = "events.csv";
pub const ACTIVITIES_FILE: &str = "activities.csv";
pub const CONFIG_FILE: &str = "config.csv";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => io_err(path, source),
            other => parse_err(path, format!("{other:?}")),
        }
    } else {
        parse_err(path, e)
    }
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, Error> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b';')
        .trim(csv::Trim::All)
        .from_reader(file);
    rdr.deserialize().map(|r| r.map_err(|e| csv_err(path, e))).collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Serialize, Deserialize)]
struct ActivityRow {
    id: u32,
    kind: ActivityKind,
    source: u32,
    target: u32,
    lower: i64,
    upper: Option<i64>,
    weight: f64,
}

pub fn write_events(path: &Path, ean: &PeriodicEan) -> Result<(), Error> {
    write_rows(path, &ean.events)
}

pub fn read_events(path: &Path) -> Result<Vec<Event>, Error> {
    read_rows(path)
}

pub fn write_activities(path: &Path, ean: &PeriodicEan) -> Result<(), Error> {
    write_rows(
        path,
        ean.activities.iter().map(|a| ActivityRow {
            id: a.id,
            kind: a.kind,
            source: ean.events[a.source].id,
            target: ean.events[a.target].id,
            lower: a.lower,
            upper: a.upper,
            weight: a.weight,
        }),
    )
}

/// Reads activities, resolving event ids against `events`.
pub fn read_activities(path: &Path, events: &[Event]) -> Result<Vec<Activity>, Error> {
    let index: HashMap<u32, usize> = events.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
    let lookup = |id: u32| index.get(&id).copied().ok_or_else(|| parse_err(path, format!("unknown event id {id}")));
    read_rows::<ActivityRow>(path)?
        .into_iter()
        .map(|r| {
            Ok(Activity {
                id: r.id,
                kind: r.kind,
                source: lookup(r.source)?,
                target: lookup(r.target)?,
                lower: r.lower,
                upper: r.upper,
                weight: r.weight,
            })
        })
        .collect()
}

/// Offsets of the per-component seeds derived from `Config::seed`.
pub mod seed_offset {
    pub const MATCH: u64 = 1;
    pub const HEURISTIC: u64 = 2;
    pub const EVALUATION: u64 = 1000;
}

/// Run configuration shared by all subcommands.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub period: i64,
    pub sigma: f64,
    pub rho: f64,
    pub horizon_lo: i64,
    pub horizon_hi: i64,
    pub passenger_cutoff: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            period: 60,
            sigma: 50.0,
            rho: 5.0,
            horizon_lo: 0,
            horizon_hi: 480,
            passenger_cutoff: 0.0,
            seed: 1,
        }
    }
}

impl Config {
    pub fn uncertainty(&self) -> UncertaintySet {
        UncertaintySet::at_most(self.sigma, self.rho)
    }

    pub fn horizon(&self) -> (i64, i64) {
        (self.horizon_lo, self.horizon_hi)
    }

    pub fn sub_seed(&self, offset: u64) -> u64 {
        self.seed.wrapping_add(offset)
    }

    /// Sets one key; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
            value
                .parse()
                .map_err(|_| Error::Invalid(format!("config key '{key}': cannot parse '{value}'")))
        }
        match key {
            "period" => self.period = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "horizon_lo" => self.horizon_lo = num(key, value)?,
            "horizon_hi" => self.horizon_hi = num(key, value)?,
            "passenger_cutoff" => self.passenger_cutoff = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::UnknownConfigKey(other.to_string())),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("period", self.period.to_string()),
            ("sigma", self.sigma.to_string()),
            ("rho", self.rho.to_string()),
            ("horizon_lo", self.horizon_lo.to_string()),
            ("horizon_hi", self.horizon_hi.to_string()),
            ("passenger_cutoff", self.passenger_cutoff.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    fn validate(&self) -> Result<(), Error> {
        if self.period < 2 {
            return Err(Error::Invalid(format!("period must be at least 2, got {}", self.period)));
        }
        if !(self.sigma >= 0.0 && self.rho >= 0.0) {
            return Err(Error::Invalid("sigma and rho must be nonnegative".into()));
        }
        if self.horizon_hi < self.horizon_lo {
            return Err(Error::Invalid("horizon_hi below horizon_lo".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ConfigRow {
    key: String,
    value: String,
}

/// Reads `key;value` rows on top of the defaults.
pub fn read_config(path: &Path) -> Result<Config, Error> {
    let mut cfg = Config::default();
    for row in read_rows::<ConfigRow>(path)? {
        cfg.set(&row.key, &row.value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn write_config(path: &Path, cfg: &Config) -> Result<(), Error> {
    write_rows(
        path,
        cfg.entries().into_iter().map(|(k, v)| ConfigRow { key: k.into(), value: v }),
    )
}

/// Reads `events.csv`, `activities.csv` and `config.csv` from `dir` and
/// validates the network.
pub fn read_instance(dir: &Path) -> Result<(PeriodicEan, Config), Error> {
    let cfg = read_config(&dir.join(CONFIG_FILE))?;
    let events = read_events(&dir.join(EVENTS_FILE))?;
    let activities = read_activities(&dir.join(ACTIVITIES_FILE), &events)?;
    let ean = PeriodicEan::try_new(events, activities, cfg.period)?;
    Ok((ean, cfg))
}

pub fn write_instance(dir: &Path, ean: &PeriodicEan, cfg: &Config) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_events(&dir.join(EVENTS_FILE), ean)?;
    write_activities(&dir.join(ACTIVITIES_FILE), ean)?;
    write_config(&dir.join(CONFIG_FILE), cfg)
}

#[derive(Serialize, Deserialize)]
struct TimeRow {
    event_id: u32,
    time: i64,
}

pub fn write_timetable(path: &Path, ean: &PeriodicEan, tt: &Timetable) -> Result<(), Error> {
    write_rows(
        path,
        ean.events.iter().zip(&tt.times).map(|(e, &time)| TimeRow { event_id: e.id, time }),
    )
}

/// Reads event times; every event must appear exactly once.
pub fn read_timetable(path: &Path, ean: &PeriodicEan) -> Result<Timetable, Error> {
    let index = ean.event_index_by_id();
    let mut times = vec![None; ean.num_events()];
    for row in read_rows::<TimeRow>(path)? {
        let i = *index
            .get(&row.event_id)
            .ok_or_else(|| parse_err(path, format!("unknown event id {}", row.event_id)))?;
        if times[i].replace(row.time).is_some() {
            return Err(parse_err(path, format!("event {} listed twice", row.event_id)));
        }
    }
    let times: Vec<i64> = times
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| parse_err(path, format!("no time for event {}", ean.events[i].id))))
        .collect::<Result<_, _>>()?;
    timetable_durations(ean, &times)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ElementKind {
    Event,
    Activity,
}

#[derive(Serialize, Deserialize)]
struct DelayRow {
    element_kind: ElementKind,
    element_id: u32,
    delay: f64,
}

fn delay_rows<'a>(ean: &'a PeriodicEan, event: &'a [f64], activity: &'a [f64]) -> impl Iterator<Item = DelayRow> + 'a {
    let ev = ean.events.iter().zip(event).map(|(e, &delay)| DelayRow {
        element_kind: ElementKind::Event,
        element_id: e.id,
        delay,
    });
    let ac = ean.activities.iter().zip(activity).map(|(a, &delay)| DelayRow {
        element_kind: ElementKind::Activity,
        element_id: a.id,
        delay,
    });
    ev.chain(ac)
}

/// Writes every entry, zeros included, so the file round-trips exactly.
pub fn write_scenario(path: &Path, ean: &PeriodicEan, s: &Scenario) -> Result<(), Error> {
    write_rows(path, delay_rows(ean, &s.event, &s.activity))
}

/// Reads a scenario; elements not listed have zero delay.
pub fn read_scenario(path: &Path, ean: &PeriodicEan) -> Result<Scenario, Error> {
    let events = ean.event_index_by_id();
    let acts: HashMap<u32, usize> = ean.activities.iter().enumerate().map(|(k, a)| (a.id, k)).collect();
    let mut s = Scenario::zero(ean);
    for row in read_rows::<DelayRow>(path)? {
        let (map, target) = match row.element_kind {
            ElementKind::Event => (&events, &mut s.event),
            ElementKind::Activity => (&acts, &mut s.activity),
        };
        let i = *map
            .get(&row.element_id)
            .ok_or_else(|| parse_err(path, format!("unknown {:?} id {}", row.element_kind, row.element_id)))?;
        target[i] = row.delay;
    }
    if let Some((_, a)) = ean.change_activities().find(|(k, _)| s.activity[*k] != 0.0) {
        return Err(parse_err(path, format!("source delay on change activity {}", a.id)));
    }
    Ok(s)
}

/// Writes propagated delays of a periodic delay solution.
pub fn write_delays(path: &Path, ean: &PeriodicEan, d: &DelaySolution) -> Result<(), Error> {
    write_rows(path, delay_rows(ean, &d.event, &d.activity))
}

pub const APER_EVENTS_FILE: &str = "aperiodic_events.csv";
pub const APER_ACTIVITIES_FILE: &str = "aperiodic_activities.csv";

#[derive(Serialize)]
struct AperEventRow {
    index: usize,
    event_id: u32,
    copy: i64,
    time: i64,
    kind: EventKind,
    weight: f64,
}

#[derive(Serialize)]
struct AperActivityRow {
    index: usize,
    activity_id: u32,
    kind: ActivityKind,
    source: usize,
    target: usize,
    lower: i64,
    duration: i64,
    weight: f64,
}

/// Writes a rolled-out network; aperiodic elements are referenced by row index.
pub fn write_aperiodic(dir: &Path, ean: &PeriodicEan, aper: &AperiodicEan) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_rows(
        &dir.join(APER_EVENTS_FILE),
        aper.events.iter().enumerate().map(|(index, e)| AperEventRow {
            index,
            event_id: ean.events[e.origin].id,
            copy: e.copy,
            time: e.time,
            kind: e.kind,
            weight: e.weight,
        }),
    )?;
    write_rows(
        &dir.join(APER_ACTIVITIES_FILE),
        aper.activities.iter().enumerate().map(|(index, a)| AperActivityRow {
            index,
            activity_id: ean.activities[a.origin].id,
            kind: a.kind,
            source: a.source,
            target: a.target,
            lower: a.lower,
            duration: aper.duration(index),
            weight: a.weight,
        }),
    )
}

#[derive(Serialize)]
struct ReportRow<'a> {
    algorithm: &'a str,
    instance: &'a str,
    scenario: usize,
    nominal: f64,
    delayed: f64,
    dm_status: &'static str,
}

/// One row per evaluated scenario.
pub fn write_report(path: &Path, report: &EvalReport) -> Result<(), Error> {
    write_rows(
        path,
        report.delayed.iter().zip(&report.statuses).enumerate().map(|(scenario, (&delayed, st))| ReportRow {
            algorithm: &report.algorithm,
            instance: &report.instance,
            scenario,
            nominal: report.nominal,
            delayed,
            dm_status: st.as_str(),
        }),
    )
}

/// Writes the run trace of a robust method.
pub fn write_trace(path: &Path, state: &RobustRunState) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    state.write_trace(file).map_err(|e| csv_err(path, e))
}
