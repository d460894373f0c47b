use milp::{SolveParams, SolveStatus};

use crate::dm::{aperiodic_tau, solve_dm};
use crate::ean::PeriodicEan;
use crate::par;
use crate::rollout::{rollout, AperiodicEan};
use crate::scenario::{sample_scenario, Scenario, ScenarioDomain, UncertaintySet};
use crate::timetable::Timetable;
use crate::Error;

#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub horizon: (i64, i64),
    pub scenarios: usize,
    pub seed: u64,
    pub jobs: usize,
    pub dm_time_limit: Option<f64>,
    pub mip_gap: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            horizon: (0, 480),
            scenarios: 10,
            seed: 1,
            jobs: 1,
            dm_time_limit: Some(60.0),
            mip_gap: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub algorithm: String,
    pub instance: String,
    /// Nominal Travel Time, minutes per passenger.
    pub nominal: f64,
    /// Delayed Travel Time per scenario, minutes per passenger.
    pub delayed: Vec<f64>,
    /// DM solve status per scenario.
    pub statuses: Vec<SolveStatus>,
}

impl EvalReport {
    pub fn min_delayed(&self) -> f64 {
        self.delayed.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_delayed(&self) -> f64 {
        self.delayed.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn avg_delayed(&self) -> f64 {
        self.delayed.iter().sum::<f64>() / self.delayed.len() as f64
    }

    /// Average Delayed Travel Time minus Nominal Travel Time.
    pub fn avg_passenger_delay(&self) -> f64 {
        self.avg_delayed() - self.nominal
    }
}

/// Rolls `tt` out, samples equality-budget scenarios over the horizon and
/// solves aperiodic delay management for each. Scenario `i` uses seed
/// `cfg.seed + i`, so every timetable of an instance meets the same draws
/// whenever the rolled-out networks have equal size.
pub fn evaluate(
    ean: &PeriodicEan,
    tt: &Timetable,
    unc: &UncertaintySet,
    cfg: &EvalConfig,
    algorithm: &str,
    instance: &str,
) -> Result<EvalReport, Error> {
    let tt = tt.on(ean)?;
    tt.ensure_feasible(ean)?;
    let aper = rollout(ean, &tt, cfg.horizon);
    let exact = unc.exact_over_horizon(cfg.horizon, ean.period);
    let domain = ScenarioDomain::aperiodic(&aper);
    let scenarios = (0..cfg.scenarios as u64)
        .map(|i| sample_scenario(&exact, &domain, cfg.seed.wrapping_add(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = evaluate_scenarios(ean, &aper, &scenarios, cfg)?;
    report.algorithm = algorithm.to_string();
    report.instance = instance.to_string();
    Ok(report)
}

/// Metrics for given scenarios on a rolled-out network; labels are left empty.
pub fn evaluate_scenarios(
    ean: &PeriodicEan,
    aper: &AperiodicEan,
    scenarios: &[Scenario],
    cfg: &EvalConfig,
) -> Result<EvalReport, Error> {
    let norm = ean.passengers() * aper.periods();
    if !(norm > 0.0) {
        return Err(Error::Invalid("evaluation needs passengers and a horizon of positive length".into()));
    }
    let params = SolveParams {
        time_limit: cfg.dm_time_limit,
        cutoff: None,
        mip_gap: cfg.mip_gap,
    };
    let solved = par::map(cfg.jobs, scenarios, |s| solve_dm(aper, s, params.clone()));
    let mut delayed = Vec::with_capacity(scenarios.len());
    let mut statuses = Vec::with_capacity(scenarios.len());
    for r in solved {
        let (d, out) = r?;
        delayed.push(aperiodic_tau(aper, &d) / norm);
        statuses.push(out.status);
    }
    Ok(EvalReport {
        algorithm: String::new(),
        instance: String::new(),
        nominal: aper.weighted_duration() / norm,
        delayed,
        statuses,
    })
}
