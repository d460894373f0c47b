use std::time::Instant;

use milp::{SolveParams, SolveStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cutting_plane::master_bound;
use super::master::{solve_master, MasterKind};
use super::state::{IterationRecord, RobustRunState, Termination};
use super::pool_contains;
use crate::dm::{solve_pdm, tau};
use crate::ean::PeriodicEan;
use crate::par;
use crate::scenario::{sample_with, Scenario, ScenarioDomain, UncertaintySet};
use crate::timetable::Timetable;
use crate::Error;

#[derive(Clone, Debug)]
pub struct HeuristicConfig {
    /// Number of master solves `N`.
    pub iterations: usize,
    /// Scenarios sampled per iteration.
    pub samples: usize,
    pub master_time_limit: Option<f64>,
    pub pdm_time_limit: Option<f64>,
    pub mip_gap: f64,
    pub seed: u64,
    /// Concurrent P-DM solves.
    pub jobs: usize,
    pub start: Option<Timetable>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            iterations: 20,
            samples: 100,
            master_time_limit: Some(60.0),
            pdm_time_limit: Some(10.0),
            mip_gap: 1e-7,
            seed: 0,
            jobs: 1,
            start: None,
        }
    }
}

/// Scenarios drawn in iteration `k`; independent of `jobs`.
fn draw(unc: &UncertaintySet, domain: &ScenarioDomain, seed: u64, k: usize, n: usize) -> Result<Vec<Scenario>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    (0..n).map(|_| sample_with(unc, domain, &mut rng)).collect()
}

/// Solves RPT over a growing pool; each new pool member is the sampled
/// scenario with the largest optimal delay management cost for the current
/// timetable. Returns the last timetable and its master value, a lower bound.
pub fn iterative_heuristic(
    ean: &PeriodicEan,
    unc: &UncertaintySet,
    s_nom: &Scenario,
    cfg: &HeuristicConfig,
) -> Result<(Timetable, f64, RobustRunState), Error> {
    if cfg.iterations == 0 || cfg.samples == 0 {
        return Err(Error::Invalid("iterations and samples must be at least 1".into()));
    }
    let clock = Instant::now();
    let domain = ScenarioDomain::periodic(ean);
    let mut state = RobustRunState::new(s_nom.clone());
    let mut lb = f64::NEG_INFINITY;
    let mut prev = cfg.start.clone();
    for k in 1..=cfg.iterations {
        let params = SolveParams {
            time_limit: cfg.master_time_limit,
            cutoff: None,
            mip_gap: cfg.mip_gap,
        };
        let m = solve_master(MasterKind::Optimal, ean, &state.pool, prev.as_ref(), params)?;
        lb = lb.max(master_bound(m.outcome.status, m.objective, m.outcome.best_bound));
        let tt = m.timetable;
        // The last iteration's scenario would never be used.
        let (ub, worst, sub_status) = if k < cfg.iterations {
            let candidates: Vec<Scenario> = draw(unc, &domain, cfg.seed, k, cfg.samples)?
                .into_iter()
                .filter(|s| !pool_contains(&state.pool, s))
                .collect();
            worst_sample(ean, &tt, &candidates, cfg)?
        } else {
            (f64::NAN, None, None)
        };
        log::info!("iteration {k}: lb {lb:.4} worst sample {ub:.4} pool {}", state.pool.len());
        let found = worst.is_some();
        if let Some(s) = worst {
            state.pool.push(s);
        }
        state.records.push(IterationRecord {
            k,
            lb,
            ub,
            wall_seconds: clock.elapsed().as_secs_f64(),
            pool_size: state.pool.len(),
            master_status: m.outcome.status,
            sub_status,
            scenario_value: ub,
        });
        prev = Some(tt);
        if k < cfg.iterations && !found {
            state.termination = Some(Termination::NoNewScenario);
            break;
        }
    }
    if state.termination.is_none() {
        state.termination = Some(Termination::IterationCap);
    }
    let tt = prev.expect("at least one iteration");
    state.incumbent = Some(tt.clone());
    Ok((tt, lb, state))
}

/// Largest `τ` over the candidates, solved in batches of `jobs` with the
/// bound at the start of each batch as cutoff.
fn worst_sample(
    ean: &PeriodicEan,
    tt: &Timetable,
    candidates: &[Scenario],
    cfg: &HeuristicConfig,
) -> Result<(f64, Option<Scenario>, Option<SolveStatus>), Error> {
    let nominal = tt.weighted_duration(ean);
    let mut ub = 0.0;
    let mut worst = None;
    let mut status = None;
    for batch in candidates.chunks(cfg.jobs.max(1)) {
        let params = SolveParams {
            time_limit: cfg.pdm_time_limit,
            cutoff: (ub > 0.0).then_some(ub - nominal),
            mip_gap: cfg.mip_gap,
        };
        let results = par::map(cfg.jobs, batch, |s| solve_pdm(ean, tt, s, params.clone()));
        for (s, r) in batch.iter().zip(results) {
            let (d, out) = r?;
            if out.status == SolveStatus::CutoffTriggered {
                continue;
            }
            let value = tau(ean, tt, &d);
            if value > ub {
                ub = value;
                worst = Some(s.clone());
                status = Some(out.status);
            }
        }
    }
    Ok((ub, worst, status))
}
