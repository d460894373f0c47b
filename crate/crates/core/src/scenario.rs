//! Budgeted uncertainty sets and source-delay scenarios.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::ean::PeriodicEan;
use crate::rollout::AperiodicEan;
use crate::{Error, FEAS_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetMode {
    /// `Σ s <= ρ`.
    AtMost,
    /// `Σ s = ρ`.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySet {
    pub sigma: f64,
    pub rho: f64,
    pub mode: BudgetMode,
}

impl UncertaintySet {
    pub fn at_most(sigma: f64, rho: f64) -> Self {
        UncertaintySet {
            sigma,
            rho,
            mode: BudgetMode::AtMost,
        }
    }

    /// Equality budget over a rolled-out horizon: `ρ` per period times the
    /// number of periods in `[lo, hi]`.
    pub fn exact_over_horizon(&self, horizon: (i64, i64), period: i64) -> Self {
        UncertaintySet {
            sigma: self.sigma,
            rho: self.rho * (horizon.1 - horizon.0) as f64 / period as f64,
            mode: BudgetMode::Exact,
        }
    }
}

/// Which entries of a scenario may carry a source delay: every event and the
/// listed (drive/wait) activities.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDomain {
    pub num_events: usize,
    pub num_activities: usize,
    pub eligible: Vec<usize>,
}

impl ScenarioDomain {
    pub fn periodic(ean: &PeriodicEan) -> Self {
        ScenarioDomain {
            num_events: ean.num_events(),
            num_activities: ean.num_activities(),
            eligible: ean.dw_activities().map(|(k, _)| k).collect(),
        }
    }

    pub fn aperiodic(aper: &AperiodicEan) -> Self {
        ScenarioDomain {
            num_events: aper.events.len(),
            num_activities: aper.activities.len(),
            eligible: aper
                .activities
                .iter()
                .enumerate()
                .filter(|(_, a)| a.kind.is_driving_or_waiting())
                .map(|(k, _)| k)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.num_events + self.eligible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn scenario_from_slots(&self, slots: &[f64]) -> Scenario {
        let mut activity = vec![0.0; self.num_activities];
        for (k, &a) in self.eligible.iter().enumerate() {
            activity[a] = slots[self.num_events + k];
        }
        Scenario {
            event: slots[..self.num_events].to_vec(),
            activity,
        }
    }
}

/// Source delays on events and activities (zero on change activities).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub event: Vec<f64>,
    pub activity: Vec<f64>,
}

impl Scenario {
    pub fn zero(ean: &PeriodicEan) -> Self {
        Scenario {
            event: vec![0.0; ean.num_events()],
            activity: vec![0.0; ean.num_activities()],
        }
    }

    pub fn zeros(num_events: usize, num_activities: usize) -> Self {
        Scenario {
            event: vec![0.0; num_events],
            activity: vec![0.0; num_activities],
        }
    }

    pub fn total(&self) -> f64 {
        self.event.iter().chain(&self.activity).sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.event.iter().chain(&self.activity).fold(0.0, |m, &x| m.max(x))
    }

    pub fn is_zero(&self) -> bool {
        self.event.iter().chain(&self.activity).all(|&x| x == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Scenario {
        Scenario {
            event: self.event.iter().map(|x| x * factor).collect(),
            activity: self.activity.iter().map(|x| x * factor).collect(),
        }
    }

    /// Clamps entries to `[0, σ]` and scales down to the budget; used to
    /// strip solver round-off from scenarios read out of a model.
    pub fn projected(&self, unc: &UncertaintySet) -> Scenario {
        let clamp = |x: &f64| if *x < 1e-9 { 0.0 } else { x.min(unc.sigma) };
        let mut s = Scenario {
            event: self.event.iter().map(clamp).collect(),
            activity: self.activity.iter().map(clamp).collect(),
        };
        let total = s.total();
        if total > unc.rho && total > 0.0 {
            s = s.scaled(unc.rho / total);
        }
        s
    }

    /// Elementwise comparison with absolute tolerance `tol`.
    pub fn approx_eq(&self, other: &Scenario, tol: f64) -> bool {
        self.event.len() == other.event.len()
            && self.activity.len() == other.activity.len()
            && self
                .event
                .iter()
                .chain(&self.activity)
                .zip(other.event.iter().chain(&other.activity))
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Lists every broken invariant of `unc` (empty if the scenario is a member).
    pub fn violations(&self, unc: &UncertaintySet, domain: &ScenarioDomain) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &x) in self.event.iter().enumerate() {
            if x < -FEAS_TOL || x > unc.sigma + FEAS_TOL || !x.is_finite() {
                out.push(format!("event {i}: delay {x} outside [0, {}]", unc.sigma));
            }
        }
        let mut eligible = vec![false; self.activity.len()];
        for &a in &domain.eligible {
            if a < eligible.len() {
                eligible[a] = true;
            }
        }
        for (a, &x) in self.activity.iter().enumerate() {
            if !eligible[a] && x != 0.0 {
                out.push(format!("activity {a}: source delay {x} on a change activity"));
            } else if x < -FEAS_TOL || x > unc.sigma + FEAS_TOL || !x.is_finite() {
                out.push(format!("activity {a}: delay {x} outside [0, {}]", unc.sigma));
            }
        }
        let total = self.total();
        let tol = FEAS_TOL * (1.0 + unc.rho.abs());
        match unc.mode {
            BudgetMode::AtMost if total > unc.rho + tol => {
                out.push(format!("total delay {total} exceeds budget {}", unc.rho))
            }
            BudgetMode::Exact if (total - unc.rho).abs() > tol => {
                out.push(format!("total delay {total} differs from budget {}", unc.rho))
            }
            _ => {}
        }
        out
    }
}

/// Spreads `total` over `weights` proportionally, capping each entry at
/// `sigma` and handing capped mass to the remaining entries.
fn spread(total: f64, sigma: f64, weights: &[f64]) -> Vec<f64> {
    let n = weights.len();
    if n == 0 || total <= 0.0 {
        return vec![0.0; n];
    }
    let wsum: f64 = weights.iter().sum();
    let mut x: Vec<f64> = if wsum > 0.0 {
        weights.iter().map(|w| w / wsum * total).collect()
    } else {
        vec![total / n as f64; n]
    };
    for _ in 0..50 {
        let mut excess = 0.0;
        for v in x.iter_mut() {
            if *v > sigma {
                excess += *v - sigma;
                *v = sigma;
            }
        }
        if excess <= 1e-6 {
            break;
        }
        let free: Vec<usize> = (0..n).filter(|&i| x[i] < sigma).collect();
        if free.is_empty() {
            break;
        }
        let share = excess / free.len() as f64;
        for i in free {
            x[i] += share;
        }
    }
    // Exact total up to rounding: top up entries in order.
    let mut residual = total - x.iter().sum::<f64>();
    for v in x.iter_mut() {
        if residual.abs() <= 1e-12 {
            break;
        }
        let step = if residual > 0.0 {
            residual.min(sigma - *v)
        } else {
            residual.max(-*v)
        };
        *v += step;
        residual -= step;
    }
    for v in x.iter_mut() {
        *v = v.clamp(0.0, sigma);
    }
    x
}

/// Draws a member of `unc` over `domain`, deterministically for `seed`.
///
/// Exact mode spreads the full budget over all entries with exponential
/// weights. At-most mode spends the full budget on a random support whose size
/// is uniform in `1..=|domain|`, so both concentrated and spread-out delays
/// are drawn.
pub fn sample_scenario(unc: &UncertaintySet, domain: &ScenarioDomain, seed: u64) -> Result<Scenario, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(unc, domain, &mut rng)
}

pub fn sample_with<R: Rng>(unc: &UncertaintySet, domain: &ScenarioDomain, rng: &mut R) -> Result<Scenario, Error> {
    let n = domain.len();
    if unc.sigma < 0.0 || unc.rho < 0.0 {
        return Err(Error::Invalid(format!(
            "negative uncertainty parameters sigma={} rho={}",
            unc.sigma, unc.rho
        )));
    }
    let mut slots = vec![0.0; n];
    if n == 0 || unc.rho == 0.0 || unc.sigma == 0.0 {
        if unc.mode == BudgetMode::Exact && unc.rho > 0.0 {
            return Err(Error::InfeasibleBudget {
                budget: unc.rho,
                sigma: unc.sigma,
                domain: n,
            });
        }
        return Ok(domain.scenario_from_slots(&slots));
    }
    match unc.mode {
        BudgetMode::Exact => {
            if unc.rho > unc.sigma * n as f64 + FEAS_TOL {
                return Err(Error::InfeasibleBudget {
                    budget: unc.rho,
                    sigma: unc.sigma,
                    domain: n,
                });
            }
            let weights: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            slots = spread(unc.rho, unc.sigma, &weights);
        }
        BudgetMode::AtMost => {
            let k = rng.random_range(1..=n);
            let support = index::sample(rng, n, k).into_vec();
            let weights: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total = unc.rho.min(unc.sigma * k as f64);
            for (v, &i) in spread(total, unc.sigma, &weights).into_iter().zip(&support) {
                slots[i] = v;
            }
        }
    }
    Ok(domain.scenario_from_slots(&slots))
}

/// Copies periodic source delays to every rolled-out repetition.
pub fn scenario_rollout(s: &Scenario, aper: &AperiodicEan) -> Scenario {
    Scenario {
        event: aper.events.iter().map(|e| s.event[e.origin]).collect(),
        activity: aper.activities.iter().map(|a| s.activity[a.origin]).collect(),
    }
}
