mod common;

use milp::SolveParams;
use proptest::prelude::*;
use robtt::dm::solve_pdm;
use robtt::eval::{evaluate, EvalConfig};
use robtt::pesp::{apply_passenger_cutoff, match_heuristic, solve_pesp};
use robtt::robust::{solve_master, MasterKind};
use robtt::scenario::ScenarioDomain;
use robtt::{no_wait_propagate, sample_scenario, Scenario, UncertaintySet};

use common::random_lines;

fn exact() -> SolveParams {
    SolveParams {
        mip_gap: 1e-9,
        ..SolveParams::default()
    }
}

fn tol(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pdm_never_exceeds_no_wait(seed in 0u64..10_000, period in 6i64..=10) {
        let (ean, tt) = random_lines(seed, period);
        let unc = UncertaintySet::at_most(2.0, 3.0);
        let s = sample_scenario(&unc, &ScenarioDomain::periodic(&ean), seed).unwrap();
        let nw = no_wait_propagate(&ean, &tt, &s);
        let (d, _) = solve_pdm(&ean, &tt, &s, exact()).unwrap();
        prop_assert!(d.objective <= nw.objective + tol(nw.objective), "{} > {}", d.objective, nw.objective);
    }

    #[test]
    fn pesp_below_match_and_cutoff_relaxes(seed in 0u64..10_000, period in 6i64..=10) {
        let (ean, _) = random_lines(seed, period);
        let (opt, out) = solve_pesp(&ean, exact(), None).unwrap();
        let heur = match_heuristic(&ean, seed).unwrap();
        prop_assert!(out.objective() <= heur.weighted_duration(&ean) + tol(out.objective()));
        let cut = apply_passenger_cutoff(&ean, 3.0);
        let (_, cut_out) = solve_pesp(&cut, exact(), None).unwrap();
        let restricted = opt.on(&cut).unwrap().weighted_duration(&cut);
        prop_assert!(cut_out.objective() <= restricted + tol(restricted));
    }

    #[test]
    fn optimal_master_below_no_wait_master(seed in 0u64..10_000, period in 6i64..=10) {
        let (ean, _) = random_lines(seed, period);
        let unc = UncertaintySet::at_most(2.0, 2.0);
        let domain = ScenarioDomain::periodic(&ean);
        let mut pool = vec![Scenario::zero(&ean)];
        for k in 0..2 {
            pool.push(sample_scenario(&unc, &domain, seed * 3 + k).unwrap());
        }
        let rpt = solve_master(MasterKind::Optimal, &ean, &pool, None, exact()).unwrap();
        let frpt = solve_master(MasterKind::NoWait, &ean, &pool, None, exact()).unwrap();
        prop_assert!(rpt.objective <= frpt.objective + tol(frpt.objective), "{} > {}", rpt.objective, frpt.objective);
        prop_assert!(rpt.timetable.is_feasible() && frpt.timetable.is_feasible());
    }

    #[test]
    fn delayed_never_below_nominal(seed in 0u64..10_000, period in 6i64..=10) {
        let (ean, tt) = random_lines(seed, period);
        let unc = UncertaintySet::at_most(2.0, 1.0);
        let cfg = EvalConfig {
            horizon: (0, 6 * period),
            scenarios: 2,
            seed,
            ..EvalConfig::default()
        };
        let r = evaluate(&ean, &tt, &unc, &cfg, "random", "lines").unwrap();
        prop_assert!(r.min_delayed() >= r.nominal - tol(r.nominal));
        prop_assert!(r.min_delayed() <= r.avg_delayed() && r.avg_delayed() <= r.max_delayed());
        let premium = r.avg_delayed() - r.nominal;
        prop_assert!((r.avg_passenger_delay() - premium).abs() <= tol(premium));
    }
}
