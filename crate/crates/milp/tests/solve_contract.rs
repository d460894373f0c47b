use milp::{solve, LinExpr, MilpModel, ObjSense, SolveStatus, VarKind};
use proptest::prelude::*;

#[test]
fn min_continuous_hits_lower_bound() {
    let mut m = MilpModel::new("min_x", ObjSense::Minimize);
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY);
    m.add_ge("x_ge_3", x.into(), 3.0);
    m.set_objective(x.into());
    let out = solve(&m).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert!((out.value(x) - 3.0).abs() < 1e-9);
    assert!((out.objective() - 3.0).abs() < 1e-9);
}

#[test]
fn max_integer_with_cutoff() {
    let mut m = MilpModel::new("max_x", ObjSense::Maximize);
    let x = m.integer("x", 0.0, f64::INFINITY);
    m.add_le("x_le_5", x.into(), 5.0);
    m.set_objective(x.into());
    m.params.cutoff = Some(4.0);
    let out = solve(&m).unwrap();
    match out.status {
        SolveStatus::CutoffTriggered => assert!(out.value(x) >= 4.0),
        SolveStatus::Optimal => assert_eq!(out.value(x), 5.0),
        other => panic!("unexpected status {other}"),
    }
}

#[test]
fn infeasible_pair() {
    let mut m = MilpModel::new("infeasible", ObjSense::Minimize);
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY);
    m.add_ge("lo", x.into(), 1.0);
    m.add_le("hi", x.into(), 0.0);
    m.set_objective(x.into());
    let out = solve(&m).unwrap();
    assert_eq!(out.status, SolveStatus::Infeasible);
    assert!(out.values.is_none());
}

#[test]
fn unbounded_is_reported() {
    let mut m = MilpModel::new("unbounded", ObjSense::Maximize);
    let x = m.continuous("x", 0.0, f64::INFINITY);
    let z = m.integer("z", 0.0, 3.0);
    m.add_ge("c", LinExpr::from(x) - LinExpr::from(z), 0.0);
    m.set_objective(x.into());
    let out = solve(&m).unwrap();
    assert_eq!(out.status, SolveStatus::Unbounded);
}

#[test]
fn objective_constant_is_kept() {
    let mut m = MilpModel::new("offset", ObjSense::Minimize);
    let x = m.integer("x", 2.0, 9.0);
    m.set_objective(LinExpr::from(x) * 2.0 + LinExpr::constant(7.5));
    let out = solve(&m).unwrap();
    assert!((out.objective() - 11.5).abs() < 1e-9);
    assert!((out.best_bound.unwrap() - 11.5).abs() < 1e-6);
}

#[test]
fn warm_start_is_accepted() {
    let mut m = MilpModel::new("ws", ObjSense::Minimize);
    let x = m.integer("x", 0.0, 10.0);
    let y = m.integer("y", 0.0, 10.0);
    m.add_ge("c", LinExpr::from(x) * 3.0 + LinExpr::from(y) * 5.0, 17.0);
    m.set_objective(LinExpr::from(x) * 2.0 + LinExpr::from(y) * 3.0);
    m.warm_start = Some(vec![10.0, 10.0]);
    let out = solve(&m).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    // 3x + 5y >= 17: (4,1) costs 11, (0,4) costs 12, (2,3) costs 13, (1,3) costs 11.
    assert!((out.objective() - 11.0).abs() < 1e-9);
}

fn knapsack_like(weights: &[i32], values: &[i32], cap: i32) -> MilpModel {
    let mut m = MilpModel::new("knap", ObjSense::Maximize);
    let xs: Vec<_> = (0..weights.len())
        .map(|i| m.add_var(format!("x{i}"), VarKind::Binary, 0.0, 1.0))
        .collect();
    let mut w = LinExpr::new();
    let mut v = LinExpr::new();
    for (i, &x) in xs.iter().enumerate() {
        w.add_term(x, weights[i] as f64);
        v.add_term(x, values[i] as f64);
    }
    m.add_le("cap", w, cap as f64);
    m.set_objective(v);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Incumbents are rechecked independently and match brute force.
    #[test]
    fn knapsack_matches_enumeration(
        items in prop::collection::vec((1i32..10, 0i32..20), 1..8),
        cap in 0i32..30,
    ) {
        let weights: Vec<i32> = items.iter().map(|t| t.0).collect();
        let values: Vec<i32> = items.iter().map(|t| t.1).collect();
        let mut m = knapsack_like(&weights, &values, cap);
        m.params.mip_gap = 0.0;
        let out = solve(&m).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        prop_assert!(m.check_feasibility(out.values(), 1e-6).is_empty());
        prop_assert!((m.objective_value(out.values()) - out.objective()).abs() < 1e-6);

        let n = weights.len();
        let best = (0u32..(1 << n))
            .filter(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum::<i32>() <= cap)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum::<i32>())
            .max()
            .unwrap();
        prop_assert!((out.objective() - best as f64).abs() < 1e-6);
    }
}
