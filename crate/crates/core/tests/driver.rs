use proptest::prelude::*;
use wefc_core::circuit::{encode, pm4_circuit, threshold_matching_circuit, CircuitBuilder, ThresholdLayout};
use wefc_core::driver::{
    bits_of, build_objective, call_budget, check_monotone, decide, decide_with, find_safe_d, no_instance_is_integral,
    optimize_binary_search, q2_system, DriverError, SearchError,
};
use wefc_core::exec::Exec;
use wefc_core::matching::{has_pm, perfect_matchings};
use wefc_core::wef::WefSystem;
use wefc_lp::Rat;

fn pm4() -> WefSystem {
    encode(&pm4_circuit())
}

fn graph(edges: &[usize]) -> Vec<bool> {
    let mut x = vec![false; 6];
    edges.iter().for_each(|&e| x[e] = true);
    x
}

#[test]
fn objective_signs_follow_the_graph() {
    let wef = pm4();
    let obj = build_objective(&wef, &graph(&[0, 1]), &Rat::new(1, 2)).unwrap();
    let coef = |v| obj.terms().iter().find(|(u, _)| *u == v).map(|(_, c)| c.clone()).unwrap();
    let signs: Vec<Rat> = wef.x_vars.iter().map(|&v| coef(v)).collect();
    let r = Rat::from_int;
    assert_eq!(signs, vec![r(1), r(1), r(-1), r(-1), r(-1), r(-1)]);
    assert_eq!(coef(wef.w_var), Rat::new(1, 2));
    let ones = build_objective(&wef, &[true; 6], &Rat::new(1, 2)).unwrap();
    assert!(wef.x_vars.iter().all(|&v| ones.terms().iter().any(|(u, c)| *u == v && *c == Rat::one())));
    assert!(matches!(build_objective(&wef, &[true], &Rat::new(1, 2)), Err(DriverError::Length { .. })));
}

#[test]
fn empty_input_objective_is_w_only() {
    let mut b = CircuitBuilder::new();
    let a = b.input("a");
    let y = b.and(a, a.not());
    let mut wef = encode(&b.finish(y).unwrap());
    wef.x_vars.clear();
    let obj = build_objective(&wef, &[], &Rat::new(1, 3)).unwrap();
    assert_eq!(obj.terms().len(), 1);
}

#[test]
fn decide_examples() {
    let wef = pm4();
    let yes = decide(&wef, &graph(&[0, 5])).unwrap();
    assert!(yes.answer);
    assert_eq!((yes.m, yes.z_star.clone()), (2, Rat::new(5, 2)));
    let no = decide(&wef, &graph(&[0, 1])).unwrap();
    assert!(!no.answer && no.z_star < Rat::new(5, 2) && no.gap().is_positive());
}

#[test]
fn single_edge_instance() {
    let mut b = CircuitBuilder::new();
    let x = b.input("x12");
    let w = b.and(x, x);
    let wef = encode(&b.finish(w).unwrap());
    let v = decide(&wef, &[true]).unwrap();
    assert_eq!(v.z_star, Rat::new(3, 2));
    assert!(v.answer);
    let q2 = decide(&q2_system(), &[true]).unwrap();
    assert_eq!(q2.z_star, Rat::new(3, 2));
}

#[test]
fn yes_instances_pin_x_and_w() {
    let wef = pm4();
    for d in [Rat::new(1, 2), Rat::new(1, 5)] {
        for k in 0..64 {
            let x = bits_of(k, 6);
            if !has_pm(4, &x).unwrap() {
                continue;
            }
            let v = decide_with(&wef, &x, &d, true).unwrap();
            assert!(v.answer && v.is_unique() == Some(true), "graph {k}: {v}");
            for (&var, &bit) in wef.x_vars.iter().zip(&x) {
                assert_eq!(v.point[var.index()], Rat::from_int(bit as i64));
            }
        }
    }
}

#[test]
fn safe_d_for_the_fractional_example() {
    let safe = find_safe_d(&q2_system(), Exec::Sequential).unwrap();
    assert!(safe.d < Rat::new(1, 4));
    assert_eq!(safe.min_gap, Some(Rat::new(1, 4)));
    assert!(no_instance_is_integral(&q2_system(), &[false], &safe.d).unwrap());
    assert!(!no_instance_is_integral(&q2_system(), &[false], &Rat::new(1, 2)).unwrap());
}

#[test]
fn safe_d_for_pm4_is_validated() {
    let wef = pm4();
    let safe = find_safe_d(&wef, Exec::default()).unwrap();
    assert_eq!(safe.no_instances, 27);
    for k in 0..64 {
        let x = bits_of(k, 6);
        if !has_pm(4, &x).unwrap() {
            assert!(no_instance_is_integral(&wef, &x, &safe.d).unwrap(), "graph {k}");
            assert!(!decide_with(&wef, &x, &safe.d, false).unwrap().answer);
        }
    }
}

#[test]
fn safe_d_stays_half_without_competing_vertices() {
    let mut b = CircuitBuilder::new();
    let x = b.input("x");
    let w = b.and(x, x);
    let safe = find_safe_d(&encode(&b.finish(w).unwrap()), Exec::Sequential).unwrap();
    assert_eq!(safe.d, Rat::new(1, 2));
}

#[test]
fn rejects_bad_d() {
    let wef = pm4();
    for d in [Rat::zero(), Rat::new(3, 5), Rat::from_int(-1)] {
        assert!(matches!(decide_with(&wef, &[false; 6], &d, false), Err(DriverError::BadD(_))));
    }
}

fn search_k4(weights: &[u64]) -> (Option<u64>, usize) {
    let layout = ThresholdLayout::new(4, 3);
    let wef = encode(&threshold_matching_circuit(layout));
    let res =
        optimize_binary_search(0, layout.max_total(), |k| decide(&wef, &layout.input_bits(weights, k)).map(|v| v.answer))
            .unwrap();
    (res.best, res.calls)
}

#[test]
fn binary_search_examples() {
    // x12 x13 x14 x23 x24 x34
    let (best, calls) = search_k4(&[3, 1, 1, 1, 1, 3]);
    assert_eq!(best, Some(6));
    assert!(calls <= 5);
    assert_eq!(search_k4(&[0; 6]).0, Some(0));
    let layout = ThresholdLayout::new(2, 3);
    let wef = encode(&threshold_matching_circuit(layout));
    let res = optimize_binary_search(0, layout.max_total(), |k| decide(&wef, &layout.input_bits(&[5], k)).map(|v| v.answer))
        .unwrap();
    assert_eq!(res.best, Some(5));
}

#[test]
fn search_errors() {
    let empty = optimize_binary_search(3, 2, |_| Ok::<_, ()>(true));
    assert!(matches!(empty, Err(SearchError::EmptyRange { .. })));
    let bumpy = check_monotone(0, 5, |k| Ok::<_, ()>(k != 2));
    assert!(matches!(bumpy, Err(SearchError::NonMonotone { yes: 3, no: 2 })));
    assert!(check_monotone(0, 5, |k| Ok::<_, ()>(k < 4)).is_ok());
    let failing = optimize_binary_search(0, 4, |_| Err::<bool, _>("oracle down"));
    assert!(matches!(failing, Err(SearchError::Oracle("oracle down"))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn threshold_search_matches_brute_force(weights in prop::collection::vec(0u64..8, 6)) {
        let best = perfect_matchings(4).iter().map(|m| m.iter().map(|&e| weights[e]).sum::<u64>()).max();
        let (found, calls) = search_k4(&weights);
        prop_assert_eq!(found, best);
        prop_assert!(calls <= call_budget(15));
    }

    #[test]
    fn search_over_step_functions(lo in 0u64..50, len in 1u64..200, cut in 0u64..260) {
        let hi = lo + len - 1;
        let res = optimize_binary_search(lo, hi, |k| Ok::<_, ()>(k < cut)).unwrap();
        let want = if cut <= lo { None } else { Some((cut - 1).min(hi)) };
        prop_assert_eq!(res.best, want);
        prop_assert!(res.calls <= call_budget(len));
    }
}
