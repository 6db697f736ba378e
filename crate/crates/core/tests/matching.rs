use proptest::prelude::*;
use wefc_core::circuit::pm4_circuit;
use wefc_core::driver::bits_of;
use wefc_core::exec::Exec;
use wefc_core::matching::{
    appendix_matrix, check_appendix_facets, check_ep_face, check_odd_set, check_prop2, double_factorial_odd,
    edge_index, exact_det, exact_rank, graph_from_edges, has_pm, hypo_matchable_sets, num_edges,
};
use wefc_lp::Rat;

#[test]
fn has_pm_examples() {
    assert!(has_pm(4, &[true; 6]).unwrap());
    assert!(!has_pm(4, &graph_from_edges(4, &[(1, 2), (2, 3)])).unwrap());
    assert!(has_pm(4, &graph_from_edges(4, &[(1, 2), (3, 4)])).unwrap());
    assert!(has_pm(4, &[true]).is_err());
}

#[test]
fn brute_force_agrees_with_circuit() {
    let c = pm4_circuit();
    for k in 0..64 {
        let g = bits_of(k, 6);
        assert_eq!(has_pm(4, &g).unwrap(), c.eval(&g).unwrap().w);
    }
}

#[test]
fn tight_vertices_are_the_matchings() {
    for (n, want) in [(2, 1), (4, 3), (6, 15)] {
        let rep = check_ep_face(n, Exec::default());
        assert!(rep.passed(), "{rep:?}");
        assert_eq!((rep.tight, double_factorial_odd(n)), (want, want));
    }
}

#[test]
fn prop2_examples() {
    let half = Rat::new(1, 2);
    let k4 = check_prop2(4, &[true; 6], &half, Exec::Sequential).unwrap();
    assert_eq!(k4.z_star, Rat::new(13, 2));
    assert!(k4.passed());
    let path = graph_from_edges(4, &[(1, 2), (2, 3)]);
    let p = check_prop2(4, &path, &half, Exec::Sequential).unwrap();
    assert_eq!(p.z_star, Rat::from_int(2));
    assert!(p.passed() && !p.has_pm);
    assert!(check_prop2(4, &[false; 6], &half, Exec::Sequential).unwrap().z_star.is_zero());
}

#[test]
fn prop2_holds_on_every_graph() {
    for d in [Rat::new(1, 2), Rat::new(1, 7)] {
        for k in 0..64 {
            let rep = check_prop2(4, &bits_of(k, 6), &d, Exec::default()).unwrap();
            assert!(rep.passed(), "graph {k}, d = {d}: {rep:?}");
        }
    }
}

#[test]
fn odd_set_description() {
    for n in [2, 4, 6] {
        let rep = check_odd_set(n, Exec::default());
        assert!(rep.passed(), "{rep:?}");
    }
}

#[test]
fn triangle_plus_isolated_vertex_is_hypo_matchable() {
    let triangle = graph_from_edges(4, &[(1, 2), (1, 3), (2, 3)]);
    let sets = hypo_matchable_sets(4, Exec::Sequential);
    assert!(sets.contains(&triangle));
    for s in &sets {
        assert!(!has_pm(4, s).unwrap());
    }
}

#[test]
fn appendix_matrix_for_four_nodes() {
    let a = appendix_matrix(4);
    assert_eq!(a.matrix.len(), 7);
    assert!(a.matrix.iter().all(|r| r.len() == 7));
    assert_eq!(exact_rank(&a.matrix), 7);
    assert!(!exact_det(&a.matrix).is_zero());
    // the matching itself is a row with w = 1
    let m = graph_from_edges(4, &[(1, 2), (3, 4)]);
    assert!(a.points.contains(&(m, true)));
    assert!(check_appendix_facets(4, Exec::default()).passed());
}

#[test]
fn appendix_for_six_nodes() {
    let rep = check_appendix_facets(6, Exec::default());
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.matrix_size, num_edges(6) + 1);
}

proptest! {
    #[test]
    fn adding_edges_never_destroys_a_matching(k in 0u64..64, e in 0usize..6) {
        let mut g = bits_of(k, 6);
        let before = has_pm(4, &g).unwrap();
        g[e] = true;
        prop_assert!(!before || has_pm(4, &g).unwrap());
    }

    #[test]
    fn edge_index_is_a_bijection(i in 0usize..8, j in 0usize..8) {
        prop_assume!(i < j);
        let g = graph_from_edges(8, &[(i + 1, j + 1)]);
        prop_assert!(g[edge_index(8, i, j)]);
        prop_assert_eq!(g.iter().filter(|b| **b).count(), 1);
    }
}
