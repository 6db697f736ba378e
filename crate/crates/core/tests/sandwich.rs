use proptest::prelude::*;
use wefc_core::compiler::{compile, CompileParams};
use wefc_core::driver::bits_of;
use wefc_core::exec::Exec;
use wefc_core::pseudolang::{desugar, interpret, parse};
use wefc_core::sandwich::{
    build_m, check_slack, decide_over_sandwiched, extension_from_factorization, identity_factorization, inner_system,
    outer_system, search_small_factorization, to_csv, verify_factorization, CharacteristicSandwich, Language,
    Sandwiched, SandwichError,
};
use wefc_lp::Rat;

fn third() -> Rat {
    Rat::new(1, 3)
}

fn and_language() -> Language {
    Language::from_strings(2, &["11"]).unwrap()
}

#[test]
fn entry_examples() {
    let m = build_m(&and_language(), &third(), Exec::Sequential).unwrap();
    assert_eq!(m[1][2], Rat::from_int(2));
    assert_eq!(m[3][1], Rat::new(4, 3));
    assert!((0..4).all(|k| m[k][k].is_zero()));
}

#[test]
fn empty_language_gives_hamming_distance() {
    let lang = Language::from_mask(1, 0).unwrap();
    let m = build_m(&lang, &third(), Exec::Sequential).unwrap();
    assert_eq!(m, vec![vec![Rat::zero(), Rat::one()], vec![Rat::one(), Rat::zero()]]);
    assert!(check_slack(&lang, &third(), Exec::Sequential).unwrap().passed());
}

#[test]
fn d_out_of_range() {
    for d in [Rat::zero(), Rat::new(1, 2), Rat::one()] {
        assert!(matches!(build_m(&and_language(), &d, Exec::Sequential), Err(SandwichError::BadD(_))));
    }
    assert!(Language::from_strings(2, &["1"]).is_err());
    assert!(Language::from_strings(2, &["12"]).is_err());
}

#[test]
fn lemma_style_decisions_for_and() {
    let lang = and_language();
    let sw = CharacteristicSandwich::new(&lang, &third()).unwrap();
    for p in [inner_system(&sw), outer_system(&sw)] {
        for k in 0..4u64 {
            let a = bits_of(k, 2);
            let (yes, z) = decide_over_sandwiched(&p, &a, &third()).unwrap();
            assert_eq!(yes, lang.contains(k as usize), "a={a:?} z={z}");
            // never above the outer row for a
            let ones = a.iter().filter(|&&b| b).count() as i64;
            assert!(z <= &Rat::from_int(ones) + &third());
        }
    }
}

#[test]
fn compiled_membership_program() {
    let src = "input a, b\noutput w\nw = a & b\nreturn\n";
    let program = desugar(&parse(src).unwrap(), None).unwrap();
    let c = compile(&program, &CompileParams::for_program(&program, program.len())).unwrap();
    let lang = Language::from_predicate(2, |x| interpret(&program, x, 4).unwrap().w).unwrap();
    assert_eq!(lang, and_language());
    let p = Sandwiched::from(&c.wef);
    for k in 0..4u64 {
        let (yes, _) = decide_over_sandwiched(&p, &bits_of(k, 2), &third()).unwrap();
        assert_eq!(yes, lang.contains(k as usize));
    }
}

#[test]
fn identity_factorization_extends() {
    for mask in 0..16 {
        let lang = Language::from_mask(2, mask).unwrap();
        let sw = CharacteristicSandwich::new(&lang, &third()).unwrap();
        let s = sw.slack(Exec::Sequential);
        let (t, u) = identity_factorization(&s);
        assert!(verify_factorization(&s, &t, &u).unwrap().equal);
        let ext = extension_from_factorization(&sw.rows, &sw.vertices, &t, &u).unwrap();
        assert!(ext.projection_inside_outer && ext.inner_vertices_lift, "mask {mask}");
        assert_eq!(ext.q.num_vars(), 3 + 4);
    }
}

#[test]
fn corrupted_factor_is_rejected() {
    let sw = CharacteristicSandwich::new(&and_language(), &third()).unwrap();
    let s = sw.slack(Exec::Sequential);
    let (t, mut u) = identity_factorization(&s);
    u[1][2] = -u[1][2].clone();
    assert!(matches!(
        extension_from_factorization(&sw.rows, &sw.vertices, &t, &u),
        Err(SandwichError::Negative { .. })
    ));
    let (t, mut u) = identity_factorization(&s);
    u[0][1] = &u[0][1] + &Rat::one();
    assert!(matches!(extension_from_factorization(&sw.rows, &sw.vertices, &t, &u), Err(SandwichError::Mismatch { .. })));
}

#[test]
fn factorization_checks() {
    let zero = vec![vec![Rat::zero(); 2]; 2];
    assert!(verify_factorization(&zero, &zero, &zero).unwrap().equal);
    let eye = vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]];
    assert!(verify_factorization(&eye, &eye, &eye).unwrap().equal);
    assert!(matches!(verify_factorization(&eye, &eye, &zero[..1]), Err(SandwichError::Dimension(_))));
}

#[test]
fn and_slack_has_full_rank() {
    let sw = CharacteristicSandwich::new(&and_language(), &third()).unwrap();
    let search = search_small_factorization(&sw.slack(Exec::Sequential));
    assert_eq!((search.rank, search.trivial_dim), (4, 4));
    assert!(search.found.is_none());
}

#[test]
fn rank_deficient_search_finds_a_factorization() {
    // rank 2 with nonnegative rows spanning the rest
    let r = Rat::from_int;
    let s = vec![vec![r(1), r(0), r(1)], vec![r(0), r(1), r(1)], vec![r(1), r(1), r(2)]];
    let search = search_small_factorization(&s);
    assert_eq!(search.rank, 2);
    let (t, u) = search.found.expect("rows 0 and 1 generate row 2");
    assert_eq!(t[0].len(), 2);
    assert!(verify_factorization(&s, &t, &u).unwrap().equal);
}

#[test]
fn csv_uses_exact_fractions() {
    let m = build_m(&and_language(), &third(), Exec::Sequential).unwrap();
    let csv = to_csv(&m, 2);
    assert!(csv.starts_with("a\\b,00,10,01,11\n"));
    assert!(csv.contains("4/3"));
    assert_eq!(csv.lines().count(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slack_identity_and_nonnegativity(n in 1usize..=4, seed in any::<u64>(), num in 1i64..50) {
        let d = Rat::new(num, 101);
        let lang = Language::from_predicate(n, |x| {
            let k: u64 = x.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| 1 << i).sum();
            seed >> (k % 64) & 1 == 1
        }).unwrap();
        let m = build_m(&lang, &d, Exec::default()).unwrap();
        prop_assert!(m.iter().flatten().all(|v| !v.is_negative()));
        let rep = check_slack(&lang, &d, Exec::default()).unwrap();
        prop_assert!(rep.passed());
        prop_assert_eq!(rep.entries, 1 << (2 * n));
    }

    #[test]
    fn sequential_and_parallel_builds_agree(n in 1usize..=4, seed in any::<u64>()) {
        let lang = Language::from_predicate(n, |x| x.iter().filter(|b| **b).count() as u64 % 3 == seed % 3).unwrap();
        prop_assert_eq!(
            build_m(&lang, &third(), Exec::Sequential).unwrap(),
            build_m(&lang, &third(), Exec::Parallel).unwrap()
        );
    }
}
