use proptest::prelude::*;
use wefc_core::compiler::{compile, CompileParams};
use wefc_core::driver::{bits_of, unique_extension};
use wefc_core::matching::has_pm;
use wefc_core::pseudolang::{desugar, interpret, parse, LangError};

const MATCHING4: &str = include_str!("../data/matching4.psc");

#[test]
fn listing_desugars_to_twelve_lines() {
    let p = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
    assert_eq!(p.len(), 12);
    assert_eq!(p.symbols.word, 3);
    assert_eq!(p.symbols.inputs.len(), 6);
}

#[test]
fn listing_trace_for_a_matching() {
    let p = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
    // x12 = x34 = 1
    let tr = interpret(&p, &[true, false, false, false, false, true], 13).unwrap();
    assert!(tr.w);
    assert_eq!(&tr.line_at[..7], &[1, 2, 3, 4, 11, 12, 12]);
    assert_eq!((tr.steps_used, tr.halt_time), (5, 6));
    assert_eq!(tr.memory.len(), 14);
}

#[test]
fn listing_agrees_with_brute_force() {
    let p = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
    for k in 0..64 {
        let x = bits_of(k, 6);
        assert_eq!(interpret(&p, &x, 13).unwrap().w, has_pm(4, &x).unwrap(), "graph {k}");
    }
}

#[test]
fn bad_label_is_an_error() {
    let e = parse("output w\nif w then go to 7 endif\nreturn\n")
        .and_then(|p| desugar(&p, None).map(|_| ()))
        .unwrap_err();
    assert!(e.to_string().contains('7'), "{e}");
}

#[test]
fn too_few_steps_is_non_termination() {
    let p = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
    let e = interpret(&p, &[false; 6], 3).unwrap_err();
    assert!(matches!(e, LangError::NonTermination { .. }), "{e}");
}

#[test]
fn while_loop_runs_until_the_flag_clears() {
    let src = "word 2\noutput w\nint i\nbits more, t\nint two = 2\nmore = 1\nwhile more\n  i = i + 1\n  t = i == two\n  more = !t\n  w = !w\nendwhile\nreturn\n";
    let p = desugar(&parse(src).unwrap(), None).unwrap();
    // two iterations toggle w twice
    assert!(!interpret(&p, &[], 200).unwrap().w);
}

/// One random statement over inputs a, b, c and scratch bits t0..t2, w.
#[derive(Debug, Clone)]
enum Op {
    Const(usize, bool),
    Copy(usize, usize),
    Not(usize, usize),
    And(usize, usize, usize),
    Or(usize, usize, usize),
    Xor(usize, usize, usize),
    Or3(usize, usize, usize, usize),
}

const NAMES: [&str; 7] = ["a", "b", "c", "t0", "t1", "t2", "w"];
const WRITABLE: std::ops::Range<usize> = 3..7;

fn op() -> impl Strategy<Value = Op> {
    let dst = WRITABLE;
    let src = 0..7usize;
    prop_oneof![
        (dst.clone(), any::<bool>()).prop_map(|(d, v)| Op::Const(d, v)),
        (dst.clone(), src.clone()).prop_map(|(d, s)| Op::Copy(d, s)),
        (dst.clone(), src.clone()).prop_map(|(d, s)| Op::Not(d, s)),
        (dst.clone(), src.clone(), src.clone()).prop_map(|(d, p, q)| Op::And(d, p, q)),
        (dst.clone(), src.clone(), src.clone()).prop_map(|(d, p, q)| Op::Or(d, p, q)),
        (dst.clone(), src.clone(), src.clone()).prop_map(|(d, p, q)| Op::Xor(d, p, q)),
        (dst, src.clone(), src.clone(), src).prop_map(|(d, p, q, r)| Op::Or3(d, p, q, r)),
    ]
}

fn render(ops: &[Op]) -> String {
    let mut s = String::from("input a, b, c\noutput w\nbits t0, t1, t2\n");
    for o in ops {
        let n = |i: usize| NAMES[i];
        s += &match *o {
            Op::Const(d, v) => format!("{} = {}\n", n(d), v as u8),
            Op::Copy(d, p) => format!("{} = {}\n", n(d), n(p)),
            Op::Not(d, p) => format!("{} = !{}\n", n(d), n(p)),
            Op::And(d, p, q) => format!("{} = {} & {}\n", n(d), n(p), n(q)),
            Op::Or(d, p, q) => format!("{} = {} | {}\n", n(d), n(p), n(q)),
            Op::Xor(d, p, q) => format!("{} = {} ^ {}\n", n(d), n(p), n(q)),
            Op::Or3(d, p, q, r) => format!("{} = {} | {} | {}\n", n(d), n(p), n(q), n(r)),
        };
    }
    s + "return\n"
}

fn run(ops: &[Op], input: &[bool]) -> bool {
    let mut m = [false; 7];
    m[..3].copy_from_slice(input);
    for o in ops {
        match *o {
            Op::Const(d, v) => m[d] = v,
            Op::Copy(d, p) => m[d] = m[p],
            Op::Not(d, p) => m[d] = !m[p],
            Op::And(d, p, q) => m[d] = m[p] & m[q],
            Op::Or(d, p, q) => m[d] = m[p] | m[q],
            Op::Xor(d, p, q) => m[d] = m[p] ^ m[q],
            Op::Or3(d, p, q, r) => m[d] = m[p] | m[q] | m[r],
        }
    }
    m[6]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn straight_line_programs(ops in prop::collection::vec(op(), 1..7)) {
        let src = render(&ops);
        let p = desugar(&parse(&src).unwrap(), None).unwrap();
        let steps = p.len() + 1;
        let c = compile(&p, &CompileParams::for_program(&p, steps)).unwrap();
        for k in 0..8 {
            let x = bits_of(k, 3);
            let want = run(&ops, &x);
            let trace = interpret(&p, &x, steps).unwrap();
            prop_assert_eq!(trace.w, want, "{}", src);
            let values = unique_extension(&c.wef, &x).map_err(TestCaseError::fail)?;
            prop_assert_eq!(values[c.wef.w_var.index()], want, "{}", src);
        }
    }

    #[test]
    fn for_loops_run_their_count(count in 0u64..8) {
        let src = format!("word 3\noutput w\nint i\nfor i in 0..{count}\n  w = !w\nendfor\nreturn\n");
        let p = desugar(&parse(&src).unwrap(), None).unwrap();
        prop_assert_eq!(interpret(&p, &[], 400).unwrap().w, count % 2 == 1);
    }

    #[test]
    fn listing_is_deterministic(k in 0u64..64) {
        let p = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
        let x = bits_of(k, 6);
        let a = interpret(&p, &x, 13).unwrap();
        let b = interpret(&p, &x, 40).unwrap();
        prop_assert_eq!(a.w, b.w);
        prop_assert_eq!(a.halt_time, b.halt_time);
        prop_assert!(a.halt_time <= 13);
    }
}
