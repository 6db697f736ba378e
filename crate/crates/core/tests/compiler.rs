use wefc_core::compiler::{
    check_controlled, compile, compile_with, gen_group, stats_check, CompileError, CompileParams, CompiledWef, Var,
};
use wefc_core::driver::{bits_of, unique_extension, verify_x01};
use wefc_core::exec::Exec;
use wefc_core::matching::has_pm;
use wefc_core::pseudolang::{desugar, interpret, parse, BasicProgram, Stmt};
use wefc_core::wef::Group;
use wefc_lp::{fix_vars, var_ranges, Rat};

const MATCHING4: &str = include_str!("../data/matching4.psc");

/// Reads x[0..3] into an array, folds parity, then reads back through a
/// second index and tests two integers for equality.
const ARRAY1: &str = "\
word 2
input array X[3]
output w
array R[3]
int i, k = 2
bits b, t, u
for i in 0..3
    b = X[i]
    R[i] = b
    w = w ^ b
endfor
t = i == k
if t then go to 99 endif
u = R[k]
w = w ^ u
return
99: w = 0
return
";

/// Symmetric write into a 2-D array and reads through both orders.
const ARRAY2: &str = "\
word 1
input array2 A[1][1]
output w
array2 S[1][1]
int i, j = 1
bits b, c, e
b = A[i][j]
sym S[i][j] = b
c = S[j][i]
e = A[j][j]
w = c & e
return
";

fn build(src: &str) -> BasicProgram {
    desugar(&parse(src).expect("parses"), None).expect("desugars")
}

/// Steps enough for every input to halt, and at least one per line.
fn steps_for(program: &BasicProgram) -> usize {
    let q = program.symbols.inputs.len();
    let halt = (0..1u64 << q)
        .map(|k| interpret(program, &bits_of(k, q), 500).expect("halts").halt_time)
        .max()
        .unwrap_or(1);
    halt.max(program.len())
}

fn compiled(src: &str) -> CompiledWef {
    let program = build(src);
    let steps = steps_for(&program);
    compile(&program, &CompileParams::for_program(&program, steps)).expect("compiles")
}

fn assert_matches_interpreter(c: &CompiledWef) {
    let q = c.wef.x_vars.len();
    for k in 0..1u64 << q {
        let x = bits_of(k, q);
        let trace = interpret(&c.program, &x, c.layout.steps).expect("halts");
        let values = unique_extension(&c.wef, &x).unwrap_or_else(|e| panic!("input {x:?}: {e}"));
        for (id, &v) in values.iter().enumerate() {
            let var = c.layout.var(wefc_lp::VarId(id));
            assert_eq!(v, c.trace_value(&trace, wefc_lp::VarId(id)), "input {x:?}, {var:?}");
        }
    }
}

#[test]
fn one_line_program_forces_w() {
    let c = compiled("output w\nw = 1\nreturn\n");
    assert!(c.wef.x_vars.is_empty());
    let values = unique_extension(&c.wef, &[]).unwrap();
    assert!(values[c.wef.w_var.index()]);
}

#[test]
fn refuses_too_few_steps_and_word_mismatch() {
    let program = build(MATCHING4);
    let short = CompileParams::for_program(&program, program.len() - 1);
    assert!(matches!(compile(&program, &short), Err(CompileError::TooFewSteps { .. })));
    let wide = CompileParams { word: 4, ..CompileParams::for_program(&program, 13) };
    assert!(matches!(compile(&program, &wide), Err(CompileError::WordMismatch { .. })));
}

#[test]
fn and_statement_is_three_rows() {
    let program = build("input a, b\noutput w\nw = a & b\nreturn\n");
    let rows = gen_group(program.line(1), 1, 1, false, &program.symbols);
    assert_eq!(rows.update.len(), 3);
    // each row is controlled by S(1,1) with coefficient 1 and rhs e + 1
    for r in &rows.update {
        assert_eq!(r.coef(Var::S { line: 1, t: 1 }), 1);
    }
}

#[test]
fn return_is_one_flow_row() {
    let program = build("output w\nw = 1\nreturn\n");
    let rows = gen_group(program.line(2), 2, 3, false, &program.symbols);
    assert_eq!(rows.flow.len(), 1);
    let row = &rows.flow[0];
    assert_eq!((row.coef(Var::S { line: 2, t: 3 }), row.coef(Var::S { line: 2, t: 4 }), row.rhs), (1, -1, 0));
    assert!(rows.update.is_empty());
    // nothing flows out of the final step
    assert!(gen_group(program.line(2), 2, 3, true, &program.symbols).flow.is_empty());
}

#[test]
fn array_write_row_count() {
    let program = build("word 2\ninput b\noutput w\narray R[3]\nint m\nR[m] = b\nw = 1\nreturn\n");
    let rows = gen_group(program.line(1), 1, 1, false, &program.symbols);
    // per element: three selector rows for a two-bit index, four write rows
    assert_eq!(rows.update.len(), 4 * (2 + 1) + 4 * 4);
}

#[test]
fn every_template_is_slack_when_off() {
    for src in [MATCHING4, ARRAY1, ARRAY2] {
        let c = compiled(src);
        let audit = c.template_audit();
        assert!(!audit.is_empty());
        assert!(audit.iter().all(|r| r.slack_when_off && r.enumerated), "{src}");
    }
}

#[test]
fn controller_on_can_bind() {
    // the AND rows cut off a = b = 1, w = 0 when the line runs
    let program = build("input a, b\noutput w\nw = a & b\nreturn\n");
    let rows = gen_group(program.line(1), 1, 1, false, &program.symbols);
    let ctrl = Var::S { line: 1, t: 1 };
    assert!(rows.update.iter().all(|r| check_controlled(r, ctrl).slack_when_off));
    assert!(rows.update.iter().any(|r| !r.is_vacuous()));
}

#[test]
fn matching_listing_counts() {
    let c = compiled_listing(13);
    let s = stats_check(&c);
    assert_eq!((s.num_constraints, s.num_vars), (3305, 296));
    assert_eq!(s.per_group[&Group::C], 4);
    assert_eq!(s.per_group[&Group::D], 1);
    assert_eq!(s.per_group[&Group::E], 13);
    assert!(s.within_bounds());
}

fn compiled_listing(steps: usize) -> CompiledWef {
    let program = build(MATCHING4);
    compile(&program, &CompileParams::for_program(&program, steps)).unwrap()
}

#[test]
fn doubling_steps_roughly_doubles() {
    let (a, b) = (stats_check(&compiled_listing(13)), stats_check(&compiled_listing(26)));
    let fixed = a.per_group[&Group::C] + a.per_group[&Group::D];
    let per_step = (a.num_constraints - fixed) / 13 + 1;
    assert!(b.num_constraints <= 2 * a.num_constraints + per_step);
    assert!(b.num_constraints >= 2 * a.num_constraints - 2 * fixed - per_step);
    assert!(b.num_vars <= 2 * a.num_vars);
}

#[test]
fn single_statement_counts_are_linear_in_slots() {
    let rows = |bits: usize| {
        let names: Vec<String> = (0..bits).map(|k| format!("b{k}")).collect();
        let src = format!("output w\nbits {}\nw = 1\nreturn\n", names.join(", "));
        stats_check(&compiled(&src)).num_constraints
    };
    let (r1, r2, r3) = (rows(1), rows(2), rows(3));
    assert_eq!(r2 - r1, r3 - r2);
}

#[test]
fn sequential_and_parallel_agree() {
    let program = build(MATCHING4);
    let params = CompileParams::for_program(&program, 13);
    let a = compile_with(&program, &params, Exec::Sequential).unwrap();
    let b = compile_with(&program, &params, Exec::Parallel).unwrap();
    assert_eq!(a.wef.lp, b.wef.lp);
    assert_eq!(a.wef.tag_strings(), b.wef.tag_strings());
}

#[test]
fn matching_listing_extensions_equal_trace() {
    let c = compiled_listing(13);
    assert_matches_interpreter(&c);
    let report = verify_x01(&c.wef, |x| has_pm(4, x).unwrap(), Exec::default()).unwrap();
    assert!(report.all_passed(), "{}", report.table());
}

#[test]
fn array_programs_compile_faithfully() {
    for src in [ARRAY1, ARRAY2] {
        assert_matches_interpreter(&compiled(src));
    }
}

#[test]
fn array_programs_compute_what_they_say() {
    let one = build(ARRAY1);
    let two = build(ARRAY2);
    for k in 0..16u64 {
        let x = bits_of(k, 4);
        // parity of x0..x2 folded with x2 again
        assert_eq!(interpret(&one, &x, 500).unwrap().w, x[0] ^ x[1], "{x:?}");
        // A is row-major: A[0][1] is bit 1, A[1][1] is bit 3
        assert_eq!(interpret(&two, &x, 500).unwrap().w, x[1] & x[3], "{x:?}");
    }
}

#[test]
fn prefix_systems_pin_the_trace() {
    let c = compiled_listing(13);
    for k in 0..64u64 {
        let x = bits_of(k, 6);
        let trace = interpret(&c.program, &x, 13).unwrap();
        let values: Vec<Rat> = x.iter().map(|&b| Rat::from_int(b as i64)).collect();
        for horizon in 0..=13 {
            let lp = fix_vars(&c.prefix_system(horizon), c.wef.x_vars.iter().copied().zip(&values)).unwrap();
            let vars = c.vars_up_to(horizon);
            let ranges = var_ranges(&lp, &vars).unwrap();
            for (v, r) in vars.iter().zip(&ranges) {
                let want = Rat::from_int(c.trace_value(&trace, *v) as i64);
                assert_eq!(r.point(), Some(&want), "input {k}, horizon {horizon}, {:?}", c.layout.var(*v));
            }
        }
    }
}

#[test]
fn selectors_mark_the_written_element() {
    let c = compiled(ARRAY1);
    let sym = &c.program.symbols;
    let mut seen = 0;
    for k in 0..16u64 {
        let x = bits_of(k, 4);
        let trace = interpret(&c.program, &x, c.layout.steps).unwrap();
        for t in 1..trace.halt_time {
            let Stmt::ArrWrite1 { index, .. } = c.program.line(trace.line_at_time(t)) else { continue };
            let m: usize = (0..sym.word).filter(|&bit| trace.memory[t - 1][sym.int_slot(*index, bit)]).map(|bit| 1 << bit).sum();
            let (base, count) = sym.row_select.expect("arrays present");
            for (j, slot) in (base..base + count).enumerate() {
                assert_eq!(trace.memory[t][slot], j != m, "input {k}, t={t}, j={j}");
            }
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn exactly_one_line_per_step() {
    let c = compiled_listing(13);
    for k in [0u64, 33, 63] {
        let x = bits_of(k, 6);
        let values = unique_extension(&c.wef, &x).unwrap();
        let trace = interpret(&c.program, &x, 13).unwrap();
        for t in 1..=13 {
            let on: Vec<usize> =
                (1..=c.layout.lines).filter(|&line| values[c.layout.id(Var::S { line, t }).index()]).collect();
            assert_eq!(on, vec![trace.line_at_time(t)]);
        }
    }
}
