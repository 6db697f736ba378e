use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wefc_core::circuit::{encode, pm4_circuit};
use wefc_core::compiler::{compile_with, CompileParams};
use wefc_core::driver::verify_x01;
use wefc_core::exec::Exec;
use wefc_core::matching::{check_ep_face, has_pm};
use wefc_core::pseudolang::{desugar, parse};
use wefc_core::sandwich::{build_m, Language};
use wefc_lp::Rat;

const MATCHING4: &str = include_str!("../data/matching4.psc");
const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn x01(c: &mut Criterion) {
    let circuit = encode(&pm4_circuit());
    let program = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
    let listing = compile_with(&program, &CompileParams::for_program(&program, 13), Exec::Sequential).unwrap();
    let oracle = |x: &[bool]| has_pm(4, x).unwrap();
    let mut g = c.benchmark_group("verify_x01");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("pm4_circuit", name), &exec, |b, &exec| {
            b.iter(|| verify_x01(&circuit, oracle, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("matching_listing", name), &exec, |b, &exec| {
            b.iter(|| verify_x01(&listing.wef, oracle, exec).unwrap())
        });
    }
    g.finish();
}

fn builds(c: &mut Criterion) {
    let program = desugar(&parse(MATCHING4).unwrap(), None).unwrap();
    let params = CompileParams::for_program(&program, 52);
    let lang = Language::from_predicate(8, |x| x.iter().filter(|b| **b).count() % 3 == 0).unwrap();
    let d = Rat::new(1, 3);
    let mut g = c.benchmark_group("builds");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("compile_p52", name), &exec, |b, &exec| {
            b.iter(|| compile_with(&program, &params, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("slack_matrix_n8", name), &exec, |b, &exec| {
            b.iter(|| build_m(&lang, &d, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("ep_face_n6", name), &exec, |b, &exec| b.iter(|| check_ep_face(6, exec)));
    }
    g.finish();
}

criterion_group!(benches, x01, builds);
criterion_main!(benches);
