//! `wefc`: compile circuits and pseudocode into LPs, decide instances,
//! verify the x-0/1 property and run the polytope labs.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wefc_core::circuit::{encode, parse_circuit, Circuit};
use wefc_core::compiler::{compile_with, stats_check, CompileParams};
use wefc_core::driver::{bits_of, bitstring, decide_with, find_safe_d, verify_x01};
use wefc_core::exec::{configure_threads, Exec};
use wefc_core::matching::{check_appendix_facets, check_ep_face, check_odd_set, check_prop2, has_pm, num_edges};
use wefc_core::pseudolang::{desugar, interpret, parse, BasicProgram};
use wefc_core::sandwich::{
    build_m, check_slack, decide_over_sandwiched, inner_system, outer_system, search_small_factorization, to_csv,
    CharacteristicSandwich, Language, Sandwiched,
};
use wefc_core::wef::WefSystem;
use wefc_lp::{to_lp_text, Rat, RationalStyle, Sense};

#[derive(Parser)]
#[command(name = "wefc", version, about = "Weak extended formulations from circuits and pseudocode")]
struct Cli {
    /// Worker threads for exhaustive checks; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a `.psc` program or a `.circuit` file into a WEF.
    Compile(CompileArgs),
    /// Decide one input by optimizing over a compiled WEF.
    Decide(DecideArgs),
    /// Check the x-0/1 property of a WEF against an oracle on every input.
    Verify(VerifyArgs),
    /// Matching-polytope and sandwich laboratories.
    Lab {
        #[command(subcommand)]
        lab: Lab,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// CPLEX-style LP text next to the WEF file.
    Lp,
    /// Only the JSON WEF file.
    Dump,
    /// Print every row with its tag.
    Table,
}

#[derive(Args)]
struct CompileArgs {
    source: PathBuf,
    /// Time steps p; required for pseudocode.
    #[arg(long)]
    steps: Option<usize>,
    /// Word size W; defaults to the program's own.
    #[arg(long = "word-size")]
    word_size: Option<usize>,
    /// Decision constant recorded with the build, as `p/q`.
    #[arg(long, default_value = "1/2")]
    d: String,
    #[arg(long, value_enum, default_value = "dump")]
    format: Format,
    /// WEF output path; defaults to `<source stem>.wef.json`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    wef: PathBuf,
    /// Input bits, first variable first.
    input: String,
    #[arg(long, default_value = "1/2")]
    d: String,
    /// Range every variable over the optimal face and report uniqueness.
    #[arg(long)]
    certify: bool,
}

#[derive(Args)]
struct VerifyArgs {
    wef: PathBuf,
    /// `.psc` (interpreted), `.circuit` (evaluated) or `matching:N` (brute force).
    #[arg(long)]
    oracle: String,
    /// Interpreter step budget for `.psc` oracles.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Word size used when desugaring a `.psc` oracle.
    #[arg(long = "word-size")]
    word_size: Option<usize>,
    /// Also search for a decision constant with unique integral no-instance optima.
    #[arg(long)]
    safe_d: bool,
}

#[derive(Subcommand)]
enum Lab {
    /// Checks on PM_n by vertex enumeration.
    Matching {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_enum, default_value = "all")]
        check: MatchingCheck,
        #[arg(long, default_value = "1/2")]
        d: String,
    },
    /// The characteristic sandwich of a language slice.
    Sandwich {
        #[arg(long)]
        n: usize,
        /// Members as comma-separated bit strings (bit 1 first); empty for the empty language.
        #[arg(long, default_value = "", conflicts_with = "program")]
        lang: String,
        /// Membership program instead of a list; its compiled WEF is decided over too.
        #[arg(long)]
        program: Option<PathBuf>,
        /// Step budget for `--program`.
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value = "1/3")]
        d: String,
        /// Write the slack matrix as exact CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatchingCheck {
    All,
    Face,
    Prop2,
    OddSet,
    Appendix,
}

/// Parses `p/q` or an integer; decimals are refused so d stays exact.
fn parse_d(text: &str, strict_half: bool) -> Result<Rat> {
    if text.contains('.') {
        bail!("d must be written as p/q, not `{text}`");
    }
    let d: Rat = text.parse().map_err(|_| anyhow!("cannot parse d = `{text}`"))?;
    let half = Rat::new(1, 2);
    let ok = d.is_positive() && if strict_half { d < half } else { d <= half };
    if !ok {
        bail!("d = {d} outside {}", if strict_half { "(0, 1/2)" } else { "(0, 1/2]" });
    }
    Ok(d)
}

fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(anyhow!("`{other}` is not a bit")),
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn is_circuit(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "circuit")
}

fn load_program(path: &Path, word: Option<usize>) -> Result<BasicProgram> {
    let program = parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    Ok(desugar(&program, word).with_context(|| format!("desugaring {}", path.display()))?)
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    parse_circuit(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_wef(path: &Path) -> Result<WefSystem> {
    WefSystem::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn cmd_compile(args: &CompileArgs, exec: Exec) -> Result<ExitCode> {
    let d = parse_d(&args.d, false)?;
    let (wef, bound_ok, summary) = if is_circuit(&args.source) {
        let circuit = load_circuit(&args.source)?;
        let wef = encode(&circuit);
        let t = circuit.gates().len();
        let stats = wef.stats();
        let ok = stats.num_constraints == 4 * t && stats.num_vars == circuit.num_inputs() + t;
        let summary = format!("{t} gates: {} inequalities (4t = {}) in {} variables", stats.num_constraints, 4 * t, stats.num_vars);
        (wef, ok, summary)
    } else {
        let program = load_program(&args.source, args.word_size)?;
        let steps = args.steps.ok_or_else(|| anyhow!("--steps is required for pseudocode"))?;
        let params = CompileParams { word: program.symbols.word, steps, d };
        let compiled = compile_with(&program, &params, exec)?;
        let report = stats_check(&compiled);
        let summary = format!(
            "W={} p={} q={}: {} constraints (bound {}), {} variables (bound {})",
            report.word,
            report.steps,
            report.slots,
            report.num_constraints,
            report.constraint_bound,
            report.num_vars,
            report.var_bound
        );
        (compiled.wef, report.within_bounds(), summary)
    };
    let out = args.out.clone().unwrap_or_else(|| args.source.with_extension("wef.json"));
    fs::write(&out, wef.to_json()).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {}", out.display());
    match args.format {
        Format::Lp => {
            let lp_path = out.with_extension("").with_extension("lp");
            let text = to_lp_text(&wef.lp, None, Some(&wef.tag_strings()), RationalStyle::Fraction);
            fs::write(&lp_path, text).with_context(|| format!("writing {}", lp_path.display()))?;
            println!("wrote {}", lp_path.display());
        }
        Format::Table => {
            let names = wef.lp.names();
            for (tag, row) in wef.tags.iter().zip(wef.lp.constraints()) {
                let terms: Vec<String> = row.terms().iter().map(|(v, c)| format!("{c}*{}", names[v.index()])).collect();
                let sense = match row.sense {
                    Sense::Le => "<=",
                    Sense::Eq => "=",
                    Sense::Ge => ">=",
                };
                println!("{tag:<28} {} {sense} {}", terms.join(" + "), row.rhs);
            }
        }
        Format::Dump => {}
    }
    println!("{summary}");
    for (group, count) in wef.stats().per_group {
        println!("  {group:<5} {count}");
    }
    println!("size bound: {}", if bound_ok { "ok" } else { "VIOLATED" });
    Ok(if bound_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_decide(args: &DecideArgs) -> Result<ExitCode> {
    let wef = load_wef(&args.wef)?;
    let x = parse_bits(&args.input)?;
    let d = parse_d(&args.d, false)?;
    let verdict = decide_with(&wef, &x, &d, args.certify)?;
    println!("{verdict}");
    Ok(ExitCode::SUCCESS)
}

type Oracle = Box<dyn Fn(&[bool]) -> bool + Send + Sync>;

fn load_oracle(spec: &str, steps: usize, word: Option<usize>) -> Result<Oracle> {
    if let Some(n) = spec.strip_prefix("matching:") {
        let n: usize = n.parse().with_context(|| format!("bad node count in `{spec}`"))?;
        if n > 8 {
            bail!("matching oracle supports at most 8 nodes");
        }
        return Ok(Box::new(move |x| has_pm(n, x).unwrap_or(false)));
    }
    let path = Path::new(spec);
    if is_circuit(path) {
        let circuit = load_circuit(path)?;
        return Ok(Box::new(move |x| circuit.eval(x).map(|e| e.w).unwrap_or(false)));
    }
    let program = load_program(path, word)?;
    Ok(Box::new(move |x| interpret(&program, x, steps).map(|t| t.w).unwrap_or(false)))
}

fn cmd_verify(args: &VerifyArgs, exec: Exec) -> Result<ExitCode> {
    let wef = load_wef(&args.wef)?;
    let oracle = load_oracle(&args.oracle, args.steps, args.word_size)?;
    let report = verify_x01(&wef, |x| oracle(x), exec)?;
    print!("{}", report.table());
    println!("x-0/1: {}/{} inputs pass", report.passed(), report.cases.len());
    let mut ok = report.all_passed();
    if args.safe_d {
        match find_safe_d(&wef, exec) {
            Ok(safe) => println!(
                "safe d = {} (min gap {}, {} no-instances, {} halvings)",
                safe.d,
                safe.min_gap.map_or("none".to_string(), |g| g.to_string()),
                safe.no_instances,
                safe.halvings
            ),
            Err(e) => {
                println!("safe d: {e}");
                ok = false;
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn lab_matching(n: usize, check: MatchingCheck, d: &str, exec: Exec) -> Result<ExitCode> {
    if n % 2 == 1 || !(2..=8).contains(&n) {
        bail!("n must be even and between 2 and 8");
    }
    let d = parse_d(d, false)?;
    let want = |c| check == MatchingCheck::All || check == c;
    let mut ok = true;
    let mut line = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    if want(MatchingCheck::Face) {
        let r = check_ep_face(n, exec);
        line("perfect-matching face", r.passed(), format!("{} tight of {} vertices", r.tight, r.vertices));
    }
    if want(MatchingCheck::Prop2) {
        let edges = num_edges(n);
        let graphs: Vec<u64> = if edges <= 10 { (0..1u64 << edges).collect() } else { (0..64).map(|k| k * 7919 % (1 << edges)).collect() };
        let mut failures = 0;
        for &g in &graphs {
            let x: Vec<bool> = (0..edges).map(|b| g >> b & 1 == 1).collect();
            if !check_prop2(n, &x, &d, exec)?.passed() {
                failures += 1;
            }
        }
        line("optimum over PM_n", failures == 0, format!("{}/{} objectives", graphs.len() - failures, graphs.len()));
    }
    if want(MatchingCheck::OddSet) {
        let r = check_odd_set(n, exec);
        line("odd-set description", r.passed(), format!("{} odd sets, {} feasible 0/1 points", r.odd_sets, r.feasible_points));
    }
    if want(MatchingCheck::Appendix) && n >= 4 {
        let r = check_appendix_facets(n, exec);
        line("appendix facets", r.passed(), format!("{}x{} matrix, determinant {}", r.matrix_size, r.matrix_size, r.determinant));
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

struct SandwichArgs<'a> {
    n: usize,
    lang: &'a str,
    program: Option<&'a Path>,
    steps: usize,
    d: &'a str,
    csv: Option<&'a Path>,
}

fn lab_sandwich(args: SandwichArgs, exec: Exec) -> Result<ExitCode> {
    let n = args.n;
    let d = parse_d(args.d, true)?;
    let mut systems = Vec::new();
    let lang = match args.program {
        Some(path) => {
            let program = load_program(path, None)?;
            if program.symbols.inputs.len() != n {
                bail!("{} has {} inputs, not {n}", path.display(), program.symbols.inputs.len());
            }
            let mut halt = program.len();
            for k in 0..1u64 << n {
                halt = halt.max(interpret(&program, &bits_of(k, n), args.steps)?.halt_time);
            }
            let lang = Language::from_predicate(n, |x| interpret(&program, x, args.steps).map(|t| t.w).unwrap_or(false))?;
            let compiled = compile_with(&program, &CompileParams::for_program(&program, halt), exec)?;
            systems.push(("compiled WEF", Sandwiched::from(&compiled.wef)));
            lang
        }
        None => {
            let members: Vec<&str> = args.lang.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            Language::from_strings(n, &members)?
        }
    };
    let m = build_m(&lang, &d, exec)?;
    let width = m.iter().flatten().map(|v| v.to_string().len()).max().unwrap_or(1).max(n);
    let labels: Vec<String> = (0..lang.size()).map(|k| bitstring(&bits_of(k as u64, n))).collect();
    println!("M(L({n})) with d = {d}, rows a, columns b:");
    print!("{:>n$} ", "");
    labels.iter().for_each(|l| print!(" {l:>width$}"));
    println!();
    // members are starred
    for (k, (label, row)) in labels.iter().zip(&m).enumerate() {
        print!("{label:>n$}{}", if lang.contains(k) { "*" } else { " " });
        row.iter().for_each(|v| print!(" {:>width$}", v.to_string()));
        println!();
    }
    let slack = check_slack(&lang, &d, exec)?;
    let mut ok = slack.passed();
    println!("slack equals M: {}/{} entries", slack.entries - slack.mismatches.len(), slack.entries);
    let sw = CharacteristicSandwich::new(&lang, &d)?;
    systems.insert(0, ("H", outer_system(&sw)));
    systems.insert(0, ("conv(V)", inner_system(&sw)));
    for (name, p) in &systems {
        let mut agree = 0;
        for k in 0..lang.size() {
            let (yes, _) = decide_over_sandwiched(p, &bits_of(k as u64, n), &d)?;
            agree += usize::from(yes == lang.contains(k));
        }
        ok &= agree == lang.size();
        println!("decisions over {name}: {agree}/{} agree with membership", lang.size());
    }
    let search = search_small_factorization(&m);
    println!(
        "rank {} of {}; {}",
        search.rank,
        search.trivial_dim,
        match &search.found {
            Some((t, _)) => format!("found a factorization of inner dimension {}", t.first().map_or(0, Vec::len)),
            None if search.rank == search.trivial_dim => "full rank, only the identity factorization".to_string(),
            None => format!("no factorization through {} rows of M", search.rank),
        }
    );
    if let Some(path) = args.csv {
        fs::write(path, to_csv(&m, n)).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let exec = match cli.threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Exec::Sequential,
        Some(n) => {
            configure_threads(n).map_err(|e| anyhow!(e))?;
            Exec::Parallel
        }
        None => Exec::default(),
    };
    match &cli.command {
        Command::Compile(args) => cmd_compile(args, exec),
        Command::Decide(args) => cmd_decide(args),
        Command::Verify(args) => cmd_verify(args, exec),
        Command::Lab { lab: Lab::Matching { n, check, d } } => lab_matching(*n, *check, d, exec),
        Command::Lab { lab: Lab::Sandwich { n, lang, program, steps, d, csv } } => lab_sandwich(
            SandwichArgs { n: *n, lang, program: program.as_deref(), steps: *steps, d, csv: csv.as_deref() },
            exec,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
