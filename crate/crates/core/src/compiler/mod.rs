//! Pseudocode to LP compiler.
//!
//! Variables are `B(i,t)` for every memory slot and `t = 0..=p`, then
//! `S(i,t)` for every line and `t = 1..=p`. Rows are emitted as: initial
//! memory pins, the first-line pin, then for each time step the
//! one-line-per-step equality followed by each line's flow rows, update
//! rows and carry-over copies.

mod templates;

pub use templates::{
    check_controlled, gen_copies, gen_group, ControlCheck, GroupRows, TemplateRow, Var, ENUMERATION_LIMIT,
};

use std::collections::BTreeMap;

use wefc_lp::{LPSystem, LinConstraint, Rat, Sense, VarId};

use crate::exec::Exec;
use crate::pseudolang::{BasicProgram, Stmt};
use crate::wef::{Group, RowTag, WefSystem};

/// Documented slack factor of the size bound: rows ≤ K·p·q·W and
/// variables ≤ K·p·q.
pub const SIZE_FACTOR: usize = 64;

/// Refuse to build systems beyond this many variables.
const MAX_VARS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileParams {
    pub word: usize,
    pub steps: usize,
    /// Decision constant handed on to the driver.
    pub d: Rat,
}

impl CompileParams {
    /// Parameters matching the program's own word size, with d = 1/2.
    pub fn for_program(program: &BasicProgram, steps: usize) -> Self {
        CompileParams { word: program.symbols.word, steps, d: Rat::new(1, 2) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("step budget {steps} is below the line count {lines}")]
    TooFewSteps { steps: usize, lines: usize },
    #[error("program was laid out for {laid_out}-bit words, not {requested}")]
    WordMismatch { laid_out: usize, requested: usize },
    #[error("decision constant {0} outside (0, 1/2]")]
    BadD(Rat),
    #[error("{0} variables exceed the compiler's limit")]
    TooLarge(usize),
}

/// Bijection between symbolic variables and LP variable ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub slots: usize,
    pub lines: usize,
    pub steps: usize,
}

impl VarLayout {
    pub fn num_b(&self) -> usize {
        self.slots * (self.steps + 1)
    }

    pub fn num_vars(&self) -> usize {
        self.num_b() + self.lines * self.steps
    }

    pub fn id(&self, v: Var) -> VarId {
        match v {
            Var::B { slot, t } => {
                debug_assert!(slot < self.slots && t <= self.steps);
                VarId(t * self.slots + slot)
            }
            Var::S { line, t } => {
                debug_assert!((1..=self.lines).contains(&line) && (1..=self.steps).contains(&t));
                VarId(self.num_b() + (t - 1) * self.lines + (line - 1))
            }
        }
    }

    pub fn var(&self, id: VarId) -> Var {
        let k = id.index();
        if k < self.num_b() {
            Var::B { slot: k % self.slots, t: k / self.slots }
        } else {
            let k = k - self.num_b();
            Var::S { line: k % self.lines + 1, t: k / self.lines + 1 }
        }
    }
}

/// A compiled program: the WEF plus what is needed to interpret it.
#[derive(Debug, Clone)]
pub struct CompiledWef {
    pub wef: WefSystem,
    pub layout: VarLayout,
    pub params: CompileParams,
    pub program: BasicProgram,
}

fn to_constraint(layout: &VarLayout, row: &TemplateRow) -> LinConstraint {
    LinConstraint::le(row.terms.iter().map(|&(v, c)| (layout.id(v), Rat::from_int(c))), Rat::from_int(row.rhs))
        .expect("template rows are nonempty")
}

fn op_name(s: &crate::pseudolang::BasicStmt) -> &'static str {
    match s {
        Stmt::AssignConst { .. } => "const",
        Stmt::Copy { .. } => "copy",
        Stmt::Not { .. } => "not",
        Stmt::Xor { .. } => "xor",
        Stmt::And { .. } => "and",
        Stmt::Or { .. } => "or",
        Stmt::OrK { .. } => "or-k",
        Stmt::Inc { .. } => "inc",
        Stmt::EqTest { .. } => "eq",
        Stmt::ArrRead1 { .. } => "read",
        Stmt::ArrWrite1 { .. } => "write",
        Stmt::ArrRead2 { .. } => "read2",
        Stmt::ArrWrite2 { .. } => "write2",
        Stmt::Goto { .. } => "goto",
        Stmt::IfGoto { .. } => "if",
        Stmt::Return => "return",
    }
}

type TaggedRows = Vec<(RowTag, TemplateRow)>;

/// Rows of one time step in emission order.
fn step_rows(program: &BasicProgram, t: usize, steps: usize) -> TaggedRows {
    let mut out = Vec::new();
    for line in 1..=program.len() {
        let stmt = program.line(line);
        let rows = gen_group(stmt, line, t, t == steps, &program.symbols);
        let detail = format!("line {line} t={t} {}", op_name(stmt));
        for r in rows.flow {
            out.push((RowTag { group: Group::F, detail: detail.clone() }, r));
        }
        for r in rows.update {
            out.push((RowTag { group: Group::G, detail: detail.clone() }, r));
        }
        for r in gen_copies(program, line, t) {
            out.push((RowTag { group: Group::G, detail: format!("line {line} t={t} keep") }, r));
        }
    }
    out
}

pub fn compile(program: &BasicProgram, params: &CompileParams) -> Result<CompiledWef, CompileError> {
    compile_with(program, params, Exec::default())
}

/// Same as [`compile`]; `exec` decides whether time steps are generated in
/// parallel. Output is identical either way.
pub fn compile_with(program: &BasicProgram, params: &CompileParams, exec: Exec) -> Result<CompiledWef, CompileError> {
    let sym = &program.symbols;
    if params.word != sym.word {
        return Err(CompileError::WordMismatch { laid_out: sym.word, requested: params.word });
    }
    if params.steps < program.len() {
        return Err(CompileError::TooFewSteps { steps: params.steps, lines: program.len() });
    }
    if !params.d.is_positive() || params.d > Rat::new(1, 2) {
        return Err(CompileError::BadD(params.d.clone()));
    }
    let layout = VarLayout { slots: sym.num_slots(), lines: program.len(), steps: params.steps };
    if layout.num_vars() > MAX_VARS {
        return Err(CompileError::TooLarge(layout.num_vars()));
    }

    let mut lp = LPSystem::new();
    for k in 0..layout.num_vars() {
        let name = match layout.var(VarId(k)) {
            Var::B { slot, t } => sym.var_name(slot, t),
            Var::S { line, t } => format!("S({line},{t})"),
        };
        lp.add_var(name);
    }
    let mut tags = Vec::new();
    let mut add = |lp: &mut LPSystem, tag: RowTag, c: LinConstraint| {
        lp.add_constraint(c).expect("ids in range");
        tags.push(tag);
    };

    let initial = sym.initial_memory(&vec![false; sym.inputs.len()]);
    for slot in 0..layout.slots {
        if sym.is_input(slot) {
            continue;
        }
        let v = layout.id(Var::B { slot, t: 0 });
        let value = Rat::from_int(initial[slot] as i64);
        add(
            &mut lp,
            RowTag { group: Group::C, detail: sym.describe(slot) },
            LinConstraint::eq([(v, Rat::one())], value).expect("nonempty"),
        );
    }
    add(
        &mut lp,
        RowTag { group: Group::D, detail: String::new() },
        LinConstraint::eq([(layout.id(Var::S { line: 1, t: 1 }), Rat::one())], Rat::one()).expect("nonempty"),
    );

    let per_step: Vec<TaggedRows> = exec.map_range(params.steps, |k| step_rows(program, k + 1, params.steps));
    for (k, rows) in per_step.into_iter().enumerate() {
        let t = k + 1;
        let unique = (1..=layout.lines).map(|line| (layout.id(Var::S { line, t }), Rat::one()));
        add(
            &mut lp,
            RowTag { group: Group::E, detail: format!("t={t}") },
            LinConstraint::new(unique, Sense::Eq, Rat::one()).expect("nonempty"),
        );
        for (tag, row) in rows {
            add(&mut lp, tag, to_constraint(&layout, &row));
        }
    }

    let x_vars = sym.inputs.iter().map(|&slot| layout.id(Var::B { slot, t: 0 })).collect();
    let w_var = layout.id(Var::B { slot: sym.output, t: params.steps });
    Ok(CompiledWef {
        wef: WefSystem { lp, x_vars, w_var, tags },
        layout,
        params: params.clone(),
        program: program.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeReport {
    pub num_constraints: usize,
    pub num_vars: usize,
    pub steps: usize,
    pub slots: usize,
    pub word: usize,
    pub constraint_bound: usize,
    pub var_bound: usize,
    pub per_group: BTreeMap<Group, usize>,
}

impl SizeReport {
    pub fn within_bounds(&self) -> bool {
        self.num_constraints <= self.constraint_bound && self.num_vars <= self.var_bound
    }
}

/// Measures the compiled system against rows ≤ K·p·q·W, vars ≤ K·p·q.
pub fn stats_check(compiled: &CompiledWef) -> SizeReport {
    let stats = compiled.wef.stats();
    let (p, q, w) = (compiled.layout.steps, compiled.layout.slots, compiled.params.word);
    SizeReport {
        num_constraints: stats.num_constraints,
        num_vars: stats.num_vars,
        steps: p,
        slots: q,
        word: w,
        constraint_bound: SIZE_FACTOR * p * q * w,
        var_bound: SIZE_FACTOR * p * q,
        per_group: stats.per_group,
    }
}

impl CompiledWef {
    /// Rows whose variables all belong to times `<= horizon`, over the full
    /// variable set. Variables of later times are left unconstrained.
    pub fn prefix_system(&self, horizon: usize) -> LPSystem {
        let mut lp = self.wef.lp.clone();
        let layout = self.layout;
        lp.retain_constraints(|_, c| c.terms().iter().all(|(v, _)| layout.var(*v).time() <= horizon));
        lp
    }

    /// Variables with time `<= horizon`.
    pub fn vars_up_to(&self, horizon: usize) -> Vec<VarId> {
        (0..self.layout.num_vars()).map(VarId).filter(|&v| self.layout.var(v).time() <= horizon).collect()
    }

    /// The value the interpreter trace assigns to `v`.
    pub fn trace_value(&self, trace: &crate::pseudolang::Trace, v: VarId) -> bool {
        match self.layout.var(v) {
            Var::B { slot, t } => trace.memory[t][slot],
            Var::S { line, t } => trace.line_at_time(t) == line,
        }
    }

    /// Every flow and update template row of every (line, time), each
    /// checked with its controller at zero.
    pub fn template_audit(&self) -> Vec<ControlCheck> {
        let mut out = Vec::new();
        for t in 1..=self.layout.steps {
            for line in 1..=self.program.len() {
                let rows = gen_group(self.program.line(line), line, t, t == self.layout.steps, &self.program.symbols);
                let ctrl = Var::S { line, t };
                out.extend(rows.flow.iter().chain(&rows.update).map(|r| check_controlled(r, ctrl)));
                out.extend(gen_copies(&self.program, line, t).iter().map(|r| check_controlled(r, ctrl)));
            }
        }
        out
    }
}
