//! Per-(line, time) constraint templates over symbolic variables.
//!
//! A line executing at time `t` reads slot values `B(k,t-1)` and writes
//! `B(k,t)`. Every row carries the controller `S(i,t)` with coefficient +1
//! and a right-hand side shifted by one, so setting the controller to zero
//! leaves the row slack for every 0/1 value of the rest.

use std::collections::BTreeMap;

use crate::pseudolang::{BasicProgram, BasicStmt, Stmt, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Memory slot (0-based) after `t` steps.
    B { slot: usize, t: usize },
    /// Line (1-based) executing at time `t`.
    S { line: usize, t: usize },
}

impl Var {
    pub fn time(self) -> usize {
        match self {
            Var::B { t, .. } | Var::S { t, .. } => t,
        }
    }
}

/// `Σ coef·var <= rhs` over 0/1 variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRow {
    pub terms: Vec<(Var, i64)>,
    pub rhs: i64,
}

impl TemplateRow {
    pub fn coef(&self, v: Var) -> i64 {
        self.terms.iter().find(|(x, _)| *x == v).map_or(0, |(_, c)| *c)
    }

    /// Largest left-hand side over the 0/1 box, ignoring `skip`.
    fn max_lhs_without(&self, skip: Option<Var>) -> i64 {
        self.terms.iter().filter(|(v, _)| Some(*v) != skip).map(|(_, c)| (*c).max(0)).sum()
    }

    /// True when no 0/1 assignment can violate the row.
    pub fn is_vacuous(&self) -> bool {
        self.max_lhs_without(None) <= self.rhs
    }
}

/// A variable or a folded constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lit {
    Var(Var),
    Not(Var),
    Const(bool),
}

struct RowBuf {
    terms: BTreeMap<Var, i64>,
    rhs: i64,
}

impl RowBuf {
    fn new(rhs: i64) -> Self {
        RowBuf { terms: BTreeMap::new(), rhs }
    }

    fn add(mut self, lit: Lit, c: i64) -> Self {
        match lit {
            Lit::Var(v) => *self.terms.entry(v).or_insert(0) += c,
            // c·(1 - v)
            Lit::Not(v) => {
                *self.terms.entry(v).or_insert(0) -= c;
                self.rhs -= c;
            }
            Lit::Const(b) => self.rhs -= c * b as i64,
        }
        self
    }

    fn finish(self) -> TemplateRow {
        TemplateRow { terms: self.terms.into_iter().filter(|(_, c)| *c != 0).collect(), rhs: self.rhs }
    }
}

/// Collects controlled rows for one (line, time), dropping rows that
/// constant folding made vacuous.
struct Rows {
    ctrl: Var,
    out: Vec<TemplateRow>,
}

impl Rows {
    /// `ctrl + Σ c·lit <= rhs + 1`.
    fn push(&mut self, terms: &[(Lit, i64)], rhs: i64) {
        let mut b = RowBuf::new(rhs + 1).add(Lit::Var(self.ctrl), 1);
        for &(l, c) in terms {
            b = b.add(l, c);
        }
        let row = b.finish();
        if !row.is_vacuous() {
            self.out.push(row);
        }
    }

    fn copy(&mut self, src: Lit, dst: Lit) {
        self.push(&[(src, 1), (dst, -1)], 0);
        self.push(&[(src, -1), (dst, 1)], 0);
    }

    fn not(&mut self, src: Lit, dst: Lit) {
        self.push(&[(src, 1), (dst, 1)], 1);
        self.push(&[(src, -1), (dst, -1)], -1);
    }

    fn xor(&mut self, q: Lit, r: Lit, s: Lit) {
        self.push(&[(q, 1), (r, -1), (s, -1)], 0);
        self.push(&[(q, -1), (r, -1), (s, 1)], 0);
        self.push(&[(q, -1), (r, 1), (s, -1)], 0);
        self.push(&[(q, 1), (r, 1), (s, 1)], 2);
    }

    fn and(&mut self, q: Lit, r: Lit, s: Lit) {
        self.push(&[(q, -1), (s, 1)], 0);
        self.push(&[(r, -1), (s, 1)], 0);
        self.push(&[(q, 1), (r, 1), (s, -1)], 1);
    }

    fn or_k(&mut self, srcs: &[Lit], s: Lit) {
        for &q in srcs {
            self.push(&[(q, 1), (s, -1)], 0);
        }
        let mut all: Vec<(Lit, i64)> = srcs.iter().map(|&q| (q, -1)).collect();
        all.push((s, 1));
        self.push(&all, 0);
    }

    fn const_assign(&mut self, dst: Lit, value: bool) {
        if value {
            self.push(&[(dst, -1)], -1);
        } else {
            self.push(&[(dst, 1)], 0);
        }
    }

    /// `sel(j) = 0` iff the integer at `index` (bits at `t-1`) equals `j`:
    /// an OR over the bits where the index differs from `j`.
    fn selector(&mut self, sym: &SymbolTable, index: usize, count: usize, sel_base: usize, t: usize) {
        for j in 0..count {
            let diff: Vec<Lit> = (0..sym.word)
                .map(|k| {
                    let v = Var::B { slot: sym.int_slot(index, k), t: t - 1 };
                    if j >> k & 1 == 1 {
                        Lit::Not(v)
                    } else {
                        Lit::Var(v)
                    }
                })
                .collect();
            self.or_k(&diff, Lit::Var(Var::B { slot: sel_base + j, t }));
        }
    }
}

/// Rows of one line at one time, split by constraint group.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupRows {
    /// Control flow, present only when a next time step exists.
    pub flow: Vec<TemplateRow>,
    /// Memory update rows of the statement itself, without carry-over copies.
    pub update: Vec<TemplateRow>,
}

/// Flow and update rows for `stmt` as line `line` executing at time `t`.
/// `last_step` suppresses the flow rows, which mention time `t+1`.
pub fn gen_group(stmt: &BasicStmt, line: usize, t: usize, last_step: bool, sym: &SymbolTable) -> GroupRows {
    assert!(t >= 1, "time starts at 1");
    let ctrl = Var::S { line, t };
    let prev = |slot: usize| Lit::Var(Var::B { slot, t: t - 1 });
    let next = |slot: usize| Lit::Var(Var::B { slot, t });

    let mut flow = Rows { ctrl, out: Vec::new() };
    if !last_step {
        let at = |l: usize| Lit::Var(Var::S { line: l, t: t + 1 });
        match stmt {
            Stmt::Goto { target } => flow.push(&[(at(*target), -1)], -1),
            Stmt::Return => flow.push(&[(at(line), -1)], -1),
            Stmt::IfGoto { cond, target } => {
                flow.push(&[(prev(*cond), 1), (at(*target), -1)], 0);
                flow.push(&[(prev(*cond), -1), (at(line + 1), -1)], -1);
            }
            _ => flow.push(&[(at(line + 1), -1)], -1),
        }
    }

    let mut up = Rows { ctrl, out: Vec::new() };
    match stmt {
        Stmt::AssignConst { target, value } => up.const_assign(next(*target), *value),
        Stmt::Copy { target, src } => up.copy(prev(*src), next(*target)),
        Stmt::Not { target, src } => up.not(prev(*src), next(*target)),
        Stmt::Xor { target, a, b } => up.xor(prev(*a), prev(*b), next(*target)),
        Stmt::And { target, a, b } => up.and(prev(*a), prev(*b), next(*target)),
        Stmt::Or { target, a, b } => up.or_k(&[prev(*a), prev(*b)], next(*target)),
        Stmt::OrK { target, srcs } => {
            let srcs: Vec<Lit> = srcs.iter().map(|s| prev(*s)).collect();
            up.or_k(&srcs, next(*target));
        }
        Stmt::Inc { int } => {
            let carry = sym.carry.expect("carry allocated");
            let mut c = Lit::Const(true);
            for j in 0..sym.word {
                let q = sym.int_slot(*int, j);
                up.xor(prev(q), c, next(q));
                up.and(prev(q), c, next(carry + j));
                c = next(carry + j);
            }
        }
        Stmt::EqTest { target, a, b } => {
            let e = sym.eq_scratch.expect("scratch allocated");
            for j in 0..sym.word {
                up.xor(prev(sym.int_slot(*a, j)), prev(sym.int_slot(*b, j)), next(e + j));
            }
            for j in 0..sym.word {
                up.push(&[(next(e + j), 1), (next(*target), 1)], 1);
            }
            let mut all: Vec<(Lit, i64)> = (0..sym.word).map(|j| (next(e + j), -1)).collect();
            all.push((next(*target), -1));
            up.push(&all, -1);
        }
        Stmt::ArrRead1 { target, array, index } => {
            let a = &sym.arrays[*array];
            let (m, _) = sym.row_select.expect("selectors allocated");
            up.selector(sym, *index, a.rows, m, t);
            for j in 0..a.rows {
                let sel = next(m + j);
                up.push(&[(next(*target), 1), (prev(a.base + j), -1), (sel, -1)], 0);
                up.push(&[(next(*target), -1), (prev(a.base + j), 1), (sel, -1)], 0);
            }
        }
        Stmt::ArrWrite1 { array, index, src } => {
            let a = &sym.arrays[*array];
            let (m, _) = sym.row_select.expect("selectors allocated");
            up.selector(sym, *index, a.rows, m, t);
            for j in 0..a.rows {
                let (sel, cell) = (next(m + j), a.base + j);
                up.push(&[(prev(*src), 1), (next(cell), -1), (sel, -1)], 0);
                up.push(&[(prev(*src), -1), (next(cell), 1), (sel, -1)], 0);
                up.push(&[(prev(cell), 1), (next(cell), -1), (sel, 1)], 1);
                up.push(&[(prev(cell), -1), (next(cell), 1), (sel, 1)], 1);
            }
        }
        Stmt::ArrRead2 { target, array, row, col } => {
            let a = &sym.arrays[*array];
            let cols = a.cols.expect("2-D array");
            let (m, _) = sym.row_select.expect("selectors allocated");
            let (n, _) = sym.col_select.expect("selectors allocated");
            up.selector(sym, *row, a.rows, m, t);
            up.selector(sym, *col, cols, n, t);
            for j1 in 0..a.rows {
                for j2 in 0..cols {
                    let cell = prev(a.base + j1 * cols + j2);
                    let (ms, ns) = (next(m + j1), next(n + j2));
                    up.push(&[(next(*target), 1), (cell, -1), (ms, -1), (ns, -1)], 0);
                    up.push(&[(next(*target), -1), (cell, 1), (ms, -1), (ns, -1)], 0);
                }
            }
        }
        Stmt::ArrWrite2 { array, row, col, src } => {
            let a = &sym.arrays[*array];
            let cols = a.cols.expect("2-D array");
            let (m, _) = sym.row_select.expect("selectors allocated");
            let (n, _) = sym.col_select.expect("selectors allocated");
            up.selector(sym, *row, a.rows, m, t);
            up.selector(sym, *col, cols, n, t);
            for j1 in 0..a.rows {
                for j2 in 0..cols {
                    let cell = a.base + j1 * cols + j2;
                    let (ms, ns) = (next(m + j1), next(n + j2));
                    up.push(&[(prev(*src), 1), (next(cell), -1), (ms, -1), (ns, -1)], 0);
                    up.push(&[(prev(*src), -1), (next(cell), 1), (ms, -1), (ns, -1)], 0);
                    up.push(&[(prev(cell), 1), (next(cell), -1), (ms, 1)], 1);
                    up.push(&[(prev(cell), -1), (next(cell), 1), (ms, 1)], 1);
                    up.push(&[(prev(cell), 1), (next(cell), -1), (ns, 1)], 1);
                    up.push(&[(prev(cell), -1), (next(cell), 1), (ns, 1)], 1);
                }
            }
        }
        Stmt::Goto { .. } | Stmt::IfGoto { .. } | Stmt::Return => {}
    }
    GroupRows { flow: flow.out, update: up.out }
}

/// Carry-over rows for every slot line `line` does not write.
pub fn gen_copies(program: &BasicProgram, line: usize, t: usize) -> Vec<TemplateRow> {
    let writes = program.writes(line);
    let mut rows = Rows { ctrl: Var::S { line, t }, out: Vec::new() };
    for slot in 0..program.symbols.num_slots() {
        if writes.binary_search(&slot).is_err() {
            rows.copy(Lit::Var(Var::B { slot, t: t - 1 }), Lit::Var(Var::B { slot, t }));
        }
    }
    rows.out
}

/// Outcome of checking one row with its controller at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlCheck {
    pub row: TemplateRow,
    /// Every 0/1 assignment of the other variables satisfies the row.
    pub slack_when_off: bool,
    /// Whether the verdict came from full enumeration.
    pub enumerated: bool,
}

/// Rows with more free variables than this are checked by the closed form
/// (sum of positive coefficients) instead of enumeration.
pub const ENUMERATION_LIMIT: usize = 20;

/// Sets `controller` to zero and tests the row against every 0/1
/// assignment of its remaining variables.
pub fn check_controlled(row: &TemplateRow, controller: Var) -> ControlCheck {
    let others: Vec<i64> = row.terms.iter().filter(|(v, _)| *v != controller).map(|(_, c)| *c).collect();
    let closed_form = row.max_lhs_without(Some(controller)) <= row.rhs;
    if others.len() > ENUMERATION_LIMIT {
        return ControlCheck { row: row.clone(), slack_when_off: closed_form, enumerated: false };
    }
    let all = (0u64..1 << others.len()).all(|mask| {
        let lhs: i64 = others.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, c)| c).sum();
        lhs <= row.rhs
    });
    debug_assert_eq!(all, closed_form);
    ControlCheck { row: row.clone(), slack_when_off: all, enumerated: true }
}
