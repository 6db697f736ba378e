//! The register-machine pseudocode: parser, desugarer, memory layout and
//! reference interpreter.
//!
//! Memory is a flat vector of bit slots. Every declared bit, integer bit and
//! array element owns one slot, as do the scratch slots that integer
//! increment, equality tests and array indexing need. The compiler uses the
//! same layout, so interpreter snapshots line up slot-for-slot with the LP
//! variables.

mod desugar;
mod interp;
mod parse;

pub use desugar::desugar;
pub use interp::{interpret, Trace};
pub use parse::parse;

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Semantic { pos: Pos, msg: String },
    #[error("expected {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("no return reached within {0} steps")]
    NonTermination(usize),
    #[error("line {line} at step {step}: index {index} out of range for `{array}`")]
    IndexOutOfRange { line: usize, step: usize, array: String, index: u64 },
    #[error("line {line} at step {step} wrote slot {slot} outside its write set")]
    StrayWrite { line: usize, step: usize, slot: usize },
}

/// A statement over names (surface) or over resolved ids (basic).
///
/// In a [`BasicProgram`], `B` is a slot index, `I` an integer id, `A` an
/// array id and `L` a 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "op")]
pub enum Stmt<B, I, A, L> {
    AssignConst { target: B, value: bool },
    Copy { target: B, src: B },
    Not { target: B, src: B },
    Xor { target: B, a: B, b: B },
    And { target: B, a: B, b: B },
    Or { target: B, a: B, b: B },
    OrK { target: B, srcs: Vec<B> },
    Inc { int: I },
    EqTest { target: B, a: I, b: I },
    ArrRead1 { target: B, array: A, index: I },
    ArrWrite1 { array: A, index: I, src: B },
    ArrRead2 { target: B, array: A, row: I, col: I },
    ArrWrite2 { array: A, row: I, col: I, src: B },
    Goto { target: L },
    IfGoto { cond: B, target: L },
    Return,
}

pub type SurfaceStmt = Stmt<String, String, String, String>;
pub type BasicStmt = Stmt<usize, usize, usize, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DeclKind {
    Bit,
    Int { init: u64 },
    /// Elements `0..=max`.
    Array1 { max: usize },
    /// Elements `[0..=rows_max][0..=cols_max]`, row-major.
    Array2 { rows_max: usize, cols_max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decl {
    pub name: String,
    pub kind: DeclKind,
    pub input: bool,
    pub output: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ItemKind {
    Stmt(SurfaceStmt),
    /// `sym R[m][c] = x`: writes both `R[m][c]` and `R[c][m]`.
    SymWrite2 { array: String, row: String, col: String, src: String },
    While { cond: String, negated: bool, body: Vec<Item> },
    /// `for var in 0..end`, end exclusive.
    For { var: String, end: u64, body: Vec<Item> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Item {
    pub label: Option<String>,
    pub pos: Pos,
    pub kind: ItemKind,
}

/// Parsed source: declarations plus a body that may contain loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Program {
    pub word: Option<usize>,
    pub decls: Vec<Decl>,
    pub body: Vec<Item>,
}

impl Program {
    /// Machine-readable AST dump.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("AST serializes")
    }

    /// Number of statements, counting loop bodies.
    pub fn statement_count(&self) -> usize {
        fn count(items: &[Item]) -> usize {
            items
                .iter()
                .map(|i| match &i.kind {
                    ItemKind::While { body, .. } | ItemKind::For { body, .. } => count(body),
                    _ => 1,
                })
                .sum()
        }
        count(&self.body)
    }
}

/// What a memory slot holds; decides its LP variable name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotRole {
    Bit { name: String },
    IntBit { int: usize, bit: usize },
    ArrayElem { array: usize, offset: usize },
    EqScratch { bit: usize },
    RowSelect { index: usize },
    ColSelect { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntVar {
    pub name: String,
    /// Slots `base..base+W`, least significant bit first.
    pub base: usize,
    pub init: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayVar {
    pub name: String,
    pub base: usize,
    pub rows: usize,
    /// Column count for two-dimensional arrays.
    pub cols: Option<usize>,
    pub input: bool,
}

impl ArrayVar {
    pub fn len(&self) -> usize {
        self.rows * self.cols.unwrap_or(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Memory layout of a desugared program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    pub word: usize,
    pub slots: Vec<SlotRole>,
    pub ints: Vec<IntVar>,
    pub arrays: Vec<ArrayVar>,
    /// Input slots in input-vector order.
    pub inputs: Vec<usize>,
    pub output: usize,
    /// Integer holding increment carries, if any increment occurs.
    pub carry: Option<usize>,
    /// `W` slots for equality-test XOR bits.
    pub eq_scratch: Option<usize>,
    /// Row selectors `M(0..)` and column selectors `N(0..)`: (base, count).
    pub row_select: Option<(usize, usize)>,
    pub col_select: Option<(usize, usize)>,
}

impl SymbolTable {
    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn int_slot(&self, int: usize, bit: usize) -> usize {
        debug_assert!(bit < self.word);
        self.ints[int].base + bit
    }

    pub fn int_slots(&self, int: usize) -> std::ops::Range<usize> {
        let b = self.ints[int].base;
        b..b + self.word
    }

    pub fn is_input(&self, slot: usize) -> bool {
        self.inputs.contains(&slot)
    }

    /// Value of every slot before the first step, with inputs applied.
    pub fn initial_memory(&self, input: &[bool]) -> Vec<bool> {
        let mut mem = vec![false; self.num_slots()];
        for iv in &self.ints {
            for b in 0..self.word {
                mem[iv.base + b] = iv.init >> b & 1 == 1;
            }
        }
        for (slot, v) in self.inputs.iter().zip(input) {
            mem[*slot] = *v;
        }
        mem
    }

    /// Debug name of a slot at time `t`, following `B(i,t)`, `I(i,j,t)`,
    /// `M(j,t)` and `N(j,t)`; `i` and `j` are 1-based, selectors 0-based.
    pub fn var_name(&self, slot: usize, t: usize) -> String {
        match &self.slots[slot] {
            SlotRole::IntBit { int, bit } => format!("I({},{},{t})", int + 1, bit + 1),
            SlotRole::RowSelect { index } => format!("M({index},{t})"),
            SlotRole::ColSelect { index } => format!("N({index},{t})"),
            _ => format!("B({},{t})", slot + 1),
        }
    }

    /// Human-readable slot description.
    pub fn describe(&self, slot: usize) -> String {
        match &self.slots[slot] {
            SlotRole::Bit { name } => name.clone(),
            SlotRole::IntBit { int, bit } => format!("{}.bit{}", self.ints[*int].name, bit + 1),
            SlotRole::ArrayElem { array, offset } => {
                let a = &self.arrays[*array];
                match a.cols {
                    Some(c) => format!("{}[{}][{}]", a.name, offset / c, offset % c),
                    None => format!("{}[{offset}]", a.name),
                }
            }
            SlotRole::EqScratch { bit } => format!("eq.bit{}", bit + 1),
            SlotRole::RowSelect { index } => format!("M({index})"),
            SlotRole::ColSelect { index } => format!("N({index})"),
        }
    }
}

/// Label-resolved, loop-free program with lines numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicProgram {
    pub symbols: SymbolTable,
    pub stmts: Vec<BasicStmt>,
    /// Source position each line came from, when it has one.
    pub origin: Vec<Option<Pos>>,
}

impl BasicProgram {
    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    /// 1-based line access.
    pub fn line(&self, i: usize) -> &BasicStmt {
        &self.stmts[i - 1]
    }

    /// Slots a line may change, in ascending order. Every slot outside this
    /// set is carried over unchanged.
    pub fn writes(&self, line: usize) -> Vec<usize> {
        let sym = &self.symbols;
        let mut out: Vec<usize> = match self.line(line) {
            Stmt::AssignConst { target, .. }
            | Stmt::Copy { target, .. }
            | Stmt::Not { target, .. }
            | Stmt::Xor { target, .. }
            | Stmt::And { target, .. }
            | Stmt::Or { target, .. }
            | Stmt::OrK { target, .. } => vec![*target],
            Stmt::Inc { int } => {
                let carry = sym.carry.expect("carry allocated");
                sym.int_slots(*int).chain(carry..carry + sym.word).collect()
            }
            Stmt::EqTest { target, .. } => {
                let e = sym.eq_scratch.expect("scratch allocated");
                std::iter::once(*target).chain(e..e + sym.word).collect()
            }
            Stmt::ArrRead1 { target, array, .. } => {
                let (m, _) = sym.row_select.expect("selectors allocated");
                std::iter::once(*target).chain(m..m + sym.arrays[*array].rows).collect()
            }
            Stmt::ArrWrite1 { array, .. } => {
                let a = &sym.arrays[*array];
                let (m, _) = sym.row_select.expect("selectors allocated");
                (a.base..a.base + a.rows).chain(m..m + a.rows).collect()
            }
            Stmt::ArrRead2 { target, array, .. } => {
                let a = &sym.arrays[*array];
                let (m, _) = sym.row_select.expect("selectors allocated");
                let (n, _) = sym.col_select.expect("selectors allocated");
                let cols = a.cols.expect("2-D array");
                std::iter::once(*target).chain(m..m + a.rows).chain(n..n + cols).collect()
            }
            Stmt::ArrWrite2 { array, .. } => {
                let a = &sym.arrays[*array];
                let (m, _) = sym.row_select.expect("selectors allocated");
                let (n, _) = sym.col_select.expect("selectors allocated");
                let cols = a.cols.expect("2-D array");
                (a.base..a.base + a.len()).chain(m..m + a.rows).chain(n..n + cols).collect()
            }
            Stmt::Goto { .. } | Stmt::IfGoto { .. } | Stmt::Return => vec![],
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Listing with one numbered line per statement.
    pub fn listing(&self) -> String {
        let sym = &self.symbols;
        let b = |s: &usize| sym.describe(*s);
        let i = |k: &usize| sym.ints[*k].name.clone();
        let a = |k: &usize| sym.arrays[*k].name.clone();
        let mut out = String::new();
        for (n, st) in self.stmts.iter().enumerate() {
            let text = match st {
                Stmt::AssignConst { target, value } => format!("{} = {}", b(target), *value as u8),
                Stmt::Copy { target, src } => format!("{} = {}", b(target), b(src)),
                Stmt::Not { target, src } => format!("{} = !{}", b(target), b(src)),
                Stmt::Xor { target, a: x, b: y } => format!("{} = {} ^ {}", b(target), b(x), b(y)),
                Stmt::And { target, a: x, b: y } => format!("{} = {} & {}", b(target), b(x), b(y)),
                Stmt::Or { target, a: x, b: y } => format!("{} = {} | {}", b(target), b(x), b(y)),
                Stmt::OrK { target, srcs } => {
                    format!("{} = {}", b(target), srcs.iter().map(b).collect::<Vec<_>>().join(" | "))
                }
                Stmt::Inc { int } => format!("{0} = {0} + 1", i(int)),
                Stmt::EqTest { target, a: x, b: y } => format!("{} = {} == {}", b(target), i(x), i(y)),
                Stmt::ArrRead1 { target, array, index } => format!("{} = {}[{}]", b(target), a(array), i(index)),
                Stmt::ArrWrite1 { array, index, src } => format!("{}[{}] = {}", a(array), i(index), b(src)),
                Stmt::ArrRead2 { target, array, row, col } => {
                    format!("{} = {}[{}][{}]", b(target), a(array), i(row), i(col))
                }
                Stmt::ArrWrite2 { array, row, col, src } => {
                    format!("{}[{}][{}] = {}", a(array), i(row), i(col), b(src))
                }
                Stmt::Goto { target } => format!("go to {target}"),
                Stmt::IfGoto { cond, target } => format!("if {} then go to {target} endif", b(cond)),
                Stmt::Return => "return".to_string(),
            };
            out.push_str(&format!("{:>4}: {text}\n", n + 1));
        }
        out
    }
}
