//! Loop expansion, memory layout and label resolution.
//!
//! Slot order: declared names in declaration order, hidden loop helpers,
//! then the carry integer, equality scratch bits and array selectors.
//!
//! `for i in 0..K` becomes
//!
//! ```text
//!        i = 0                  (one constant assignment per bit)
//! top:   done = i == K          (K preloaded into a hidden integer)
//!        if done then go to end endif
//!        body
//!        i = i + 1
//!        go to top
//! end:
//! ```
//!
//! and `while c` becomes `top: tmp = !c; if tmp then go to end endif; body;
//! go to top`. `while !c` skips the negation.

use std::collections::HashMap;

use super::{
    ArrayVar, BasicProgram, BasicStmt, DeclKind, IntVar, Item, ItemKind, LangError, Pos, Program, SlotRole, Stmt,
    SurfaceStmt, SymbolTable,
};

/// Surface statement whose jump targets are internal label ids.
type Pending = Stmt<String, String, String, usize>;

struct Names {
    bits: HashMap<String, usize>,
    ints: HashMap<String, usize>,
    arrays: HashMap<String, usize>,
}

struct Emitter {
    stmts: Vec<(Pending, Option<Pos>)>,
    /// Label id -> line index (0-based) it points at.
    label_at: Vec<Option<usize>>,
    /// Source position of the item that owns each label.
    label_pos: Vec<Pos>,
    user_labels: HashMap<String, usize>,
    hidden_bits: Vec<String>,
    hidden_ints: Vec<(String, u64)>,
    word: usize,
}

impl Emitter {
    fn new_label(&mut self, pos: Pos) -> usize {
        self.label_at.push(None);
        self.label_pos.push(pos);
        self.label_at.len() - 1
    }

    fn place(&mut self, label: usize) {
        self.label_at[label] = Some(self.stmts.len());
    }

    fn push(&mut self, s: Pending, pos: Pos) {
        self.stmts.push((s, Some(pos)));
    }

    fn hidden_bit(&mut self, stem: &str) -> String {
        let name = format!("${stem}{}", self.hidden_bits.len() + 1);
        self.hidden_bits.push(name.clone());
        name
    }

    fn hidden_int(&mut self, stem: &str, init: u64) -> String {
        let name = format!("${stem}{}", self.hidden_ints.len() + 1);
        self.hidden_ints.push((name.clone(), init));
        name
    }

    fn user_label(&mut self, name: &str, pos: Pos) -> usize {
        if let Some(&id) = self.user_labels.get(name) {
            return id;
        }
        let id = self.new_label(pos);
        self.user_labels.insert(name.to_string(), id);
        id
    }

    fn items(&mut self, items: &[Item]) -> Result<(), LangError> {
        for item in items {
            if let Some(l) = &item.label {
                let id = self.user_label(l, item.pos);
                self.label_pos[id] = item.pos;
                self.place(id);
            }
            let pos = item.pos;
            match &item.kind {
                ItemKind::Stmt(s) => {
                    let s = self.retarget(s.clone(), pos);
                    self.push(s, pos);
                }
                ItemKind::SymWrite2 { array, row, col, src } => {
                    self.push(
                        Stmt::ArrWrite2 { array: array.clone(), row: row.clone(), col: col.clone(), src: src.clone() },
                        pos,
                    );
                    self.push(
                        Stmt::ArrWrite2 { array: array.clone(), row: col.clone(), col: row.clone(), src: src.clone() },
                        pos,
                    );
                }
                ItemKind::While { cond, negated, body } => {
                    let top = self.new_label(pos);
                    let end = self.new_label(pos);
                    self.place(top);
                    if *negated {
                        self.push(Stmt::IfGoto { cond: cond.clone(), target: end }, pos);
                    } else {
                        let tmp = self.hidden_bit("stop");
                        self.push(Stmt::Not { target: tmp.clone(), src: cond.clone() }, pos);
                        self.push(Stmt::IfGoto { cond: tmp, target: end }, pos);
                    }
                    self.items(body)?;
                    self.push(Stmt::Goto { target: top }, pos);
                    self.place(end);
                }
                ItemKind::For { var, end: bound, body } => {
                    if self.word < 64 && *bound >= 1u64 << self.word {
                        return Err(LangError::Semantic {
                            pos,
                            msg: format!("loop bound {bound} does not fit in {}-bit words", self.word),
                        });
                    }
                    // i = 0, bit by bit; the integer's bits are addressed by
                    // the pseudo-name `i#k` and resolved after layout.
                    for bit in 0..self.word {
                        self.push(Stmt::AssignConst { target: format!("{var}#{bit}"), value: false }, pos);
                    }
                    let limit = self.hidden_int("end", *bound);
                    let done = self.hidden_bit("done");
                    let top = self.new_label(pos);
                    let end = self.new_label(pos);
                    self.place(top);
                    self.push(Stmt::EqTest { target: done.clone(), a: var.clone(), b: limit }, pos);
                    self.push(Stmt::IfGoto { cond: done, target: end }, pos);
                    self.items(body)?;
                    self.push(Stmt::Inc { int: var.clone() }, pos);
                    self.push(Stmt::Goto { target: top }, pos);
                    self.place(end);
                }
            }
        }
        Ok(())
    }

    fn retarget(&mut self, s: SurfaceStmt, pos: Pos) -> Pending {
        match s {
            Stmt::Goto { target } => Stmt::Goto { target: self.user_label(&target, pos) },
            Stmt::IfGoto { cond, target } => Stmt::IfGoto { cond, target: self.user_label(&target, pos) },
            Stmt::AssignConst { target, value } => Stmt::AssignConst { target, value },
            Stmt::Copy { target, src } => Stmt::Copy { target, src },
            Stmt::Not { target, src } => Stmt::Not { target, src },
            Stmt::Xor { target, a, b } => Stmt::Xor { target, a, b },
            Stmt::And { target, a, b } => Stmt::And { target, a, b },
            Stmt::Or { target, a, b } => Stmt::Or { target, a, b },
            Stmt::OrK { target, srcs } => Stmt::OrK { target, srcs },
            Stmt::Inc { int } => Stmt::Inc { int },
            Stmt::EqTest { target, a, b } => Stmt::EqTest { target, a, b },
            Stmt::ArrRead1 { target, array, index } => Stmt::ArrRead1 { target, array, index },
            Stmt::ArrWrite1 { array, index, src } => Stmt::ArrWrite1 { array, index, src },
            Stmt::ArrRead2 { target, array, row, col } => Stmt::ArrRead2 { target, array, row, col },
            Stmt::ArrWrite2 { array, row, col, src } => Stmt::ArrWrite2 { array, row, col, src },
            Stmt::Return => Stmt::Return,
        }
    }
}

fn bits_for(value: u64) -> usize {
    (u64::BITS - value.leading_zeros()).max(1) as usize
}

/// Smallest word size that holds every array index, integer initial value
/// and loop bound in the program.
fn infer_word(p: &Program) -> usize {
    fn loop_bounds(items: &[Item], out: &mut u64) {
        for it in items {
            match &it.kind {
                ItemKind::For { end, body, .. } => {
                    *out = (*out).max(*end);
                    loop_bounds(body, out);
                }
                ItemKind::While { body, .. } => loop_bounds(body, out),
                _ => {}
            }
        }
    }
    let mut need = 1u64;
    for d in &p.decls {
        need = need.max(match d.kind {
            DeclKind::Bit => 0,
            DeclKind::Int { init } => init,
            DeclKind::Array1 { max } => max as u64,
            DeclKind::Array2 { rows_max, cols_max } => rows_max.max(cols_max) as u64,
        });
    }
    loop_bounds(&p.body, &mut need);
    bits_for(need)
}

/// Expands loops, lays out memory and resolves labels. `word` overrides the
/// program's own `word` declaration; without either the smallest sufficient
/// word size is used.
pub fn desugar(program: &Program, word: Option<usize>) -> Result<BasicProgram, LangError> {
    let word = word.or(program.word).unwrap_or_else(|| infer_word(program));
    let top = Pos { line: 1, col: 1 };
    if word == 0 || word > 63 {
        return Err(LangError::Semantic { pos: top, msg: format!("word size {word} outside 1..=63") });
    }

    let mut em = Emitter {
        stmts: Vec::new(),
        label_at: Vec::new(),
        label_pos: Vec::new(),
        user_labels: HashMap::new(),
        hidden_bits: Vec::new(),
        hidden_ints: Vec::new(),
        word,
    };
    let mut names = Names { bits: HashMap::new(), ints: HashMap::new(), arrays: HashMap::new() };

    // declared layout
    let mut slots: Vec<SlotRole> = Vec::new();
    let mut ints: Vec<IntVar> = Vec::new();
    let mut arrays: Vec<ArrayVar> = Vec::new();
    let mut inputs = Vec::new();
    let mut output = None;
    let cap = (1u64 << word) - 1;
    for d in &program.decls {
        match d.kind {
            DeclKind::Bit => {
                names.bits.insert(d.name.clone(), slots.len());
                if d.input {
                    inputs.push(slots.len());
                }
                if d.output {
                    output = Some(slots.len());
                }
                slots.push(SlotRole::Bit { name: d.name.clone() });
            }
            DeclKind::Int { init } => {
                if init > cap {
                    return Err(LangError::Semantic {
                        pos: d.pos,
                        msg: format!("initial value {init} does not fit in {word} bits"),
                    });
                }
                names.ints.insert(d.name.clone(), ints.len());
                let base = slots.len();
                slots.extend((0..word).map(|bit| SlotRole::IntBit { int: ints.len(), bit }));
                ints.push(IntVar { name: d.name.clone(), base, init });
            }
            DeclKind::Array1 { max } | DeclKind::Array2 { rows_max: max, .. } => {
                let cols = match d.kind {
                    DeclKind::Array2 { cols_max, .. } => Some(cols_max + 1),
                    _ => None,
                };
                if max as u64 > cap || cols.is_some_and(|c| c as u64 - 1 > cap) {
                    return Err(LangError::Semantic {
                        pos: d.pos,
                        msg: format!("`{}` has an index beyond {word}-bit words", d.name),
                    });
                }
                let a = ArrayVar { name: d.name.clone(), base: slots.len(), rows: max + 1, cols, input: d.input };
                names.arrays.insert(d.name.clone(), arrays.len());
                for offset in 0..a.len() {
                    if d.input {
                        inputs.push(slots.len());
                    }
                    slots.push(SlotRole::ArrayElem { array: arrays.len(), offset });
                }
                arrays.push(a);
            }
        }
    }
    let output = output.ok_or_else(|| LangError::Semantic { pos: top, msg: "no output bit declared".into() })?;

    em.items(&program.body)?;

    for name in &em.hidden_bits {
        names.bits.insert(name.clone(), slots.len());
        slots.push(SlotRole::Bit { name: name.clone() });
    }
    for (name, init) in &em.hidden_ints {
        names.ints.insert(name.clone(), ints.len());
        let base = slots.len();
        slots.extend((0..word).map(|bit| SlotRole::IntBit { int: ints.len(), bit }));
        ints.push(IntVar { name: name.clone(), base, init: *init });
    }

    let uses = |pred: fn(&Pending) -> bool| em.stmts.iter().any(|(s, _)| pred(s));
    let carry = if uses(|s| matches!(s, Stmt::Inc { .. })) {
        let base = slots.len();
        slots.extend((0..word).map(|bit| SlotRole::IntBit { int: ints.len(), bit }));
        ints.push(IntVar { name: "$carry".into(), base, init: 0 });
        Some(base)
    } else {
        None
    };
    let eq_scratch = if uses(|s| matches!(s, Stmt::EqTest { .. })) {
        let base = slots.len();
        slots.extend((0..word).map(|bit| SlotRole::EqScratch { bit }));
        Some(base)
    } else {
        None
    };
    let indexed = |s: &Pending| match s {
        Stmt::ArrRead1 { array, .. } | Stmt::ArrWrite1 { array, .. } => Some((names.arrays[array], false)),
        Stmt::ArrRead2 { array, .. } | Stmt::ArrWrite2 { array, .. } => Some((names.arrays[array], true)),
        _ => None,
    };
    let mut rows_needed = 0;
    let mut cols_needed = 0;
    for (s, _) in &em.stmts {
        if let Some((a, two_d)) = indexed(s) {
            rows_needed = rows_needed.max(arrays[a].rows);
            if two_d {
                cols_needed = cols_needed.max(arrays[a].cols.expect("2-D"));
            }
        }
    }
    let row_select = (rows_needed > 0).then(|| {
        let base = slots.len();
        slots.extend((0..rows_needed).map(|index| SlotRole::RowSelect { index }));
        (base, rows_needed)
    });
    let col_select = (cols_needed > 0).then(|| {
        let base = slots.len();
        slots.extend((0..cols_needed).map(|index| SlotRole::ColSelect { index }));
        (base, cols_needed)
    });

    let symbols = SymbolTable {
        word,
        slots,
        ints,
        arrays,
        inputs,
        output,
        carry,
        eq_scratch,
        row_select,
        col_select,
    };

    // labels to 1-based lines
    let len = em.stmts.len();
    let mut line_of = Vec::with_capacity(em.label_at.len());
    for (id, at) in em.label_at.iter().enumerate() {
        match at {
            Some(i) if *i < len => line_of.push(i + 1),
            _ => {
                return Err(LangError::Semantic {
                    pos: em.label_pos[id],
                    msg: "jump target lies past the last statement".into(),
                })
            }
        }
    }

    let bit = |name: &str| -> usize {
        if let Some((int, b)) = name.split_once('#') {
            symbols.int_slot(names.ints[int], b.parse().expect("bit index"))
        } else {
            names.bits[name]
        }
    };
    let int = |name: &String| names.ints[name];
    let arr = |name: &String| names.arrays[name];
    let mut stmts: Vec<BasicStmt> = Vec::with_capacity(len);
    let mut origin = Vec::with_capacity(len);
    for (s, pos) in &em.stmts {
        origin.push(*pos);
        stmts.push(match s {
            Stmt::AssignConst { target, value } => Stmt::AssignConst { target: bit(target), value: *value },
            Stmt::Copy { target, src } => Stmt::Copy { target: bit(target), src: bit(src) },
            Stmt::Not { target, src } => Stmt::Not { target: bit(target), src: bit(src) },
            Stmt::Xor { target, a, b } => Stmt::Xor { target: bit(target), a: bit(a), b: bit(b) },
            Stmt::And { target, a, b } => Stmt::And { target: bit(target), a: bit(a), b: bit(b) },
            Stmt::Or { target, a, b } => Stmt::Or { target: bit(target), a: bit(a), b: bit(b) },
            Stmt::OrK { target, srcs } => {
                Stmt::OrK { target: bit(target), srcs: srcs.iter().map(|s| bit(s)).collect() }
            }
            Stmt::Inc { int: i } => Stmt::Inc { int: int(i) },
            Stmt::EqTest { target, a, b } => Stmt::EqTest { target: bit(target), a: int(a), b: int(b) },
            Stmt::ArrRead1 { target, array, index } => {
                Stmt::ArrRead1 { target: bit(target), array: arr(array), index: int(index) }
            }
            Stmt::ArrWrite1 { array, index, src } => {
                Stmt::ArrWrite1 { array: arr(array), index: int(index), src: bit(src) }
            }
            Stmt::ArrRead2 { target, array, row, col } => {
                Stmt::ArrRead2 { target: bit(target), array: arr(array), row: int(row), col: int(col) }
            }
            Stmt::ArrWrite2 { array, row, col, src } => {
                Stmt::ArrWrite2 { array: arr(array), row: int(row), col: int(col), src: bit(src) }
            }
            Stmt::Goto { target } => Stmt::Goto { target: line_of[*target] },
            Stmt::IfGoto { cond, target } => Stmt::IfGoto { cond: bit(cond), target: line_of[*target] },
            Stmt::Return => Stmt::Return,
        });
    }

    match stmts.last() {
        None => return Err(LangError::Semantic { pos: top, msg: "program has no statements".into() }),
        Some(Stmt::Return | Stmt::Goto { .. }) => {}
        Some(_) => {
            return Err(LangError::Semantic {
                pos: origin.last().copied().flatten().unwrap_or(top),
                msg: "control can fall off the end; finish with `return` or `go to`".into(),
            })
        }
    }

    Ok(BasicProgram { symbols, stmts, origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudolang::parse;

    #[test]
    fn word_is_inferred_from_dimensions() {
        let p = parse("output w\narray R[5]\nw = 1\nreturn\n").unwrap();
        assert_eq!(desugar(&p, None).unwrap().symbols.word, 3);
        assert_eq!(desugar(&p, Some(4)).unwrap().symbols.word, 4);
        assert!(desugar(&p, Some(2)).is_err());
    }

    #[test]
    fn labels_resolve_to_lines() {
        let p = parse("input a\noutput w\nif a then go to 9 endif\nw = 0\nreturn\n9: w = 1\nreturn\n").unwrap();
        let b = desugar(&p, None).unwrap();
        assert_eq!(b.stmts[0], Stmt::IfGoto { cond: 0, target: 4 });
    }

    #[test]
    fn falling_off_the_end_is_rejected() {
        let p = parse("output w\nw = 1\n").unwrap();
        assert!(desugar(&p, None).unwrap_err().to_string().contains("fall off"));
        let p = parse("output w\nwhile w\nw = 0\nendwhile\n").unwrap();
        assert!(desugar(&p, None).is_err());
    }

    #[test]
    fn for_loop_expansion_shape() {
        let p = parse("output w\nint i\nfor i in 0..3\nw = !w\nendfor\nreturn\n").unwrap();
        let b = desugar(&p, None).unwrap();
        assert_eq!(b.symbols.word, 2);
        // 2 zeroing, eq, if, body, inc, goto, return
        assert_eq!(b.len(), 8);
        assert!(matches!(b.stmts[2], Stmt::EqTest { .. }));
        assert!(matches!(b.stmts[3], Stmt::IfGoto { target: 8, .. }));
        assert_eq!(b.stmts[6], Stmt::Goto { target: 3 });
        assert!(b.symbols.carry.is_some() && b.symbols.eq_scratch.is_some());
    }
}
