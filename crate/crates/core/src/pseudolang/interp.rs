//! Reference interpreter. Time `t` runs from 1; the line executed at time
//! `t` reads memory snapshot `t-1` and produces snapshot `t`, the same
//! convention the compiler's B(i,t) variables follow.

use super::{BasicProgram, LangError, Stmt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// Output bit in the final snapshot.
    pub w: bool,
    /// Steps completed before the first `return` executes.
    pub steps_used: usize,
    /// Time at which the first `return` executes.
    pub halt_time: usize,
    /// `line_at[t-1]` is the 1-based line executed at time `t`.
    pub line_at: Vec<usize>,
    /// `memory[t]` is the slot vector after `t` steps, `t = 0..=p_max`.
    pub memory: Vec<Vec<bool>>,
}

impl Trace {
    pub fn final_memory(&self) -> &[bool] {
        self.memory.last().expect("snapshot 0 always present")
    }

    pub fn line_at_time(&self, t: usize) -> usize {
        self.line_at[t - 1]
    }
}

fn int_value(mem: &[bool], base: usize, word: usize) -> u64 {
    (0..word).filter(|&b| mem[base + b]).map(|b| 1u64 << b).sum()
}

/// Runs `p` for exactly `p_max` steps; `return` repeats in place.
pub fn interpret(p: &BasicProgram, input: &[bool], p_max: usize) -> Result<Trace, LangError> {
    let sym = &p.symbols;
    if input.len() != sym.inputs.len() {
        return Err(LangError::InputLength { expected: sym.inputs.len(), got: input.len() });
    }
    let word = sym.word;
    let mut memory = Vec::with_capacity(p_max + 1);
    memory.push(sym.initial_memory(input));
    let mut line_at = Vec::with_capacity(p_max);
    let mut halt_time = None;
    let mut line = 1;
    for t in 1..=p_max {
        let prev = memory.last().expect("nonempty");
        let mut mem = prev.clone();
        line_at.push(line);
        let index_err = |array: usize, index: u64| LangError::IndexOutOfRange {
            line,
            step: t,
            array: sym.arrays[array].name.clone(),
            index,
        };
        let int = |i: usize| int_value(prev, sym.ints[i].base, word);
        let mut next = line + 1;
        match p.line(line) {
            Stmt::AssignConst { target, value } => mem[*target] = *value,
            Stmt::Copy { target, src } => mem[*target] = prev[*src],
            Stmt::Not { target, src } => mem[*target] = !prev[*src],
            Stmt::Xor { target, a, b } => mem[*target] = prev[*a] ^ prev[*b],
            Stmt::And { target, a, b } => mem[*target] = prev[*a] & prev[*b],
            Stmt::Or { target, a, b } => mem[*target] = prev[*a] | prev[*b],
            Stmt::OrK { target, srcs } => mem[*target] = srcs.iter().any(|s| prev[*s]),
            Stmt::Inc { int: i } => {
                let base = sym.ints[*i].base;
                let carry = sym.carry.expect("carry allocated");
                let mut c = true;
                for j in 0..word {
                    let bit = prev[base + j];
                    mem[base + j] = bit ^ c;
                    c &= bit;
                    mem[carry + j] = c;
                }
            }
            Stmt::EqTest { target, a, b } => {
                let e = sym.eq_scratch.expect("scratch allocated");
                let (ba, bb) = (sym.ints[*a].base, sym.ints[*b].base);
                let mut any = false;
                for j in 0..word {
                    let x = prev[ba + j] ^ prev[bb + j];
                    mem[e + j] = x;
                    any |= x;
                }
                mem[*target] = !any;
            }
            Stmt::ArrRead1 { target, array, index } => {
                let a = &sym.arrays[*array];
                let m = int(*index);
                if m >= a.rows as u64 {
                    return Err(index_err(*array, m));
                }
                let (sel, _) = sym.row_select.expect("selectors allocated");
                for j in 0..a.rows {
                    mem[sel + j] = j as u64 != m;
                }
                mem[*target] = prev[a.base + m as usize];
            }
            Stmt::ArrWrite1 { array, index, src } => {
                let a = &sym.arrays[*array];
                let m = int(*index);
                if m >= a.rows as u64 {
                    return Err(index_err(*array, m));
                }
                let (sel, _) = sym.row_select.expect("selectors allocated");
                for j in 0..a.rows {
                    mem[sel + j] = j as u64 != m;
                }
                mem[a.base + m as usize] = prev[*src];
            }
            Stmt::ArrRead2 { target, array, row, col } | Stmt::ArrWrite2 { array, row, col, src: target } => {
                let a = &sym.arrays[*array];
                let cols = a.cols.expect("2-D array");
                let (r, c) = (int(*row), int(*col));
                if r >= a.rows as u64 {
                    return Err(index_err(*array, r));
                }
                if c >= cols as u64 {
                    return Err(index_err(*array, c));
                }
                let (ms, _) = sym.row_select.expect("selectors allocated");
                let (ns, _) = sym.col_select.expect("selectors allocated");
                for j in 0..a.rows {
                    mem[ms + j] = j as u64 != r;
                }
                for j in 0..cols {
                    mem[ns + j] = j as u64 != c;
                }
                let cell = a.base + r as usize * cols + c as usize;
                if matches!(p.line(line), Stmt::ArrRead2 { .. }) {
                    mem[*target] = prev[cell];
                } else {
                    mem[cell] = prev[*target];
                }
            }
            Stmt::Goto { target } => next = *target,
            Stmt::IfGoto { cond, target } => {
                if prev[*cond] {
                    next = *target;
                }
            }
            Stmt::Return => {
                halt_time.get_or_insert(t);
                next = line;
            }
        }
        let writes = p.writes(line);
        if let Some(slot) = (0..mem.len()).find(|&s| mem[s] != prev[s] && writes.binary_search(&s).is_err()) {
            return Err(LangError::StrayWrite { line, step: t, slot });
        }
        memory.push(mem);
        line = next;
    }
    let halt_time = halt_time.ok_or(LangError::NonTermination(p_max))?;
    let w = memory.last().expect("nonempty")[sym.output];
    Ok(Trace { w, steps_used: halt_time - 1, halt_time, line_at, memory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudolang::{desugar, parse};

    fn build(src: &str) -> BasicProgram {
        desugar(&parse(src).unwrap(), None).unwrap()
    }

    #[test]
    fn increment_wraps_with_carry() {
        let b = build("word 3\noutput w\nint i = 7\ni = i + 1\nreturn\n");
        let tr = interpret(&b, &[], 3).unwrap();
        let sym = &b.symbols;
        let mem = tr.final_memory();
        assert_eq!(int_value(mem, sym.ints[0].base, 3), 0);
        let carry = sym.carry.unwrap();
        assert!(mem[carry + 2], "top carry set on overflow");
    }

    #[test]
    fn return_loops_in_place() {
        let b = build("output w\nw = 1\nreturn\n");
        let tr = interpret(&b, &[], 5).unwrap();
        assert_eq!(tr.line_at, vec![1, 2, 2, 2, 2]);
        assert_eq!((tr.steps_used, tr.halt_time, tr.w), (1, 2, true));
        assert_eq!(tr.memory.len(), 6);
    }

    #[test]
    fn budget_exhaustion_is_non_termination() {
        let b = build("output w\n1: go to 1\n");
        assert_eq!(interpret(&b, &[], 4).unwrap_err(), LangError::NonTermination(4));
    }

    #[test]
    fn out_of_range_index_is_reported() {
        let b = build("word 2\noutput w\nint i = 3\narray R[2]\nw = R[i]\nreturn\n");
        assert!(matches!(interpret(&b, &[], 3).unwrap_err(), LangError::IndexOutOfRange { index: 3, .. }));
    }

    #[test]
    fn for_loop_counts() {
        // toggles w three times
        let b = build("output w\nint i\nfor i in 0..3\nw = !w\nendfor\nreturn\n");
        assert!(interpret(&b, &[], 40).unwrap().w);
    }
}
