//! Line-oriented parser for `.psc` sources.
//!
//! ```text
//! word 2
//! input x, y
//! output w
//! int i, n = 3
//! array R[3]
//!     w = x & y
//! 10: if w then go to 20 endif
//!     return
//! 20: return
//! ```
//!
//! One statement per line; `#` and `//` start comments. Declarations come
//! before the first statement.

use std::collections::{HashMap, HashSet};

use super::{Decl, DeclKind, Item, ItemKind, LangError, Pos, Program, Stmt, SurfaceStmt};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

const SYMBOLS: [&str; 13] = ["==", "..", "=", "!", "^", "&", "|", "[", "]", ":", ",", "+", "~"];

fn tokenize(line_no: usize, text: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| LangError::Syntax {
                pos: Pos { line: line_no, col },
                msg: format!("number `{s}` too large"),
            })?;
            out.push(Token { tok: Tok::Num(n), col });
            continue;
        }
        for sym in SYMBOLS {
            let len = sym.len();
            if i + len <= chars.len() && chars[i..i + len].iter().copied().eq(sym.chars()) {
                out.push(Token { tok: Tok::Sym(sym), col });
                i += len;
                continue 'outer;
            }
        }
        return Err(LangError::Syntax { pos: Pos { line: line_no, col }, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    at: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Pos {
        let col = self.toks.get(self.at).map_or(self.end_col, |t| t.col);
        Pos { line: self.line, col }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        Err(LangError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|t| &t.tok)
    }

    fn done(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.tok.clone());
        self.at += 1;
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == kw)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), LangError> {
        if self.is_sym(s) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), LangError> {
        if self.is_kw(kw) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn num(&mut self) -> Result<u64, LangError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.at += 1;
                Ok(n)
            }
            _ => self.err("expected a number"),
        }
    }

    fn finish(&self) -> Result<(), LangError> {
        if self.done() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }
}

const KEYWORDS: [&str; 19] = [
    "input", "bits", "bit", "output", "int", "array", "array2", "word", "if", "then", "go", "goto", "to", "endif",
    "return", "while", "endwhile", "for", "endfor",
];

/// Name classes used for semantic checks during parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Bit,
    Int,
    Array1,
    Array2,
}

fn parse_decl(c: &mut Cursor, out: &mut Vec<Decl>) -> Result<(), LangError> {
    let pos = c.pos();
    let mut input = false;
    let mut output = false;
    if c.is_kw("input") {
        c.next();
        input = true;
    } else if c.is_kw("output") {
        c.next();
        output = true;
    }
    let kind_kw = match c.peek() {
        Some(Tok::Ident(s)) if ["bits", "bit", "int", "array", "array2"].contains(&s.as_str()) => {
            let s = s.clone();
            c.next();
            s
        }
        _ if input || output => "bit".to_string(),
        _ => return c.err("expected a declaration"),
    };
    if output && kind_kw != "bit" && kind_kw != "bits" {
        return c.err("only a bit can be the output");
    }
    if input && kind_kw == "int" {
        return c.err("integer inputs are not supported; pass bits or arrays");
    }
    loop {
        let name_pos = c.pos();
        let name = c.ident()?;
        let kind = match kind_kw.as_str() {
            "bit" | "bits" => DeclKind::Bit,
            "int" => {
                let init = if c.is_sym("=") {
                    c.next();
                    c.num()?
                } else {
                    0
                };
                DeclKind::Int { init }
            }
            "array" => {
                c.expect_sym("[")?;
                let max = c.num()? as usize;
                c.expect_sym("]")?;
                DeclKind::Array1 { max }
            }
            _ => {
                c.expect_sym("[")?;
                let rows_max = c.num()? as usize;
                c.expect_sym("]")?;
                c.expect_sym("[")?;
                let cols_max = c.num()? as usize;
                c.expect_sym("]")?;
                DeclKind::Array2 { rows_max, cols_max }
            }
        };
        out.push(Decl { name, kind, input, output, pos: if out.is_empty() { pos } else { name_pos } });
        if c.is_sym(",") {
            c.next();
        } else {
            break;
        }
    }
    c.finish()
}

/// `go to L` or `goto L`.
fn parse_jump_target(c: &mut Cursor) -> Result<String, LangError> {
    if c.is_kw("goto") {
        c.next();
    } else {
        c.expect_kw("go")?;
        c.expect_kw("to")?;
    }
    match c.next() {
        Some(Tok::Num(n)) => Ok(n.to_string()),
        Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => Ok(s),
        _ => c.err("expected a label"),
    }
}

/// Right-hand side operand: a plain bit name.
fn bit_operand(c: &mut Cursor) -> Result<(String, bool), LangError> {
    let negated = if c.is_sym("!") || c.is_sym("~") {
        c.next();
        true
    } else {
        false
    };
    Ok((c.ident()?, negated))
}

fn is_op(c: &Cursor) -> Option<&'static str> {
    match c.peek() {
        Some(Tok::Sym(s)) if ["^", "&", "|"].contains(s) => Some(s),
        _ => None,
    }
}

enum Line {
    Stmt(SurfaceStmt),
    Sym { array: String, row: String, col: String, src: String },
    While { cond: String, negated: bool },
    EndWhile,
    For { var: String, end: u64 },
    EndFor,
}

fn parse_statement(c: &mut Cursor) -> Result<Line, LangError> {
    if c.is_kw("return") {
        c.next();
        c.finish()?;
        return Ok(Line::Stmt(Stmt::Return));
    }
    if c.is_kw("go") || c.is_kw("goto") {
        let target = parse_jump_target(c)?;
        c.finish()?;
        return Ok(Line::Stmt(Stmt::Goto { target }));
    }
    if c.is_kw("if") {
        c.next();
        let cond = c.ident()?;
        if c.is_sym("==") {
            // accept `if c == 1` as a synonym for `if c`
            c.next();
            if c.num()? != 1 {
                return c.err("only `== 1` conditions are supported");
            }
        }
        c.expect_kw("then")?;
        let target = parse_jump_target(c)?;
        c.expect_kw("endif")?;
        c.finish()?;
        return Ok(Line::Stmt(Stmt::IfGoto { cond, target }));
    }
    if c.is_kw("while") {
        c.next();
        let negated = c.is_sym("!") || c.is_sym("~");
        if negated {
            c.next();
        }
        let cond = c.ident()?;
        c.finish()?;
        return Ok(Line::While { cond, negated });
    }
    if c.is_kw("endwhile") {
        c.next();
        c.finish()?;
        return Ok(Line::EndWhile);
    }
    if c.is_kw("for") {
        c.next();
        let var = c.ident()?;
        if !matches!(c.next(), Some(Tok::Ident(s)) if s == "in") {
            return c.err("expected `in`");
        }
        if c.num()? != 0 {
            return c.err("loops start at 0");
        }
        c.expect_sym("..")?;
        let end = c.num()?;
        c.finish()?;
        return Ok(Line::For { var, end });
    }
    if c.is_kw("endfor") {
        c.next();
        c.finish()?;
        return Ok(Line::EndFor);
    }
    if matches!(c.peek(), Some(Tok::Ident(s)) if s == "sym") && matches!(c.peek_at(1), Some(Tok::Ident(_))) {
        c.next();
        let array = c.ident()?;
        c.expect_sym("[")?;
        let row = c.ident()?;
        c.expect_sym("]")?;
        c.expect_sym("[")?;
        let col = c.ident()?;
        c.expect_sym("]")?;
        c.expect_sym("=")?;
        let src = c.ident()?;
        c.finish()?;
        return Ok(Line::Sym { array, row, col, src });
    }

    let target = c.ident()?;
    if c.is_sym("[") {
        // array write
        c.next();
        let row = c.ident()?;
        c.expect_sym("]")?;
        let col = if c.is_sym("[") {
            c.next();
            let col = c.ident()?;
            c.expect_sym("]")?;
            Some(col)
        } else {
            None
        };
        c.expect_sym("=")?;
        let src = c.ident()?;
        c.finish()?;
        return Ok(Line::Stmt(match col {
            None => Stmt::ArrWrite1 { array: target, index: row, src },
            Some(col) => Stmt::ArrWrite2 { array: target, row, col, src },
        }));
    }
    c.expect_sym("=")?;
    if let Some(Tok::Num(v)) = c.peek() {
        let v = *v;
        c.next();
        if v > 1 {
            return c.err("bit constants are 0 or 1");
        }
        c.finish()?;
        return Ok(Line::Stmt(Stmt::AssignConst { target, value: v == 1 }));
    }
    let (first, neg_first) = bit_operand(c)?;
    if c.is_sym("[") {
        c.next();
        let row = c.ident()?;
        c.expect_sym("]")?;
        let col = if c.is_sym("[") {
            c.next();
            let col = c.ident()?;
            c.expect_sym("]")?;
            Some(col)
        } else {
            None
        };
        if neg_first {
            return c.err("array reads cannot be negated");
        }
        c.finish()?;
        return Ok(Line::Stmt(match col {
            None => Stmt::ArrRead1 { target, array: first, index: row },
            Some(col) => Stmt::ArrRead2 { target, array: first, row, col },
        }));
    }
    if c.is_sym("+") {
        c.next();
        if c.num()? != 1 || first != target || neg_first {
            return c.err("only `i = i + 1` increments are supported");
        }
        c.finish()?;
        return Ok(Line::Stmt(Stmt::Inc { int: target }));
    }
    if c.is_sym("==") {
        c.next();
        let second = c.ident()?;
        if neg_first {
            return c.err("equality tests compare integers");
        }
        c.finish()?;
        return Ok(Line::Stmt(Stmt::EqTest { target, a: first, b: second }));
    }
    let Some(op) = is_op(c) else {
        c.finish()?;
        return Ok(Line::Stmt(if neg_first {
            Stmt::Not { target, src: first }
        } else {
            Stmt::Copy { target, src: first }
        }));
    };
    if neg_first {
        return c.err("negation cannot be combined with another operator");
    }
    c.next();
    let (second, neg_second) = bit_operand(c)?;
    if neg_second {
        return c.err("negation cannot be combined with another operator");
    }
    if c.done() {
        return Ok(Line::Stmt(match op {
            "^" => Stmt::Xor { target, a: first, b: second },
            "&" => Stmt::And { target, a: first, b: second },
            _ => Stmt::Or { target, a: first, b: second },
        }));
    }
    // only a chain of `|` may continue
    let mut srcs = vec![first, second];
    while let Some(next) = is_op(c) {
        if next != "|" || op != "|" {
            return c.err("an expression contains at most one boolean operator");
        }
        c.next();
        let (s, neg) = bit_operand(c)?;
        if neg {
            return c.err("negation cannot be combined with another operator");
        }
        srcs.push(s);
    }
    c.finish()?;
    Ok(Line::Stmt(Stmt::OrK { target, srcs }))
}

struct Frame {
    kind: Line,
    label: Option<String>,
    pos: Pos,
    items: Vec<Item>,
}

pub fn parse(text: &str) -> Result<Program, LangError> {
    let mut word = None;
    let mut decls = Vec::new();
    let mut stack: Vec<Frame> = vec![Frame { kind: Line::EndFor, label: None, pos: Pos::default(), items: vec![] }];
    let mut pending_label: Option<(String, Pos)> = None;
    let mut seen_stmt = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize(line_no, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor { toks: &toks, at: 0, line: line_no, end_col: raw.len() + 1 };
        let pos = c.pos();

        if c.is_kw("word") {
            if seen_stmt || word.is_some() {
                return c.err("`word` must appear once, before any statement");
            }
            c.next();
            word = Some(c.num()? as usize);
            c.finish()?;
            continue;
        }
        // keywords are never variable names, so the first token decides
        let is_decl = matches!(c.peek(), Some(Tok::Ident(s)) if ["input", "output", "bits", "bit", "int", "array", "array2"].contains(&s.as_str()));
        if is_decl {
            if seen_stmt {
                return c.err("declarations must precede statements");
            }
            parse_decl(&mut c, &mut decls)?;
            continue;
        }

        // optional label
        if matches!(c.peek_at(1), Some(Tok::Sym(":"))) {
            let label = match c.next() {
                Some(Tok::Num(n)) => n.to_string(),
                Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => s,
                _ => return c.err("bad label"),
            };
            c.next();
            if pending_label.is_some() {
                return c.err("two labels on one statement");
            }
            pending_label = Some((label, pos));
            if c.done() {
                continue;
            }
        }
        seen_stmt = true;
        let line = parse_statement(&mut c)?;
        let label = pending_label.take().map(|(l, _)| l);
        match line {
            Line::EndWhile | Line::EndFor => {
                let want_while = matches!(line, Line::EndWhile);
                if let Some(l) = label {
                    return Err(LangError::Syntax { pos, msg: format!("label `{l}` on a loop end") });
                }
                if stack.len() == 1 {
                    return Err(LangError::Syntax { pos, msg: "loop end without a loop".into() });
                }
                let frame = stack.pop().expect("nonempty");
                let kind = match frame.kind {
                    Line::While { cond, negated } if want_while => ItemKind::While { cond, negated, body: frame.items },
                    Line::For { var, end } if !want_while => ItemKind::For { var, end, body: frame.items },
                    _ => return Err(LangError::Syntax { pos, msg: "mismatched loop end".into() }),
                };
                stack.last_mut().expect("root").items.push(Item { label: frame.label, pos: frame.pos, kind });
            }
            Line::While { .. } | Line::For { .. } => {
                stack.push(Frame { kind: line, label, pos, items: vec![] });
            }
            Line::Sym { array, row, col, src } => {
                stack.last_mut().expect("root").items.push(Item {
                    label,
                    pos,
                    kind: ItemKind::SymWrite2 { array, row, col, src },
                });
            }
            Line::Stmt(s) => {
                stack.last_mut().expect("root").items.push(Item { label, pos, kind: ItemKind::Stmt(s) });
            }
        }
    }
    if let Some((l, pos)) = pending_label {
        return Err(LangError::Syntax { pos, msg: format!("label `{l}` is not followed by a statement") });
    }
    if stack.len() > 1 {
        let f = stack.pop().expect("nonempty");
        return Err(LangError::Syntax { pos: f.pos, msg: "loop is never closed".into() });
    }
    let body = stack.pop().expect("root").items;
    let program = Program { word, decls, body };
    check(&program)?;
    Ok(program)
}

fn sem(pos: Pos, msg: impl Into<String>) -> LangError {
    LangError::Semantic { pos, msg: msg.into() }
}

/// Name resolution and kind checks.
fn check(p: &Program) -> Result<(), LangError> {
    let mut classes: HashMap<&str, Class> = HashMap::new();
    let mut outputs = 0;
    for d in &p.decls {
        let class = match d.kind {
            DeclKind::Bit => Class::Bit,
            DeclKind::Int { .. } => Class::Int,
            DeclKind::Array1 { .. } => Class::Array1,
            DeclKind::Array2 { .. } => Class::Array2,
        };
        if classes.insert(&d.name, class).is_some() {
            return Err(sem(d.pos, format!("`{}` declared twice", d.name)));
        }
        if let Some(w) = p.word {
            let too_big = |max: usize| max as u128 > (1u128 << w.min(64)) - 1;
            match d.kind {
                DeclKind::Array1 { max } if too_big(max) => {
                    return Err(sem(d.pos, format!("`{}` has index {max} beyond {w}-bit words", d.name)))
                }
                DeclKind::Array2 { rows_max, cols_max } if too_big(rows_max) || too_big(cols_max) => {
                    return Err(sem(d.pos, format!("`{}` has dimensions beyond {w}-bit words", d.name)))
                }
                DeclKind::Int { init } if w < 64 && init >= 1 << w => {
                    return Err(sem(d.pos, format!("initial value {init} does not fit in {w} bits")))
                }
                _ => {}
            }
        }
        outputs += d.output as usize;
    }
    if outputs != 1 {
        return Err(sem(Pos { line: 1, col: 1 }, format!("exactly one output bit is required, found {outputs}")));
    }

    let mut labels: HashSet<&str> = HashSet::new();
    fn collect<'a>(items: &'a [Item], labels: &mut HashSet<&'a str>) -> Result<(), LangError> {
        for it in items {
            if let Some(l) = &it.label {
                if !labels.insert(l) {
                    return Err(sem(it.pos, format!("label `{l}` defined twice")));
                }
            }
            if let ItemKind::While { body, .. } | ItemKind::For { body, .. } = &it.kind {
                collect(body, labels)?;
            }
        }
        Ok(())
    }
    collect(&p.body, &mut labels)?;

    fn walk(items: &[Item], classes: &HashMap<&str, Class>, labels: &HashSet<&str>) -> Result<(), LangError> {
        for it in items {
            let want = |name: &str, class: Class| -> Result<(), LangError> {
                match classes.get(name) {
                    None => Err(sem(it.pos, format!("`{name}` is not declared"))),
                    Some(c) if *c != class => Err(sem(
                        it.pos,
                        format!(
                            "`{name}` is {} but {} is required here",
                            describe(*c),
                            describe(class)
                        ),
                    )),
                    _ => Ok(()),
                }
            };
            let label = |l: &str| {
                if labels.contains(l) {
                    Ok(())
                } else {
                    Err(sem(it.pos, format!("jump to undefined label `{l}`")))
                }
            };
            match &it.kind {
                ItemKind::Stmt(s) => match s {
                    Stmt::AssignConst { target, .. } => want(target, Class::Bit)?,
                    Stmt::Copy { target, src } | Stmt::Not { target, src } => {
                        want(target, Class::Bit)?;
                        want(src, Class::Bit)?;
                    }
                    Stmt::Xor { target, a, b } | Stmt::And { target, a, b } | Stmt::Or { target, a, b } => {
                        want(target, Class::Bit)?;
                        want(a, Class::Bit)?;
                        want(b, Class::Bit)?;
                    }
                    Stmt::OrK { target, srcs } => {
                        want(target, Class::Bit)?;
                        for s in srcs {
                            want(s, Class::Bit)?;
                        }
                    }
                    Stmt::Inc { int } => want(int, Class::Int)?,
                    Stmt::EqTest { target, a, b } => {
                        want(target, Class::Bit)?;
                        want(a, Class::Int)?;
                        want(b, Class::Int)?;
                    }
                    Stmt::ArrRead1 { target, array, index } => {
                        want(target, Class::Bit)?;
                        want(array, Class::Array1)?;
                        want(index, Class::Int)?;
                    }
                    Stmt::ArrWrite1 { array, index, src } => {
                        want(array, Class::Array1)?;
                        want(index, Class::Int)?;
                        want(src, Class::Bit)?;
                    }
                    Stmt::ArrRead2 { target, array, row, col } => {
                        want(target, Class::Bit)?;
                        want(array, Class::Array2)?;
                        want(row, Class::Int)?;
                        want(col, Class::Int)?;
                    }
                    Stmt::ArrWrite2 { array, row, col, src } => {
                        want(array, Class::Array2)?;
                        want(row, Class::Int)?;
                        want(col, Class::Int)?;
                        want(src, Class::Bit)?;
                    }
                    Stmt::Goto { target } => label(target)?,
                    Stmt::IfGoto { cond, target } => {
                        want(cond, Class::Bit)?;
                        label(target)?;
                    }
                    Stmt::Return => {}
                },
                ItemKind::SymWrite2 { array, row, col, src } => {
                    want(array, Class::Array2)?;
                    want(row, Class::Int)?;
                    want(col, Class::Int)?;
                    want(src, Class::Bit)?;
                }
                ItemKind::While { cond, body, .. } => {
                    want(cond, Class::Bit)?;
                    walk(body, classes, labels)?;
                }
                ItemKind::For { var, body, .. } => {
                    want(var, Class::Int)?;
                    walk(body, classes, labels)?;
                }
            }
        }
        Ok(())
    }
    walk(&p.body, &classes, &labels)
}

fn describe(c: Class) -> &'static str {
    match c {
        Class::Bit => "a bit",
        Class::Int => "an integer",
        Class::Array1 => "a 1-D array",
        Class::Array2 => "a 2-D array",
    }
}
