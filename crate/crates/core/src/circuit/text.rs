//! Line-based circuit text format.
//!
//! ```text
//! INPUTS 2 a b
//! y = a & !b
//! w = y | b
//! OUTPUT w
//! ```
//!
//! Input names are optional and default to `x1..xn`. `#` starts a comment.
//! `OUTPUT` must name the last gate.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Circuit, CircuitError, Gate, GateKind, Literal, Node};

fn err(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, msg: msg.into() }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut names: HashMap<String, Node> = HashMap::new();
    let mut input_names: Option<Vec<String>> = None;
    let mut gates: Vec<Gate> = Vec::new();
    let mut output: Option<(usize, String)> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if output.is_some() {
            return Err(err(line, "nothing may follow OUTPUT"));
        }
        let mut words = content.split_whitespace();
        match words.next() {
            Some("INPUTS") => {
                if input_names.is_some() {
                    return Err(err(line, "duplicate INPUTS header"));
                }
                let n: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| err(line, "INPUTS needs a count"))?;
                let mut given: Vec<String> = words.map(String::from).collect();
                if given.is_empty() {
                    given = (1..=n).map(|i| format!("x{i}")).collect();
                } else if given.len() != n {
                    return Err(err(line, format!("INPUTS declares {n} inputs but names {}", given.len())));
                }
                for (i, name) in given.iter().enumerate() {
                    if names.insert(name.clone(), Node::Input(i)).is_some() {
                        return Err(err(line, format!("duplicate name `{name}`")));
                    }
                }
                input_names = Some(given);
            }
            Some("OUTPUT") => {
                let name = words.next().ok_or_else(|| err(line, "OUTPUT needs a gate name"))?;
                output = Some((line, name.to_string()));
            }
            Some(_) => {
                if input_names.is_none() {
                    return Err(err(line, "gate before INPUTS header"));
                }
                let (label, rhs) = content.split_once('=').ok_or_else(|| err(line, "expected `name = a & b`"))?;
                let label = label.trim();
                if label.is_empty() || label.contains(char::is_whitespace) {
                    return Err(err(line, "bad gate name"));
                }
                let (kind, a, b) = if let Some((a, b)) = rhs.split_once('&') {
                    (GateKind::And, a, b)
                } else if let Some((a, b)) = rhs.split_once('|') {
                    (GateKind::Or, a, b)
                } else {
                    return Err(err(line, "expected `&` or `|`"));
                };
                let lit = |s: &str| -> Result<Literal, CircuitError> {
                    let s = s.trim();
                    let (negated, name) = match s.strip_prefix('!') {
                        Some(rest) => (true, rest.trim()),
                        None => (false, s),
                    };
                    let node = *names.get(name).ok_or_else(|| err(line, format!("unknown name `{name}`")))?;
                    Ok(Literal { node, negated })
                };
                let inputs = [lit(a)?, lit(b)?];
                if names.insert(label.to_string(), Node::Gate(gates.len())).is_some() {
                    return Err(err(line, format!("duplicate name `{label}`")));
                }
                gates.push(Gate { kind, inputs, label: label.to_string() });
            }
            None => unreachable!("empty lines skipped"),
        }
    }
    let input_names = input_names.ok_or_else(|| err(last_line, "missing INPUTS header"))?;
    let (line, out) = output.ok_or_else(|| err(last_line, "missing OUTPUT line"))?;
    match gates.last() {
        Some(g) if g.label == out => {}
        _ => return Err(err(line, format!("OUTPUT `{out}` is not the last gate"))),
    }
    Circuit::new(input_names, gates)
}

pub fn print_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "INPUTS {} {}", circuit.num_inputs(), circuit.input_names().join(" "));
    let name = |lit: Literal| {
        let base = match lit.node {
            Node::Input(i) => circuit.input_names()[i].as_str(),
            Node::Gate(g) => circuit.gates()[g].label.as_str(),
        };
        if lit.negated {
            format!("!{base}")
        } else {
            base.to_string()
        }
    };
    for g in circuit.gates() {
        let op = match g.kind {
            GateKind::And => '&',
            GateKind::Or => '|',
        };
        let _ = writeln!(out, "{} = {} {op} {}", g.label, name(g.inputs[0]), name(g.inputs[1]));
    }
    let _ = writeln!(out, "OUTPUT {}", circuit.gates().last().expect("nonempty").label);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{pm4_circuit, pm4_circuit_paper};

    #[test]
    fn roundtrip_library_circuits() {
        for c in [pm4_circuit(), pm4_circuit_paper()] {
            let text = print_circuit(&c);
            assert_eq!(parse_circuit(&text).unwrap(), c);
        }
    }

    #[test]
    fn default_input_names_and_comments() {
        let c = parse_circuit("# demo\nINPUTS 2\nw = x1 & !x2  # gate\nOUTPUT w\n").unwrap();
        assert_eq!(c.input_names(), &["x1".to_string(), "x2".to_string()]);
        assert!(c.eval(&[true, false]).unwrap().w);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse_circuit("INPUTS 1 a\nw = a & b\nOUTPUT w\n").unwrap_err();
        assert_eq!(e, CircuitError::Parse { line: 2, msg: "unknown name `b`".into() });
        let e = parse_circuit("INPUTS 1 a\ny = a & a\nw = a | y\nOUTPUT y\n").unwrap_err();
        assert!(matches!(e, CircuitError::Parse { line: 4, .. }));
    }
}
