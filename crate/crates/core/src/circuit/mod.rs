//! Boolean circuits of binary AND/OR gates over possibly negated literals.

mod encode;
mod library;
mod text;

pub use encode::encode;
pub use library::{pm4_circuit, pm4_circuit_paper, threshold_matching_circuit, ThresholdLayout};
pub use text::{parse_circuit, print_circuit};

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate {gate} refers to gate {target}, which is not earlier")]
    NotTopological { gate: usize, target: usize },
    #[error("gate {gate} refers to input {input}, but there are only {inputs} inputs")]
    BadInput { gate: usize, input: usize, inputs: usize },
    #[error("circuit has no gates")]
    NoGates,
    #[error("expected {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Input(usize),
    Gate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub node: Node,
    pub negated: bool,
}

impl Literal {
    pub fn input(i: usize) -> Self {
        Literal { node: Node::Input(i), negated: false }
    }

    pub fn gate(g: usize) -> Self {
        Literal { node: Node::Gate(g), negated: false }
    }

    #[must_use]
    pub fn not(self) -> Self {
        Literal { negated: !self.negated, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: [Literal; 2],
    pub label: String,
}

/// Gates in topological order; the last gate is the output. Gates only read
/// earlier gates, so the output never feeds another gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    input_names: Vec<String>,
    gates: Vec<Gate>,
}

/// Output bit plus the value of every gate, in gate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub w: bool,
    pub gate_values: Vec<bool>,
}

impl Circuit {
    pub fn new(input_names: Vec<String>, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if gates.is_empty() {
            return Err(CircuitError::NoGates);
        }
        for (g, gate) in gates.iter().enumerate() {
            for lit in gate.inputs {
                match lit.node {
                    Node::Input(i) if i >= input_names.len() => {
                        return Err(CircuitError::BadInput { gate: g, input: i, inputs: input_names.len() })
                    }
                    Node::Gate(h) if h >= g => return Err(CircuitError::NotTopological { gate: g, target: h }),
                    _ => {}
                }
            }
        }
        Ok(Circuit { input_names, gates })
    }

    pub fn num_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// The first `k` gates, with gate `k-1` as output.
    pub fn prefix(&self, k: usize) -> Circuit {
        assert!(k >= 1 && k <= self.gates.len());
        Circuit { input_names: self.input_names.clone(), gates: self.gates[..k].to_vec() }
    }

    pub fn eval(&self, input: &[bool]) -> Result<Evaluation, CircuitError> {
        if input.len() != self.num_inputs() {
            return Err(CircuitError::InputLength { expected: self.num_inputs(), got: input.len() });
        }
        let mut values = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let [a, b] = gate.inputs.map(|lit| {
                let v = match lit.node {
                    Node::Input(i) => input[i],
                    Node::Gate(g) => values[g],
                };
                v != lit.negated
            });
            values.push(match gate.kind {
                GateKind::And => a && b,
                GateKind::Or => a || b,
            });
        }
        Ok(Evaluation { w: *values.last().expect("nonempty"), gate_values: values })
    }
}

/// Incremental construction with automatic labels.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    input_names: Vec<String>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, name: impl Into<String>) -> Literal {
        self.input_names.push(name.into());
        Literal::input(self.input_names.len() - 1)
    }

    pub fn gate(&mut self, kind: GateKind, a: Literal, b: Literal, label: impl Into<String>) -> Literal {
        self.gates.push(Gate { kind, inputs: [a, b], label: label.into() });
        Literal::gate(self.gates.len() - 1)
    }

    pub fn and(&mut self, a: Literal, b: Literal) -> Literal {
        let label = format!("g{}", self.gates.len() + 1);
        self.gate(GateKind::And, a, b, label)
    }

    pub fn or(&mut self, a: Literal, b: Literal) -> Literal {
        let label = format!("g{}", self.gates.len() + 1);
        self.gate(GateKind::Or, a, b, label)
    }

    /// Three gates: (a | b) & !(a & b).
    pub fn xor(&mut self, a: Literal, b: Literal) -> Literal {
        let any = self.or(a, b);
        let both = self.and(a, b);
        self.and(any, both.not())
    }

    /// Balanced OR over a nonempty list.
    pub fn or_all(&mut self, lits: &[Literal]) -> Literal {
        assert!(!lits.is_empty());
        let mut layer = lits.to_vec();
        while layer.len() > 1 {
            layer = layer.chunks(2).map(|c| if c.len() == 2 { self.or(c[0], c[1]) } else { c[0] }).collect();
        }
        layer[0]
    }

    /// Finishes with `output` as the last gate labelled `w`. If `output` is
    /// not already the last gate, a gate `output & output` is appended.
    pub fn finish(mut self, output: Literal) -> Result<Circuit, CircuitError> {
        let is_last = !output.negated && output.node == Node::Gate(self.gates.len().wrapping_sub(1));
        if is_last {
            self.gates.last_mut().expect("gate exists").label = "w".into();
        } else {
            self.gates.push(Gate { kind: GateKind::And, inputs: [output, output], label: "w".into() });
        }
        Circuit::new(self.input_names, self.gates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_forward_references() {
        let g = Gate { kind: GateKind::And, inputs: [Literal::input(0), Literal::gate(0)], label: "y".into() };
        assert_eq!(
            Circuit::new(vec!["a".into()], vec![g]),
            Err(CircuitError::NotTopological { gate: 0, target: 0 })
        );
    }

    #[test]
    fn builder_xor_matches_truth_table() {
        let mut b = CircuitBuilder::new();
        let x = b.input("x");
        let y = b.input("y");
        let o = b.xor(x, y);
        let c = b.finish(o).unwrap();
        for (i, j) in [(false, false), (false, true), (true, false), (true, true)] {
            assert_eq!(c.eval(&[i, j]).unwrap().w, i ^ j);
        }
        assert_eq!(c.gates().last().unwrap().label, "w");
    }

    #[test]
    fn finish_appends_when_output_is_negated() {
        let mut b = CircuitBuilder::new();
        let x = b.input("x");
        let y = b.input("y");
        let g = b.and(x, y);
        let c = b.finish(g.not()).unwrap();
        assert_eq!(c.gates().len(), 2);
        assert!(c.eval(&[false, true]).unwrap().w);
        assert!(!c.eval(&[true, true]).unwrap().w);
    }
}
