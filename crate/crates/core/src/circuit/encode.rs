//! Gate-by-gate translation of a circuit into an LP system.
//!
//! Each gate contributes four rows and one variable:
//!
//! ```text
//! y = a & b:   a + b - y <= 1,  -a + y <= 0,  -b + y <= 0,  y >= 0
//! s = a | b:  -a - b + s <= 0,   a - s <= 0,   b - s <= 0,  s <= 1
//! ```
//!
//! A negated literal `!v` is substituted as `1 - v`, with the constant moved
//! into the right-hand side.

use wefc_lp::{LPSystem, LinConstraint, Rat, Sense, VarId};

use super::{Circuit, GateKind, Literal, Node};
use crate::wef::{Group, RowTag, WefSystem};

/// `Σ coef·literal  sense  rhs`, with literals expanded to variables.
fn literal_row(
    vars: &dyn Fn(Node) -> VarId,
    terms: &[(Literal, i64)],
    sense: Sense,
    rhs: i64,
) -> LinConstraint {
    let mut rhs = Rat::from_int(rhs);
    let mut expanded = Vec::with_capacity(terms.len());
    for &(lit, c) in terms {
        if lit.negated {
            // c·(1 - v) = c - c·v
            rhs -= Rat::from_int(c);
            expanded.push((vars(lit.node), Rat::from_int(-c)));
        } else {
            expanded.push((vars(lit.node), Rat::from_int(c)));
        }
    }
    LinConstraint::new(expanded, sense, rhs).expect("gate rows always keep the output term")
}

pub fn encode(circuit: &Circuit) -> WefSystem {
    let mut lp = LPSystem::new();
    let x_vars: Vec<VarId> = circuit.input_names().iter().map(|n| lp.add_var(n.clone())).collect();
    let gate_vars: Vec<VarId> = circuit.gates().iter().map(|g| lp.add_var(g.label.clone())).collect();
    let vars = |node: Node| match node {
        Node::Input(i) => x_vars[i],
        Node::Gate(g) => gate_vars[g],
    };
    let mut tags = Vec::with_capacity(4 * circuit.gates().len());
    for (g, gate) in circuit.gates().iter().enumerate() {
        let out = Literal::gate(g);
        let [a, b] = gate.inputs;
        let rows = match gate.kind {
            GateKind::And => [
                literal_row(&vars, &[(a, 1), (b, 1), (out, -1)], Sense::Le, 1),
                literal_row(&vars, &[(a, -1), (out, 1)], Sense::Le, 0),
                literal_row(&vars, &[(b, -1), (out, 1)], Sense::Le, 0),
                literal_row(&vars, &[(out, 1)], Sense::Ge, 0),
            ],
            GateKind::Or => [
                literal_row(&vars, &[(a, -1), (b, -1), (out, 1)], Sense::Le, 0),
                literal_row(&vars, &[(a, 1), (out, -1)], Sense::Le, 0),
                literal_row(&vars, &[(b, 1), (out, -1)], Sense::Le, 0),
                literal_row(&vars, &[(out, 1)], Sense::Le, 1),
            ],
        };
        for row in rows {
            lp.add_constraint(row).expect("variables exist");
            tags.push(RowTag { group: Group::Gate, detail: format!("{} {}", gate.kind, gate.label) });
        }
    }
    let w_var = *gate_vars.last().expect("circuit has gates");
    WefSystem { lp, x_vars, w_var, tags }
}
