//! Ready-made circuits.

use super::{Circuit, CircuitBuilder, GateKind, Literal};
use crate::matching::{edge_list, perfect_matchings};

const PM4_INPUTS: [&str; 6] = ["x12", "x13", "x14", "x23", "x24", "x34"];

/// Perfect matching on four nodes, minimal form: three ANDs, two ORs.
pub fn pm4_circuit() -> Circuit {
    let mut b = CircuitBuilder::new();
    let [x12, x13, x14, x23, x24, x34] = PM4_INPUTS.map(|n| b.input(n));
    let y12 = b.gate(GateKind::And, x12, x34, "y12");
    let y13 = b.gate(GateKind::And, x13, x24, "y13");
    let y14 = b.gate(GateKind::And, x14, x23, "y14");
    let s = b.gate(GateKind::Or, y12, y13, "s");
    let w = b.gate(GateKind::Or, s, y14, "w");
    b.finish(w).expect("valid circuit")
}

/// Seven-gate form with five ANDs and two ORs. Later matchings are masked by
/// earlier ones, so at most one of `y12`, `y13`, `y14` is set.
pub fn pm4_circuit_paper() -> Circuit {
    let mut b = CircuitBuilder::new();
    let [x12, x13, x14, x23, x24, x34] = PM4_INPUTS.map(|n| b.input(n));
    let y12 = b.gate(GateKind::And, x12, x34, "y12");
    let a13 = b.gate(GateKind::And, x13, x24, "a13");
    let y13 = b.gate(GateKind::And, a13, y12.not(), "y13");
    let a14 = b.gate(GateKind::And, x14, x23, "a14");
    let s = b.gate(GateKind::Or, y12, y13, "s");
    let y14 = b.gate(GateKind::And, a14, s.not(), "y14");
    let w = b.gate(GateKind::Or, s, y14, "w");
    b.finish(w).expect("valid circuit")
}

/// Input layout of [`threshold_matching_circuit`]: `weight_bits` bits per
/// edge of K_n in lexicographic edge order, least significant bit first,
/// followed by `k_bits` bits of the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdLayout {
    pub n: usize,
    pub weight_bits: usize,
    pub k_bits: usize,
}

impl ThresholdLayout {
    pub fn new(n: usize, weight_bits: usize) -> Self {
        let max = (n / 2) as u64 * ((1u64 << weight_bits) - 1);
        let k_bits = (u64::BITS - max.leading_zeros()).max(1) as usize;
        ThresholdLayout { n, weight_bits, k_bits }
    }

    pub fn num_edges(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// Largest possible perfect matching weight.
    pub fn max_total(&self) -> u64 {
        (self.n / 2) as u64 * ((1u64 << self.weight_bits) - 1)
    }

    pub fn input_bits(&self, weights: &[u64], k: u64) -> Vec<bool> {
        assert_eq!(weights.len(), self.num_edges());
        let mut bits = Vec::with_capacity(self.num_edges() * self.weight_bits + self.k_bits);
        for &w in weights {
            assert!(w < 1 << self.weight_bits, "weight {w} needs more than {} bits", self.weight_bits);
            bits.extend((0..self.weight_bits).map(|b| w >> b & 1 == 1));
        }
        assert!(k < 1 << self.k_bits, "threshold {k} needs more than {} bits", self.k_bits);
        bits.extend((0..self.k_bits).map(|b| k >> b & 1 == 1));
        bits
    }
}

/// A bit that is either a known constant or a circuit literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bit {
    Const(bool),
    Lit(Literal),
}

struct Folding {
    b: CircuitBuilder,
}

impl Folding {
    fn and(&mut self, x: Bit, y: Bit) -> Bit {
        match (x, y) {
            (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::Const(false),
            (Bit::Const(true), o) | (o, Bit::Const(true)) => o,
            (Bit::Lit(p), Bit::Lit(q)) => Bit::Lit(self.b.and(p, q)),
        }
    }

    fn or(&mut self, x: Bit, y: Bit) -> Bit {
        match (x, y) {
            (Bit::Const(true), _) | (_, Bit::Const(true)) => Bit::Const(true),
            (Bit::Const(false), o) | (o, Bit::Const(false)) => o,
            (Bit::Lit(p), Bit::Lit(q)) => Bit::Lit(self.b.or(p, q)),
        }
    }

    fn not(x: Bit) -> Bit {
        match x {
            Bit::Const(c) => Bit::Const(!c),
            Bit::Lit(l) => Bit::Lit(l.not()),
        }
    }

    fn xor(&mut self, x: Bit, y: Bit) -> Bit {
        match (x, y) {
            (Bit::Const(c), o) | (o, Bit::Const(c)) => {
                if c {
                    Self::not(o)
                } else {
                    o
                }
            }
            (Bit::Lit(p), Bit::Lit(q)) => Bit::Lit(self.b.xor(p, q)),
        }
    }

    /// Ripple-carry sum, least significant bit first.
    fn add(&mut self, x: &[Bit], y: &[Bit]) -> Vec<Bit> {
        let width = x.len().max(y.len());
        let mut carry = Bit::Const(false);
        let mut out = Vec::with_capacity(width + 1);
        for i in 0..width {
            let a = x.get(i).copied().unwrap_or(Bit::Const(false));
            let c = y.get(i).copied().unwrap_or(Bit::Const(false));
            let half = self.xor(a, c);
            out.push(self.xor(half, carry));
            let both = self.and(a, c);
            let through = self.and(half, carry);
            carry = self.or(both, through);
        }
        out.push(carry);
        out
    }

    /// `x >= y` as unsigned numbers, least significant bit first.
    fn ge(&mut self, x: &[Bit], y: &[Bit]) -> Bit {
        let mut ge = Bit::Const(true);
        for i in 0..x.len().max(y.len()) {
            let a = x.get(i).copied().unwrap_or(Bit::Const(false));
            let c = y.get(i).copied().unwrap_or(Bit::Const(false));
            let greater = self.and(a, Self::not(c));
            let differ = self.xor(a, c);
            let tie = self.and(Self::not(differ), ge);
            ge = self.or(greater, tie);
        }
        ge
    }
}

/// Decides "K_n with the given edge weights has a perfect matching of total
/// weight at least k".
pub fn threshold_matching_circuit(layout: ThresholdLayout) -> Circuit {
    let mut f = Folding { b: CircuitBuilder::new() };
    let edges = edge_list(layout.n);
    let weights: Vec<Vec<Bit>> = edges
        .iter()
        .map(|(i, j)| {
            (0..layout.weight_bits)
                .map(|bit| Bit::Lit(f.b.input(format!("w{}{}_{}", i + 1, j + 1, bit + 1))))
                .collect()
        })
        .collect();
    let k: Vec<Bit> = (0..layout.k_bits).map(|bit| Bit::Lit(f.b.input(format!("k_{}", bit + 1)))).collect();
    let mut any = Bit::Const(false);
    for matching in perfect_matchings(layout.n) {
        let mut total: Vec<Bit> = Vec::new();
        for e in matching {
            total = f.add(&total, &weights[e]);
        }
        let ok = f.ge(&total, &k);
        any = f.or(any, ok);
    }
    let out = match any {
        Bit::Lit(l) => l,
        Bit::Const(c) => {
            // constant answer still needs a gate; x & !x or x | !x
            let x = Literal::input(0);
            if c {
                f.b.or(x, x.not())
            } else {
                f.b.and(x, x.not())
            }
        }
    };
    f.b.finish(out).expect("valid circuit")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_variant_has_five_and_two_or() {
        let c = pm4_circuit_paper();
        let ands = c.gates().iter().filter(|g| g.kind == GateKind::And).count();
        assert_eq!((ands, c.gates().len() - ands), (5, 2));
    }

    #[test]
    fn threshold_circuit_on_small_cases() {
        let layout = ThresholdLayout::new(2, 3);
        assert_eq!(layout.k_bits, 3);
        let c = threshold_matching_circuit(layout);
        for w in 0..8 {
            for k in 0..8 {
                assert_eq!(c.eval(&layout.input_bits(&[w], k)).unwrap().w, w >= k, "w={w} k={k}");
            }
        }
    }
}
