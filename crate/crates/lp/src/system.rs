use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LpError;
use crate::rat::Rat;

/// Dense index of a variable inside one [`LPSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }
}

/// Variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Option<Rat>,
    pub upper: Option<Rat>,
}

impl Bounds {
    pub fn unit() -> Self {
        Bounds { lower: Some(Rat::zero()), upper: Some(Rat::one()) }
    }

    pub fn free() -> Self {
        Bounds { lower: None, upper: None }
    }

    pub fn non_negative() -> Self {
        Bounds { lower: Some(Rat::zero()), upper: None }
    }

    pub fn fixed(v: Rat) -> Self {
        Bounds { lower: Some(v.clone()), upper: Some(v) }
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.lower.as_ref().is_none_or(|l| l <= v) && self.upper.as_ref().is_none_or(|u| v <= u)
    }

    pub fn is_fixed(&self) -> bool {
        matches!((&self.lower, &self.upper), (Some(l), Some(u)) if l == u)
    }

    pub fn is_consistent(&self) -> bool {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::unit()
    }
}

/// A single linear row `Σ coef·var (<=|=|>=) rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinConstraint {
    terms: Vec<(VarId, Rat)>,
    pub sense: Sense,
    pub rhs: Rat,
}

impl LinConstraint {
    /// Merges repeated variables, drops zero coefficients and sorts terms
    /// by variable index. Fails if nothing is left.
    pub fn new(
        terms: impl IntoIterator<Item = (VarId, Rat)>,
        sense: Sense,
        rhs: Rat,
    ) -> Result<Self, LpError> {
        let mut merged: BTreeMap<VarId, Rat> = BTreeMap::new();
        for (v, c) in terms {
            *merged.entry(v).or_default() += c;
        }
        let terms: Vec<_> = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Err(LpError::EmptyConstraint);
        }
        Ok(LinConstraint { terms, sense, rhs })
    }

    pub fn le(terms: impl IntoIterator<Item = (VarId, Rat)>, rhs: Rat) -> Result<Self, LpError> {
        Self::new(terms, Sense::Le, rhs)
    }

    pub fn ge(terms: impl IntoIterator<Item = (VarId, Rat)>, rhs: Rat) -> Result<Self, LpError> {
        Self::new(terms, Sense::Ge, rhs)
    }

    pub fn eq(terms: impl IntoIterator<Item = (VarId, Rat)>, rhs: Rat) -> Result<Self, LpError> {
        Self::new(terms, Sense::Eq, rhs)
    }

    pub fn terms(&self) -> &[(VarId, Rat)] {
        &self.terms
    }

    pub fn coef(&self, v: VarId) -> Option<&Rat> {
        self.terms
            .binary_search_by_key(&v, |(id, _)| *id)
            .ok()
            .map(|i| &self.terms[i].1)
    }

    pub fn lhs(&self, point: &[Rat]) -> Rat {
        self.terms.iter().map(|(v, c)| c * &point[v.0]).sum()
    }

    pub fn is_satisfied(&self, point: &[Rat]) -> bool {
        self.sense.holds(&self.lhs(point), &self.rhs)
    }
}

/// Linear objective, always maximized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Objective {
    terms: Vec<(VarId, Rat)>,
}

impl Objective {
    pub fn maximize(terms: impl IntoIterator<Item = (VarId, Rat)>) -> Self {
        let mut merged: BTreeMap<VarId, Rat> = BTreeMap::new();
        for (v, c) in terms {
            *merged.entry(v).or_default() += c;
        }
        Objective { terms: merged.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn single(v: VarId) -> Self {
        Self::maximize([(v, Rat::one())])
    }

    pub fn terms(&self) -> &[(VarId, Rat)] {
        &self.terms
    }

    pub fn coef(&self, v: VarId) -> Rat {
        self.terms
            .binary_search_by_key(&v, |(id, _)| *id)
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_default()
    }

    pub fn negated(&self) -> Self {
        Objective { terms: self.terms.iter().map(|(v, c)| (*v, -c)).collect() }
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        self.terms.iter().map(|(v, c)| c * &point[v.0]).sum()
    }
}

/// A polyhedron given by variable bounds and linear rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LPSystem {
    bounds: Vec<Bounds>,
    names: Vec<String>,
    constraints: Vec<LinConstraint>,
}

impl LPSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a `[0,1]`-boxed variable.
    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var_with_bounds(name, Bounds::unit())
    }

    pub fn add_var_with_bounds(&mut self, name: impl Into<String>, bounds: Bounds) -> VarId {
        assert!(bounds.is_consistent(), "lower bound above upper bound");
        self.bounds.push(bounds);
        self.names.push(name.into());
        VarId(self.bounds.len() - 1)
    }

    pub fn add_constraint(&mut self, c: LinConstraint) -> Result<usize, LpError> {
        if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.num_vars()) {
            return Err(LpError::UnknownVar(v.0));
        }
        self.constraints.push(c);
        Ok(self.constraints.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[LinConstraint] {
        &self.constraints
    }

    pub fn bounds(&self, v: VarId) -> &Bounds {
        &self.bounds[v.0]
    }

    pub fn all_bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn set_bounds(&mut self, v: VarId, bounds: Bounds) -> Result<(), LpError> {
        if !bounds.is_consistent() {
            return Err(LpError::InvertedBounds(self.names[v.0].clone()));
        }
        self.bounds[v.0] = bounds;
        Ok(())
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.num_vars()).map(VarId)
    }

    /// Drops the constraint at `index`; used to build negative controls.
    pub fn remove_constraint(&mut self, index: usize) -> LinConstraint {
        self.constraints.remove(index)
    }

    /// Keeps only the rows for which `keep` returns true.
    pub fn retain_constraints(&mut self, mut keep: impl FnMut(usize, &LinConstraint) -> bool) {
        let mut i = 0;
        self.constraints.retain(|c| {
            let k = keep(i, c);
            i += 1;
            k
        });
    }

    /// Exact membership test for a full point.
    pub fn contains(&self, point: &[Rat]) -> bool {
        point.len() == self.num_vars()
            && self.bounds.iter().zip(point).all(|(b, v)| b.contains(v))
            && self.constraints.iter().all(|c| c.is_satisfied(point))
    }

    /// Checks the structural invariants: every referenced variable exists
    /// and every bound pair is ordered.
    pub fn validate(&self) -> Result<(), LpError> {
        if self.names.len() != self.bounds.len() {
            return Err(LpError::Malformed("name table and bound table differ in length".into()));
        }
        for (b, n) in self.bounds.iter().zip(&self.names) {
            if !b.is_consistent() {
                return Err(LpError::InvertedBounds(n.clone()));
            }
        }
        for c in &self.constraints {
            if c.terms.is_empty() {
                return Err(LpError::EmptyConstraint);
            }
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.num_vars()) {
                return Err(LpError::UnknownVar(v.0));
            }
            if c.terms.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(LpError::Malformed("constraint terms not strictly sorted".into()));
            }
        }
        Ok(())
    }
}

/// Returns a copy of `system` with each assigned variable pinned to its value.
pub fn fix_vars<'a>(
    system: &LPSystem,
    assignment: impl IntoIterator<Item = (VarId, &'a Rat)>,
) -> Result<LPSystem, LpError> {
    let mut out = system.clone();
    for (v, value) in assignment {
        if v.0 >= out.num_vars() {
            return Err(LpError::UnknownVar(v.0));
        }
        if !out.bounds[v.0].contains(value) {
            return Err(LpError::OutOfBounds { var: out.names[v.0].clone(), value: value.clone() });
        }
        out.bounds[v.0] = Bounds::fixed(value.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn constraint_merges_duplicates() {
        let c = LinConstraint::le([(VarId(2), rat(1, 1)), (VarId(0), rat(1, 2)), (VarId(2), rat(1, 1))], rat(1, 1))
            .unwrap();
        assert_eq!(c.terms(), &[(VarId(0), rat(1, 2)), (VarId(2), rat(2, 1))]);
        let e = LinConstraint::le([(VarId(1), rat(1, 1)), (VarId(1), rat(-1, 1))], rat(0, 1));
        assert_eq!(e, Err(LpError::EmptyConstraint));
    }

    #[test]
    fn fix_rejects_out_of_bounds() {
        let mut s = LPSystem::new();
        let x = s.add_var("x");
        let fixed = fix_vars(&s, [(x, &Rat::one())]).unwrap();
        assert_eq!(fixed.bounds(x), &Bounds::fixed(Rat::one()));
        assert!(matches!(fix_vars(&s, [(x, &rat(3, 2))]), Err(LpError::OutOfBounds { .. })));
    }

    #[test]
    fn unknown_var_rejected() {
        let mut s = LPSystem::new();
        s.add_var("x");
        let c = LinConstraint::le([(VarId(4), Rat::one())], Rat::one()).unwrap();
        assert_eq!(s.add_constraint(c), Err(LpError::UnknownVar(4)));
    }
}
