use crate::error::LpError;
use crate::presolve;
use crate::rat::Rat;
use crate::simplex::{self, Outcome};
use crate::system::{Bounds, LPSystem, Objective, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub z_star: Rat,
    pub point: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptResult {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl OptResult {
    pub fn optimal(&self) -> Option<&Solution> {
        match self {
            OptResult::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn z_star(&self) -> Option<&Rat> {
        self.optimal().map(|s| &s.z_star)
    }

    pub fn into_result(self, what: &str) -> Result<Solution, LpError> {
        match self {
            OptResult::Optimal(s) => Ok(s),
            OptResult::Infeasible => Err(LpError::Infeasible),
            OptResult::Unbounded => Err(LpError::Unbounded(what.to_string())),
        }
    }
}

/// Solver knobs. The default runs bound propagation first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub presolve: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { presolve: true }
    }
}

/// Maximizes `objective` over `system`.
pub fn solve(system: &LPSystem, objective: &Objective) -> OptResult {
    solve_with(system, objective, SolveOptions::default())
}

pub fn solve_with(system: &LPSystem, objective: &Objective, opts: SolveOptions) -> OptResult {
    let mut cost = vec![Rat::zero(); system.num_vars()];
    for (v, c) in objective.terms() {
        cost[v.0] = c.clone();
    }
    let reduced = match presolve::reduce(system, &cost, opts.presolve) {
        Ok(r) => r,
        Err(presolve::Infeasible) => return OptResult::Infeasible,
    };
    let point = if reduced.problem.lower.is_empty() {
        // every variable fixed; remaining rows were checked during reduction
        if !reduced.problem.rows.is_empty() {
            return OptResult::Infeasible;
        }
        reduced.expand(&[])
    } else {
        match simplex::solve(&reduced.problem) {
            Outcome::Optimal(p) => reduced.expand(&p),
            Outcome::Infeasible => return OptResult::Infeasible,
            Outcome::Unbounded => return OptResult::Unbounded,
        }
    };
    let z_star = objective.eval(&point);
    debug_assert!(system.contains(&point), "simplex returned an infeasible point");
    OptResult::Optimal(Solution { z_star, point })
}

/// Closed range of a variable over the feasible set; `None` ends are unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarRange {
    pub min: Option<Rat>,
    pub max: Option<Rat>,
}

impl VarRange {
    pub fn is_point(&self) -> bool {
        matches!((&self.min, &self.max), (Some(a), Some(b)) if a == b)
    }

    pub fn point(&self) -> Option<&Rat> {
        if self.is_point() {
            self.min.as_ref()
        } else {
            None
        }
    }
}

/// Range of `var` over the system; `Err(Infeasible)` if the system is empty.
pub fn var_range(system: &LPSystem, var: VarId) -> Result<VarRange, LpError> {
    if var.0 >= system.num_vars() {
        return Err(LpError::UnknownVar(var.0));
    }
    let max = match solve(system, &Objective::single(var)) {
        OptResult::Optimal(s) => Some(s.z_star),
        OptResult::Unbounded => None,
        OptResult::Infeasible => return Err(LpError::Infeasible),
    };
    let min = match solve(system, &Objective::single(var).negated()) {
        OptResult::Optimal(s) => Some(-s.z_star),
        OptResult::Unbounded => None,
        OptResult::Infeasible => return Err(LpError::Infeasible),
    };
    Ok(VarRange { min, max })
}

/// Ranges for several variables. Whenever a range collapses to a point the
/// variable is pinned and bounds are re-propagated, so later variables that
/// become implied skip their LP solves.
pub fn var_ranges(system: &LPSystem, vars: &[VarId]) -> Result<Vec<VarRange>, LpError> {
    if let Some(v) = vars.iter().find(|v| v.0 >= system.num_vars()) {
        return Err(LpError::UnknownVar(v.0));
    }
    let mut work = system.clone();
    tighten(&mut work)?;
    if solve(&work, &Objective::default()).optimal().is_none() {
        return Err(LpError::Infeasible);
    }
    let mut out = Vec::with_capacity(vars.len());
    for &v in vars {
        let b = work.bounds(v);
        if b.is_fixed() {
            let p = b.lower.clone();
            out.push(VarRange { min: p.clone(), max: p });
            continue;
        }
        let range = var_range(&work, v)?;
        if let Some(p) = range.point() {
            work.set_bounds(v, Bounds::fixed(p.clone()))?;
            tighten(&mut work)?;
        }
        out.push(range);
    }
    Ok(out)
}

/// Replaces the system's bounds by the propagated ones.
fn tighten(system: &mut LPSystem) -> Result<(), LpError> {
    let mut bounds = system.all_bounds().to_vec();
    if presolve::propagate(system, &mut bounds).is_err() {
        return Err(LpError::Infeasible);
    }
    for (j, b) in bounds.into_iter().enumerate() {
        system.set_bounds(VarId(j), b)?;
    }
    Ok(())
}
