//! Bound propagation and problem reduction ahead of the simplex.
//!
//! Propagation only ever replaces a bound by one implied by a single row and
//! the other variables' bounds, so the feasible set is unchanged. Variables
//! whose bounds meet are substituted out and rows that became vacuous are
//! dropped.

use std::collections::VecDeque;

use crate::rat::Rat;
use crate::simplex::{Problem, Row};
use crate::system::{Bounds, LPSystem, Sense};

/// Cap on row visits, as a multiple of the row count.
const VISIT_FACTOR: usize = 64;

pub(crate) struct Infeasible;

struct Activity {
    min: Rat,
    min_inf: usize,
    max: Rat,
    max_inf: usize,
}

fn activity(terms: &[(usize, Rat)], bounds: &[Bounds]) -> Activity {
    let mut a = Activity { min: Rat::zero(), min_inf: 0, max: Rat::zero(), max_inf: 0 };
    for (j, c) in terms {
        let b = &bounds[*j];
        let (lo_src, hi_src) = if c.is_positive() { (&b.lower, &b.upper) } else { (&b.upper, &b.lower) };
        match lo_src {
            Some(v) => a.min += c * v,
            None => a.min_inf += 1,
        }
        match hi_src {
            Some(v) => a.max += c * v,
            None => a.max_inf += 1,
        }
    }
    a
}

fn row_range(sense: Sense, rhs: &Rat) -> (Option<Rat>, Option<Rat>) {
    match sense {
        Sense::Le => (None, Some(rhs.clone())),
        Sense::Ge => (Some(rhs.clone()), None),
        Sense::Eq => (Some(rhs.clone()), Some(rhs.clone())),
    }
}

/// Tightens `bounds` to a fixpoint (or the visit cap).
pub(crate) fn propagate(system: &LPSystem, bounds: &mut [Bounds]) -> Result<(), Infeasible> {
    let rows: Vec<(Vec<(usize, Rat)>, Option<Rat>, Option<Rat>)> = system
        .constraints()
        .iter()
        .map(|c| {
            let (lo, hi) = row_range(c.sense, &c.rhs);
            (c.terms().iter().map(|(v, a)| (v.0, a.clone())).collect(), lo, hi)
        })
        .collect();
    let mut var_rows: Vec<Vec<usize>> = vec![Vec::new(); bounds.len()];
    for (i, (terms, _, _)) in rows.iter().enumerate() {
        for (j, _) in terms {
            var_rows[*j].push(i);
        }
    }
    for b in bounds.iter() {
        if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
            if l > u {
                return Err(Infeasible);
            }
        }
    }
    let mut queued = vec![true; rows.len()];
    let mut queue: VecDeque<usize> = (0..rows.len()).collect();
    let mut budget = VISIT_FACTOR * rows.len().max(1);
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        if budget == 0 {
            break;
        }
        budget -= 1;
        let (terms, lo, hi) = &rows[i];
        let act = activity(terms, bounds);
        if let Some(h) = hi {
            if act.min_inf == 0 && &act.min > h {
                return Err(Infeasible);
            }
        }
        if let Some(l) = lo {
            if act.max_inf == 0 && &act.max < l {
                return Err(Infeasible);
            }
        }
        for (j, c) in terms {
            let b = &bounds[*j];
            let mut new_lo: Option<Rat> = None;
            let mut new_hi: Option<Rat> = None;
            // c·x <= hi - (min activity of the other terms)
            if let Some(h) = hi {
                let own_min = if c.is_positive() { &b.lower } else { &b.upper };
                let others = match own_min {
                    Some(v) if act.min_inf == 0 => Some(&act.min - c * v),
                    None if act.min_inf == 1 => Some(act.min.clone()),
                    _ => None,
                };
                if let Some(o) = others {
                    let cap = (h - &o) / c;
                    if c.is_positive() {
                        new_hi = Some(cap);
                    } else {
                        new_lo = Some(cap);
                    }
                }
            }
            // c·x >= lo - (max activity of the other terms)
            if let Some(l) = lo {
                let own_max = if c.is_positive() { &b.upper } else { &b.lower };
                let others = match own_max {
                    Some(v) if act.max_inf == 0 => Some(&act.max - c * v),
                    None if act.max_inf == 1 => Some(act.max.clone()),
                    _ => None,
                };
                if let Some(o) = others {
                    let floor = (l - &o) / c;
                    if c.is_positive() {
                        new_lo = Some(match new_lo {
                            Some(x) if x > floor => x,
                            _ => floor,
                        });
                    } else {
                        new_hi = Some(match new_hi {
                            Some(x) if x < floor => x,
                            _ => floor,
                        });
                    }
                }
            }
            let mut changed = false;
            let b = &mut bounds[*j];
            if let Some(nl) = new_lo {
                if b.lower.as_ref().is_none_or(|cur| &nl > cur) {
                    b.lower = Some(nl);
                    changed = true;
                }
            }
            if let Some(nh) = new_hi {
                if b.upper.as_ref().is_none_or(|cur| &nh < cur) {
                    b.upper = Some(nh);
                    changed = true;
                }
            }
            if changed {
                if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                    if l > u {
                        return Err(Infeasible);
                    }
                }
                for &r in &var_rows[*j] {
                    if r != i && !queued[r] {
                        queued[r] = true;
                        queue.push_back(r);
                    }
                }
            }
        }
    }
    Ok(())
}

/// A reduced problem plus what is needed to map its solution back.
pub(crate) struct Reduced {
    pub problem: Problem,
    /// Column in the reduced problem for each original variable, or `None`
    /// when the variable was fixed.
    pub column: Vec<Option<usize>>,
    pub fixed_value: Vec<Option<Rat>>,
}

impl Reduced {
    pub fn expand(&self, reduced_point: &[Rat]) -> Vec<Rat> {
        self.column
            .iter()
            .zip(&self.fixed_value)
            .map(|(col, fixed)| match (col, fixed) {
                (Some(c), _) => reduced_point[*c].clone(),
                (None, Some(v)) => v.clone(),
                (None, None) => unreachable!("variable neither kept nor fixed"),
            })
            .collect()
    }
}

/// Builds the reduced problem; `cost` is dense over the original variables.
pub(crate) fn reduce(
    system: &LPSystem,
    cost: &[Rat],
    propagate_bounds: bool,
) -> Result<Reduced, Infeasible> {
    let mut bounds: Vec<Bounds> = system.all_bounds().to_vec();
    if propagate_bounds {
        propagate(system, &mut bounds)?;
    } else if bounds.iter().any(|b| matches!((&b.lower, &b.upper), (Some(l), Some(u)) if l > u)) {
        return Err(Infeasible);
    }
    let n = bounds.len();
    let mut column = vec![None; n];
    let mut fixed_value = vec![None; n];
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut red_cost = Vec::new();
    for (j, b) in bounds.iter().enumerate() {
        if propagate_bounds && b.is_fixed() {
            let v = b.lower.clone().unwrap();
            fixed_value[j] = Some(v);
        } else {
            column[j] = Some(lower.len());
            lower.push(b.lower.clone());
            upper.push(b.upper.clone());
            red_cost.push(cost[j].clone());
        }
    }
    let kept_bounds: Vec<Bounds> =
        lower.iter().zip(&upper).map(|(l, u)| Bounds { lower: l.clone(), upper: u.clone() }).collect();
    let mut rows = Vec::new();
    for c in system.constraints() {
        let mut shift = Rat::zero();
        let mut terms = Vec::new();
        for (v, a) in c.terms() {
            match column[v.0] {
                Some(col) => terms.push((col, a.clone())),
                None => shift += a * fixed_value[v.0].as_ref().unwrap(),
            }
        }
        let rhs = &c.rhs - &shift;
        if terms.is_empty() {
            if !c.sense.holds(&Rat::zero(), &rhs) {
                return Err(Infeasible);
            }
            continue;
        }
        let (lo, hi) = row_range(c.sense, &rhs);
        if propagate_bounds {
            let act = activity(&terms, &kept_bounds);
            let lo_redundant = lo.as_ref().is_none_or(|l| act.min_inf == 0 && &act.min >= l);
            let hi_redundant = hi.as_ref().is_none_or(|h| act.max_inf == 0 && &act.max <= h);
            if lo_redundant && hi_redundant {
                continue;
            }
        }
        rows.push(Row { terms, lo, hi });
    }
    Ok(Reduced { problem: Problem { lower, upper, rows, cost: red_cost }, column, fixed_value })
}
