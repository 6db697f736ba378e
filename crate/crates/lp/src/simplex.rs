//! Primal bounded simplex over exact rationals.
//!
//! Every row `a·x` gets an activity variable `r = a·x` whose bounds encode the
//! row sense, so the equality system is homogeneous and the tableau stores
//! each basic variable as a linear combination of the nonbasic ones.
//! Rows that start out violated get an artificial variable; phase one drives
//! those to zero. Entering and leaving choices follow Bland's rule.

use crate::rat::Rat;

/// Row of the internal problem: `lo <= Σ coef·x <= hi`.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub terms: Vec<(usize, Rat)>,
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
    pub rows: Vec<Row>,
    /// Dense objective over the structural columns (maximized).
    pub cost: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal(Vec<Rat>),
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic(usize),
    Nonbasic(usize),
}

struct Tableau {
    lower: Vec<Option<Rat>>,
    upper: Vec<Option<Rat>>,
    value: Vec<Rat>,
    pos: Vec<Pos>,
    /// `basis[row]` is the variable basic in that row.
    basis: Vec<usize>,
    /// `slot_var[slot]` is the nonbasic variable occupying that column.
    slot_var: Vec<usize>,
    rows: Vec<Vec<Rat>>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl Tableau {
    fn can_increase(&self, v: usize) -> bool {
        self.upper[v].as_ref().is_none_or(|u| &self.value[v] < u)
    }

    fn can_decrease(&self, v: usize) -> bool {
        self.lower[v].as_ref().is_none_or(|l| &self.value[v] > l)
    }

    /// One Bland iteration against the reduced-cost row `d`.
    fn step(&mut self, d: &mut [Rat]) -> Step {
        let mut entering: Option<(usize, i32)> = None;
        for (slot, dj) in d.iter().enumerate() {
            let var = self.slot_var[slot];
            let dir = if dj.is_positive() && self.can_increase(var) {
                1
            } else if dj.is_negative() && self.can_decrease(var) {
                -1
            } else {
                continue;
            };
            if entering.is_none_or(|(s, _)| var < self.slot_var[s]) {
                entering = Some((slot, dir));
            }
        }
        let Some((q, dir)) = entering else {
            return Step::Optimal;
        };
        let e = self.slot_var[q];

        // (theta, leaving row or None for a bound flip, tie-break var index)
        let mut best: Option<(Rat, Option<usize>, usize)> = None;
        let consider = |theta: Rat, row: Option<usize>, var: usize, best: &mut Option<(Rat, Option<usize>, usize)>| {
            let better = match best {
                None => true,
                Some((t, _, v)) => theta < *t || (theta == *t && var < *v),
            };
            if better {
                *best = Some((theta, row, var));
            }
        };
        if dir > 0 {
            if let Some(u) = &self.upper[e] {
                consider(u - &self.value[e], None, e, &mut best);
            }
        } else if let Some(l) = &self.lower[e] {
            consider(&self.value[e] - l, None, e, &mut best);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[q];
            if a.is_zero() {
                continue;
            }
            let b = self.basis[i];
            let increasing = (a.is_positive()) == (dir > 0);
            let limit = if increasing {
                self.upper[b].as_ref().map(|u| (u - &self.value[b]) / a.abs())
            } else {
                self.lower[b].as_ref().map(|l| (&self.value[b] - l) / a.abs())
            };
            if let Some(theta) = limit {
                consider(theta, Some(i), b, &mut best);
            }
        }
        let Some((theta, leave, _)) = best else {
            return Step::Unbounded;
        };

        let delta = if dir > 0 { theta.clone() } else { -&theta };
        if !delta.is_zero() {
            self.value[e] += &delta;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_zero() {
                    let b = self.basis[i];
                    let change = a * &delta;
                    self.value[b] += change;
                }
            }
        }
        match leave {
            None => {}
            Some(p) => {
                let l = self.basis[p];
                // snap exactly onto the bound that blocked the step
                let increasing = self.rows[p][q].is_positive() == (dir > 0);
                self.value[l] = if increasing {
                    self.upper[l].clone().expect("blocking bound")
                } else {
                    self.lower[l].clone().expect("blocking bound")
                };
                self.pivot(p, q, d);
            }
        }
        Step::Moved
    }

    fn pivot(&mut self, p: usize, q: usize, d: &mut [Rat]) {
        self.pivots += 1;
        let e = self.slot_var[q];
        let l = self.basis[p];
        let inv = self.rows[p][q].recip();
        let mut new_row = std::mem::take(&mut self.rows[p]);
        for (j, c) in new_row.iter_mut().enumerate() {
            if j == q {
                *c = inv.clone();
            } else if !c.is_zero() {
                *c = -(&*c * &inv);
            }
        }
        let nz: Vec<usize> = (0..new_row.len()).filter(|&j| j != q && !new_row[j].is_zero()).collect();
        let apply = |row: &mut [Rat]| {
            let f = std::mem::take(&mut row[q]);
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let add = &f * &new_row[j];
                row[j] += add;
            }
            row[q] = &f * &new_row[q];
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != p {
                apply(row);
            }
        }
        apply(d);
        self.rows[p] = new_row;
        self.basis[p] = e;
        self.slot_var[q] = l;
        self.pos[e] = Pos::Basic(p);
        self.pos[l] = Pos::Nonbasic(q);
    }

    /// Reduced costs for `maximize Σ cost[v]·v` over all variables.
    fn pricing_row(&self, cost: &[(usize, Rat)]) -> Vec<Rat> {
        let mut d = vec![Rat::zero(); self.slot_var.len()];
        for (v, c) in cost {
            match self.pos[*v] {
                Pos::Nonbasic(s) => d[s] += c,
                Pos::Basic(r) => {
                    for (j, a) in self.rows[r].iter().enumerate() {
                        if !a.is_zero() {
                            d[j] += c * a;
                        }
                    }
                }
            }
        }
        d
    }

    fn run(&mut self, cost: &[(usize, Rat)]) -> bool {
        let mut d = self.pricing_row(cost);
        loop {
            match self.step(&mut d) {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Moved => {}
            }
        }
    }
}

fn resting_value(lo: &Option<Rat>, hi: &Option<Rat>) -> Rat {
    match (lo, hi) {
        (Some(l), _) => l.clone(),
        (None, Some(u)) => u.clone(),
        (None, None) => Rat::zero(),
    }
}

pub(crate) fn solve(problem: &Problem) -> Outcome {
    solve_counted(problem).0
}

/// Solves and also reports the number of basis changes performed.
pub(crate) fn solve_counted(problem: &Problem) -> (Outcome, usize) {
    let n = problem.lower.len();
    let m = problem.rows.len();
    let mut lower = problem.lower.clone();
    let mut upper = problem.upper.clone();
    let mut value: Vec<Rat> = (0..n).map(|j| resting_value(&lower[j], &upper[j])).collect();

    // row activity variables n..n+m
    let mut activity = Vec::with_capacity(m);
    for row in &problem.rows {
        let act: Rat = row.terms.iter().map(|(j, c)| c * &value[*j]).sum();
        lower.push(row.lo.clone());
        upper.push(row.hi.clone());
        activity.push(act);
    }

    let mut art_rows = Vec::new();
    for (i, row) in problem.rows.iter().enumerate() {
        let act = &activity[i];
        if row.hi.as_ref().is_some_and(|h| act > h) || row.lo.as_ref().is_some_and(|l| act < l) {
            art_rows.push(i);
        }
    }
    let slots = n + art_rows.len();
    let mut slot_var: Vec<usize> = (0..n).collect();
    let mut pos: Vec<Pos> = (0..n).map(Pos::Nonbasic).collect();
    pos.extend((0..m).map(|i| Pos::Basic(i)));
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for row in &problem.rows {
        let mut dense = vec![Rat::zero(); slots];
        for (j, c) in &row.terms {
            dense[*j] += c;
        }
        rows.push(dense);
    }
    value.extend(activity.iter().cloned());

    let mut phase1_cost = Vec::new();
    for (k, &i) in art_rows.iter().enumerate() {
        let r = n + i;
        let act = activity[i].clone();
        let above = problem.rows[i].hi.as_ref().is_some_and(|h| &act > h);
        let bound = if above { upper[r].clone().unwrap() } else { lower[r].clone().unwrap() };
        // activity variable leaves the basis, parked at its violated bound
        let slot = n + k;
        slot_var.push(r);
        pos[r] = Pos::Nonbasic(slot);
        value[r] = bound.clone();
        let art = lower.len();
        let art_value = &act - &bound;
        if above {
            lower.push(Some(Rat::zero()));
            upper.push(None);
            phase1_cost.push((art, -Rat::one()));
        } else {
            lower.push(None);
            upper.push(Some(Rat::zero()));
            phase1_cost.push((art, Rat::one()));
        }
        value.push(art_value);
        pos.push(Pos::Basic(i));
        basis[i] = art;
        rows[i][slot] = -Rat::one();
    }

    let mut t = Tableau { lower, upper, value, pos, basis, slot_var, rows, pivots: 0 };

    if !phase1_cost.is_empty() {
        t.run(&phase1_cost);
        let infeasibility: Rat = phase1_cost.iter().map(|(v, c)| c * &t.value[*v]).sum();
        if infeasibility.is_negative() {
            return (Outcome::Infeasible, t.pivots);
        }
        for (v, _) in &phase1_cost {
            t.lower[*v] = Some(Rat::zero());
            t.upper[*v] = Some(Rat::zero());
        }
    }

    let cost: Vec<(usize, Rat)> = problem
        .cost
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j, c.clone()))
        .collect();
    if !t.run(&cost) {
        return (Outcome::Unbounded, t.pivots);
    }
    let pivots = t.pivots;
    t.value.truncate(n);
    (Outcome::Optimal(t.value), pivots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn unit_problem(n: usize, rows: Vec<Row>, cost: Vec<Rat>) -> Problem {
        Problem { lower: vec![Some(r(0)); n], upper: vec![Some(r(1)); n], rows, cost }
    }

    #[test]
    fn box_only() {
        let p = unit_problem(1, vec![], vec![r(1)]);
        assert_eq!(solve(&p), Outcome::Optimal(vec![r(1)]));
    }

    #[test]
    fn phase_one_equality() {
        // x + y = 3/2, maximize x - y  ->  x = 1, y = 1/2
        let p = unit_problem(
            2,
            vec![Row { terms: vec![(0, r(1)), (1, r(1))], lo: Some(rat(3, 2)), hi: Some(rat(3, 2)) }],
            vec![r(1), r(-1)],
        );
        assert_eq!(solve(&p), Outcome::Optimal(vec![r(1), rat(1, 2)]));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let p = unit_problem(
            1,
            vec![
                Row { terms: vec![(0, r(1))], lo: None, hi: Some(r(0)) },
                Row { terms: vec![(0, r(1))], lo: Some(r(1)), hi: None },
            ],
            vec![r(1)],
        );
        assert_eq!(solve(&p), Outcome::Infeasible);
        let free = Problem { lower: vec![None], upper: vec![None], rows: vec![], cost: vec![r(1)] };
        assert_eq!(solve(&free), Outcome::Unbounded);
    }

    #[test]
    fn free_variable_enters_negative() {
        // maximize -x subject to x >= -2, x free
        let p = Problem {
            lower: vec![None],
            upper: vec![None],
            rows: vec![Row { terms: vec![(0, r(1))], lo: Some(r(-2)), hi: None }],
            cost: vec![r(-1)],
        };
        assert_eq!(solve(&p), Outcome::Optimal(vec![r(-2)]));
    }
}
