//! Decision semantics on top of any [`WefSystem`]: the ±1 objective, exact
//! yes/no decisions, the safe-d search, exhaustive x-0/1 verification and
//! binary-search optimization over a threshold family.

use std::fmt;

use wefc_lp::{fix_vars, solve, var_ranges, LPSystem, LinConstraint, LpError, Objective, Rat, VarId, VarRange};

use crate::exec::Exec;
use crate::wef::WefSystem;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DriverError {
    #[error("expected {expected} input bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("decision constant {0} outside (0, 1/2]")]
    BadD(Rat),
    #[error("the system is infeasible for input {input}; the encoding is broken")]
    Infeasible { input: String },
    #[error("the objective is unbounded for input {input}")]
    Unbounded { input: String },
    #[error("LP failure: {0}")]
    Lp(#[from] LpError),
    #[error("too many inputs to enumerate: {0}")]
    TooManyInputs(usize),
    #[error("no safe d found down to {0}")]
    NoSafeD(Rat),
}

/// Give up on the safe-d search after this many halvings.
const MAX_HALVINGS: usize = 32;

pub fn bitstring(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Bits of `value`, first entry is bit 0.
pub fn bits_of(value: u64, len: usize) -> Vec<bool> {
    (0..len).map(|k| value >> k & 1 == 1).collect()
}

fn half() -> Rat {
    Rat::new(1, 2)
}

fn check_d(d: &Rat) -> Result<(), DriverError> {
    if d.is_positive() && *d <= half() {
        Ok(())
    } else {
        Err(DriverError::BadD(d.clone()))
    }
}

/// `Σ ±x_j + d·w`: +1 where `x_bar` has a one, −1 where it has a zero.
pub fn build_objective(wef: &WefSystem, x_bar: &[bool], d: &Rat) -> Result<Objective, DriverError> {
    if x_bar.len() != wef.x_vars.len() {
        return Err(DriverError::Length { expected: wef.x_vars.len(), got: x_bar.len() });
    }
    let terms = wef
        .x_vars
        .iter()
        .zip(x_bar)
        .map(|(&v, &b)| (v, Rat::from_int(if b { 1 } else { -1 })))
        .chain(std::iter::once((wef.w_var, d.clone())));
    Ok(Objective::maximize(terms))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub answer: bool,
    pub z_star: Rat,
    pub m: usize,
    pub d: Rat,
    pub point: Vec<Rat>,
    /// Per-variable ranges on the optimal face, when requested.
    pub certificate: Option<Vec<VarRange>>,
}

impl Verdict {
    /// `m + d − z*`; zero exactly for yes.
    pub fn gap(&self) -> Rat {
        &(&Rat::from_int(self.m as i64) + &self.d) - &self.z_star
    }

    /// The certificate shows a single optimal point.
    pub fn is_unique(&self) -> Option<bool> {
        self.certificate.as_ref().map(|c| c.iter().all(VarRange::is_point))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "answer={} z*={} m={} d={} m+d={}",
            if self.answer { "yes" } else { "no" },
            self.z_star,
            self.m,
            self.d,
            &Rat::from_int(self.m as i64) + &self.d
        )?;
        if let Some(u) = self.is_unique() {
            write!(f, " unique={u}")?;
        }
        Ok(())
    }
}

/// Decides with d = 1/2, no certificate.
pub fn decide(wef: &WefSystem, x_bar: &[bool]) -> Result<Verdict, DriverError> {
    decide_with(wef, x_bar, &half(), false)
}

/// Optimizes the decision objective; yes iff z* = m + d exactly. With
/// `certify`, every variable is ranged over the optimal face.
pub fn decide_with(wef: &WefSystem, x_bar: &[bool], d: &Rat, certify: bool) -> Result<Verdict, DriverError> {
    check_d(d)?;
    let objective = build_objective(wef, x_bar, d)?;
    let input = bitstring(x_bar);
    let sol = match solve(&wef.lp, &objective) {
        wefc_lp::OptResult::Optimal(s) => s,
        wefc_lp::OptResult::Infeasible => return Err(DriverError::Infeasible { input }),
        wefc_lp::OptResult::Unbounded => return Err(DriverError::Unbounded { input }),
    };
    let m = x_bar.iter().filter(|&&b| b).count();
    let answer = sol.z_star == &Rat::from_int(m as i64) + d;
    let certificate = if certify { Some(optimal_face_ranges(&wef.lp, &objective, &sol.z_star, wef)?) } else { None };
    Ok(Verdict { answer, z_star: sol.z_star, m, d: d.clone(), point: sol.point, certificate })
}

/// Ranges of all variables over `{objective = z*}`. Input variables are
/// ranged first: once they are points, propagation settles the rest.
fn optimal_face_ranges(
    lp: &LPSystem,
    objective: &Objective,
    z_star: &Rat,
    wef: &WefSystem,
) -> Result<Vec<VarRange>, DriverError> {
    let mut face = lp.clone();
    face.add_constraint(LinConstraint::eq(objective.terms().iter().cloned(), z_star.clone())?)?;
    let mut order: Vec<VarId> = wef.x_vars.clone();
    order.extend(face.vars().filter(|v| !wef.x_vars.contains(v)));
    let ranges = var_ranges(&face, &order)?;
    let mut out = vec![VarRange { min: None, max: None }; face.num_vars()];
    for (v, r) in order.into_iter().zip(ranges) {
        out[v.index()] = r;
    }
    Ok(out)
}

/// Upper limit on enumerated input bits.
pub const MAX_ENUM_BITS: usize = 20;

fn all_inputs(q: usize) -> Result<Vec<Vec<bool>>, DriverError> {
    if q > MAX_ENUM_BITS {
        return Err(DriverError::TooManyInputs(q));
    }
    Ok((0..1u64 << q).map(|k| bits_of(k, q)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafeD {
    pub d: Rat,
    /// Smallest `m + 1/2 − z*` over no-instances at d = 1/2.
    pub min_gap: Option<Rat>,
    pub no_instances: usize,
    /// Halvings needed after the first candidate failed re-verification.
    pub halvings: usize,
}

/// At d = 1/2 every no-instance has gap ε = m + 1/2 − z* > 0. If every gap
/// is 1/2 (z* = m already) the answer is 1/2. Otherwise candidate d is
/// half the smallest gap, re-verified by checking that each no-instance
/// then has the unique optimum z* = m with x = x̄ and w = 0; the candidate
/// is halved until that holds.
pub fn find_safe_d(wef: &WefSystem, exec: Exec) -> Result<SafeD, DriverError> {
    let inputs = all_inputs(wef.x_vars.len())?;
    let verdicts: Vec<Result<Verdict, DriverError>> = exec.map(&inputs, |x| decide(wef, x));
    let mut no = Vec::new();
    let mut min_gap: Option<Rat> = None;
    for (x, v) in inputs.iter().zip(verdicts) {
        let v = v?;
        if !v.answer {
            let gap = v.gap();
            if min_gap.as_ref().is_none_or(|g| gap < *g) {
                min_gap = Some(gap);
            }
            no.push(x.clone());
        }
    }
    let Some(gap) = min_gap.clone() else {
        return Ok(SafeD { d: half(), min_gap, no_instances: 0, halvings: 0 });
    };
    let mut d = if gap == half() { half() } else { &gap / &Rat::from_int(2) };
    let mut halvings = 0;
    loop {
        let checks: Vec<Result<bool, DriverError>> = exec.map(&no, |x| no_instance_is_integral(wef, x, &d));
        let mut ok = true;
        for c in checks {
            ok &= c?;
        }
        if ok {
            return Ok(SafeD { d, min_gap, no_instances: no.len(), halvings });
        }
        if halvings == MAX_HALVINGS {
            return Err(DriverError::NoSafeD(d));
        }
        d = &d / &Rat::from_int(2);
        halvings += 1;
    }
}

/// At `d`, is `(x̄, w = 0)` the unique optimum with value m?
pub fn no_instance_is_integral(wef: &WefSystem, x_bar: &[bool], d: &Rat) -> Result<bool, DriverError> {
    let v = decide_with(wef, x_bar, d, false)?;
    if v.z_star != Rat::from_int(v.m as i64) {
        return Ok(false);
    }
    let objective = build_objective(wef, x_bar, d)?;
    let mut face = wef.lp.clone();
    face.add_constraint(LinConstraint::eq(objective.terms().iter().cloned(), v.z_star.clone())?)?;
    let mut watch = wef.x_vars.clone();
    watch.push(wef.w_var);
    let ranges = var_ranges(&face, &watch)?;
    let expected = x_bar.iter().map(|&b| Rat::from_int(b as i64)).chain(std::iter::once(Rat::zero()));
    Ok(ranges.iter().zip(expected).all(|(r, e)| r.point() == Some(&e)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct X01Case {
    pub input: Vec<bool>,
    pub expected: bool,
    /// w of the unique extension, when there is one.
    pub w: Option<bool>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct X01Report {
    pub cases: Vec<X01Case>,
}

impl X01Report {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.failure.is_none()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.cases.len()
    }

    pub fn failures(&self) -> impl Iterator<Item = &X01Case> {
        self.cases.iter().filter(|c| c.failure.is_some())
    }

    /// One line per assignment.
    pub fn table(&self) -> String {
        let mut out = String::from("input      expected  w    result\n");
        for c in &self.cases {
            let w = c.w.map_or("-".to_string(), |w| (w as u8).to_string());
            let res = c.failure.as_deref().unwrap_or("ok");
            out.push_str(&format!("{:<10} {:<9} {:<4} {res}\n", bitstring(&c.input), c.expected as u8, w));
        }
        out
    }
}

/// The unique extension of `x`, as 0/1 values, or a description of why
/// there is none.
pub fn unique_extension(wef: &WefSystem, x: &[bool]) -> Result<Vec<bool>, String> {
    let values: Vec<Rat> = x.iter().map(|&b| Rat::from_int(b as i64)).collect();
    let fixed = fix_vars(&wef.lp, wef.x_vars.iter().copied().zip(values.iter())).map_err(|e| e.to_string())?;
    let all: Vec<VarId> = fixed.vars().collect();
    let ranges = match var_ranges(&fixed, &all) {
        Ok(r) => r,
        Err(LpError::Infeasible) => return Err("infeasible".into()),
        Err(e) => return Err(e.to_string()),
    };
    let mut out = Vec::with_capacity(ranges.len());
    for (v, r) in all.iter().zip(ranges) {
        match r.point() {
            Some(p) if p.is_zero() => out.push(false),
            Some(p) if p.is_one() => out.push(true),
            Some(p) => return Err(format!("{} = {p} is fractional", fixed.name(*v))),
            None => {
                let show = |b: &Option<Rat>| b.as_ref().map_or("inf".to_string(), ToString::to_string);
                return Err(format!("{} ranges over [{}, {}]", fixed.name(*v), show(&r.min), show(&r.max)));
            }
        }
    }
    Ok(out)
}

/// For every 0/1 input: feasible, every variable a single 0/1 point, and
/// w equal to the oracle.
pub fn verify_x01<F>(wef: &WefSystem, oracle: F, exec: Exec) -> Result<X01Report, DriverError>
where
    F: Fn(&[bool]) -> bool + Sync + Send,
{
    let inputs = all_inputs(wef.x_vars.len())?;
    let cases = exec.map(&inputs, |x| {
        let expected = oracle(x);
        match unique_extension(wef, x) {
            Ok(values) => {
                let w = values[wef.w_var.index()];
                let failure = (w != expected).then(|| format!("w = {} but the oracle says {}", w as u8, expected as u8));
                X01Case { input: x.clone(), expected, w: Some(w), failure }
            }
            Err(why) => X01Case { input: x.clone(), expected, w: None, failure: Some(why) },
        }
    });
    Ok(X01Report { cases })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Largest k with a yes verdict, if any.
    pub best: Option<u64>,
    pub calls: usize,
    /// Every (k, verdict) queried, in order.
    pub log: Vec<(u64, bool)>,
}

/// ⌈log₂(range)⌉ + 1 for a range of `len` candidate values.
pub fn call_budget(len: u64) -> usize {
    let ceil_log = if len <= 1 { 0 } else { 64 - (len - 1).leading_zeros() as usize };
    ceil_log + 1
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError<E> {
    #[error("empty range {lo}..={hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("verdicts are not monotone: yes at {yes} above no at {no}")]
    NonMonotone { yes: u64, no: u64 },
    #[error(transparent)]
    Oracle(E),
}

/// Largest k in `lo..=hi` with `decide_at(k)` true, assuming verdicts are
/// yes up to some threshold and no above it. Uses at most
/// `call_budget(hi - lo + 1)` calls. The search never queries above a
/// known no or below a known yes, so it cannot observe a non-monotone
/// family; [`check_monotone`] is the audit for that.
pub fn optimize_binary_search<E>(
    lo: u64,
    hi: u64,
    mut decide_at: impl FnMut(u64) -> Result<bool, E>,
) -> Result<SearchResult, SearchError<E>> {
    if lo > hi {
        return Err(SearchError::EmptyRange { lo, hi });
    }
    let mut log: Vec<(u64, bool)> = Vec::new();
    // answer lies in [lo - 1, hi], lo - 1 meaning "none"; track as offsets
    let (mut low, mut high) = (0u64, hi - lo + 1);
    while low < high {
        let mid = low + (high - low).div_ceil(2);
        let k = lo + mid - 1;
        let yes = decide_at(k).map_err(SearchError::Oracle)?;
        log.push((k, yes));
        if yes {
            low = mid;
        } else {
            high = mid - 1;
        }
    }
    let best = (low > 0).then(|| lo + low - 1);
    Ok(SearchResult { best, calls: log.len(), log })
}

/// Queries every k in `lo..=hi` and reports the first violation of
/// monotonicity.
pub fn check_monotone<E>(
    lo: u64,
    hi: u64,
    mut decide_at: impl FnMut(u64) -> Result<bool, E>,
) -> Result<(), SearchError<E>> {
    let mut first_no = None;
    for k in lo..=hi {
        let yes = decide_at(k).map_err(SearchError::Oracle)?;
        match (yes, first_no) {
            (false, None) => first_no = Some(k),
            (true, Some(no)) => return Err(SearchError::NonMonotone { yes: k, no }),
            _ => {}
        }
    }
    Ok(())
}

/// The hull of `(0,0,0)`, `(1,1,1)` and `(1/4,1,1/2)` over `(x, w, s)`:
/// a one-edge WEF whose no-instance has a fractional optimum at d = 1/2.
pub fn q2_system() -> WefSystem {
    let mut lp = LPSystem::new();
    let x = lp.add_var("x");
    let w = lp.add_var("w");
    let s = lp.add_var("s");
    let r = Rat::from_int;
    let rows = [
        LinConstraint::eq([(x, r(-2)), (w, r(-1)), (s, r(3))], r(0)),
        LinConstraint::le([(x, r(1)), (w, r(-1))], r(0)),
        LinConstraint::le([(x, r(-4)), (w, r(1))], r(0)),
    ];
    let mut tags = Vec::new();
    for (k, row) in rows.into_iter().enumerate() {
        lp.add_constraint(row.expect("nonempty")).expect("vars exist");
        tags.push(crate::wef::RowTag { group: crate::wef::Group::Gate, detail: format!("hull facet {}", k + 1) });
    }
    WefSystem { lp, x_vars: vec![x], w_var: w, tags }
}
