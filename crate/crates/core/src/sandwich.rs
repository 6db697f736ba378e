//! Characteristic sandwiches of a language slice, their slack matrix, and
//! the passage from a nonnegative factorization to an extension.
//!
//! Bit vectors of length n are indexed by integers, entry i being bit i.
//! The inner polytope is the hull of `(x, [x ∈ L])`; the outer polytope has
//! one row `φ(a)·x + d·w <= Σa + d·[a ∈ L]` per `a`, where `φ(a)` maps
//! ones to +1 and zeros to −1.

use std::fmt::Write as _;

use wefc_lp::{solve, Bounds, LPSystem, LinConstraint, Objective, OptResult, Rat, VarId};

use crate::driver::{bits_of, bitstring};
use crate::exec::Exec;
use crate::matching::exact_rank;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SandwichError {
    #[error("d = {0} must lie strictly between 0 and 1/2")]
    BadD(Rat),
    #[error("slice length {0} is too large to enumerate")]
    TooLong(usize),
    #[error("entry ({row},{col}) is negative: {value}")]
    Negative { row: usize, col: usize, value: Rat },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("T·U differs from the slack matrix at ({row},{col})")]
    Mismatch { row: usize, col: usize },
    #[error("bad language: {0}")]
    Language(String),
}

/// Largest slice length accepted.
pub const MAX_N: usize = 12;

/// `L(n)` as a membership table over all `2^n` strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    n: usize,
    member: Vec<bool>,
}

impl Language {
    pub fn from_predicate(n: usize, pred: impl Fn(&[bool]) -> bool) -> Result<Self, SandwichError> {
        if n > MAX_N {
            return Err(SandwichError::TooLong(n));
        }
        let member = (0..1u64 << n).map(|k| pred(&bits_of(k, n))).collect();
        Ok(Language { n, member })
    }

    /// Members written as bit strings, first character is bit 0.
    pub fn from_strings<S: AsRef<str>>(n: usize, members: &[S]) -> Result<Self, SandwichError> {
        let mut set = vec![false; 1 << n.min(MAX_N)];
        if n > MAX_N {
            return Err(SandwichError::TooLong(n));
        }
        for s in members {
            let s = s.as_ref();
            if s.len() != n || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(SandwichError::Language(format!("`{s}` is not a {n}-bit string")));
            }
            let k = s.chars().enumerate().filter(|(_, c)| *c == '1').map(|(i, _)| 1usize << i).sum::<usize>();
            set[k] = true;
        }
        Ok(Language { n, member: set })
    }

    /// Bit k of `mask` says whether string k belongs.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self, SandwichError> {
        if n > 6 {
            return Err(SandwichError::TooLong(n));
        }
        Ok(Language { n, member: (0..1usize << n).map(|k| mask >> k & 1 == 1).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.member.len()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.member[k]
    }

    pub fn contains_bits(&self, x: &[bool]) -> bool {
        self.member[x.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| 1usize << i).sum::<usize>()]
    }
}

fn check_d(d: &Rat) -> Result<(), SandwichError> {
    if d.is_positive() && *d < Rat::new(1, 2) {
        Ok(())
    } else {
        Err(SandwichError::BadD(d.clone()))
    }
}

/// An outer row `normal·(x, w) <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OuterRow {
    pub normal: Vec<Rat>,
    pub rhs: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicSandwich {
    pub lang: Language,
    pub d: Rat,
    /// `(x, ψ(x))` as points of length n+1, in index order.
    pub vertices: Vec<Vec<Rat>>,
    /// One row per string `a`, in index order.
    pub rows: Vec<OuterRow>,
}

impl CharacteristicSandwich {
    pub fn new(lang: &Language, d: &Rat) -> Result<Self, SandwichError> {
        check_d(d)?;
        let n = lang.n;
        let bit = |b: bool| Rat::from_int(b as i64);
        let vertices = (0..lang.size())
            .map(|k| bits_of(k as u64, n).into_iter().map(bit).chain([bit(lang.contains(k))]).collect())
            .collect();
        let rows = (0..lang.size())
            .map(|k| {
                let a = bits_of(k as u64, n);
                let ones = a.iter().filter(|&&b| b).count() as i64;
                let mut normal: Vec<Rat> = a.iter().map(|&b| Rat::from_int(if b { 1 } else { -1 })).collect();
                normal.push(d.clone());
                let rhs = if lang.contains(k) { &Rat::from_int(ones) + d } else { Rat::from_int(ones) };
                OuterRow { normal, rhs }
            })
            .collect();
        Ok(CharacteristicSandwich { lang: lang.clone(), d: d.clone(), vertices, rows })
    }

    /// `rhs − normal·vertex` for every (row, vertex).
    pub fn slack(&self, exec: Exec) -> Vec<Vec<Rat>> {
        exec.map(&self.rows, |row| {
            self.vertices
                .iter()
                .map(|v| {
                    let lhs = row.normal.iter().zip(v).fold(Rat::zero(), |acc, (c, x)| &acc + &(c * x));
                    &row.rhs - &lhs
                })
                .collect()
        })
    }
}

/// `M(a,b) = Σa − 2a·b + Σb + α(a,b)` with α = d, −d or 0 by membership.
pub fn build_m(lang: &Language, d: &Rat, exec: Exec) -> Result<Vec<Vec<Rat>>, SandwichError> {
    check_d(d)?;
    let size = lang.size();
    let rows: Vec<usize> = (0..size).collect();
    let m = exec.map(&rows, |&a| {
        (0..size)
            .map(|b| {
                let dot = (a & b).count_ones() as i64;
                let base = Rat::from_int(a.count_ones() as i64 - 2 * dot + b.count_ones() as i64);
                match (lang.contains(a), lang.contains(b)) {
                    (true, false) => &base + d,
                    (false, true) => &base - d,
                    _ => base,
                }
            })
            .collect::<Vec<Rat>>()
    });
    for (r, row) in m.iter().enumerate() {
        if let Some((c, v)) = row.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(SandwichError::Negative { row: r, col: c, value: v.clone() });
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackReport {
    pub entries: usize,
    pub mismatches: Vec<(usize, usize)>,
}

impl SlackReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the sandwich's computed slack with the closed-form matrix.
pub fn check_slack(lang: &Language, d: &Rat, exec: Exec) -> Result<SlackReport, SandwichError> {
    let sw = CharacteristicSandwich::new(lang, d)?;
    let slack = sw.slack(exec);
    let m = build_m(lang, d, exec)?;
    let mut mismatches = Vec::new();
    for (a, (s_row, m_row)) in slack.iter().zip(&m).enumerate() {
        for (b, (s, mm)) in s_row.iter().zip(m_row).enumerate() {
            if s != mm {
                mismatches.push((a, b));
            }
        }
    }
    Ok(SlackReport { entries: lang.size() * lang.size(), mismatches })
}

/// A system over `(x, w, ...)` with the coordinates to optimize.
#[derive(Debug, Clone)]
pub struct Sandwiched {
    pub lp: LPSystem,
    pub x_vars: Vec<VarId>,
    pub w_var: VarId,
}

impl From<&crate::wef::WefSystem> for Sandwiched {
    fn from(wef: &crate::wef::WefSystem) -> Self {
        Sandwiched { lp: wef.lp.clone(), x_vars: wef.x_vars.clone(), w_var: wef.w_var }
    }
}

/// The inner polytope as a hull: `(x, w) = Σ λ_b (b, ψ(b))`, `Σ λ = 1`.
pub fn inner_system(sw: &CharacteristicSandwich) -> Sandwiched {
    let n = sw.lang.n;
    let mut lp = LPSystem::new();
    let x_vars: Vec<VarId> = (0..n).map(|i| lp.add_var_with_bounds(format!("x{}", i + 1), Bounds::free())).collect();
    let w_var = lp.add_var_with_bounds("w", Bounds::free());
    let lambda: Vec<VarId> =
        (0..sw.vertices.len()).map(|k| lp.add_var_with_bounds(format!("l{k}"), Bounds::non_negative())).collect();
    for coord in 0..=n {
        let var = if coord < n { x_vars[coord] } else { w_var };
        let terms = std::iter::once((var, Rat::one()))
            .chain(lambda.iter().zip(&sw.vertices).map(|(&l, v)| (l, -&v[coord])));
        lp.add_constraint(LinConstraint::eq(terms, Rat::zero()).expect("nonempty")).expect("vars exist");
    }
    lp.add_constraint(LinConstraint::eq(lambda.iter().map(|&l| (l, Rat::one())), Rat::one()).expect("nonempty"))
        .expect("vars exist");
    Sandwiched { lp, x_vars, w_var }
}

/// The outer polytope with free coordinates.
pub fn outer_system(sw: &CharacteristicSandwich) -> Sandwiched {
    let n = sw.lang.n;
    let mut lp = LPSystem::new();
    let x_vars: Vec<VarId> = (0..n).map(|i| lp.add_var_with_bounds(format!("x{}", i + 1), Bounds::free())).collect();
    let w_var = lp.add_var_with_bounds("w", Bounds::free());
    let coords: Vec<VarId> = x_vars.iter().copied().chain([w_var]).collect();
    for row in &sw.rows {
        let terms = coords.iter().copied().zip(row.normal.iter().cloned());
        lp.add_constraint(LinConstraint::le(terms, row.rhs.clone()).expect("nonempty")).expect("vars exist");
    }
    Sandwiched { lp, x_vars, w_var }
}

/// Optimizes along `(φ(a), d)`; yes iff the optimum equals `Σa + d`.
pub fn decide_over_sandwiched(p: &Sandwiched, a: &[bool], d: &Rat) -> Result<(bool, Rat), SandwichError> {
    if a.len() != p.x_vars.len() {
        return Err(SandwichError::Dimension(format!("{} bits for {} coordinates", a.len(), p.x_vars.len())));
    }
    let objective = Objective::maximize(
        p.x_vars
            .iter()
            .zip(a)
            .map(|(&v, &b)| (v, Rat::from_int(if b { 1 } else { -1 })))
            .chain([(p.w_var, d.clone())]),
    );
    let z = match solve(&p.lp, &objective) {
        OptResult::Optimal(s) => s.z_star,
        other => return Err(SandwichError::Dimension(format!("optimization failed: {other:?}"))),
    };
    let ones = a.iter().filter(|&&b| b).count() as i64;
    Ok((z == &Rat::from_int(ones) + d, z))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorReport {
    pub equal: bool,
    /// Largest bit length among entries of T.
    pub max_bits_t: u64,
}

fn dims(m: &[Vec<Rat>]) -> (usize, usize) {
    (m.len(), m.first().map_or(0, Vec::len))
}

fn rectangular(m: &[Vec<Rat>], what: &str) -> Result<(usize, usize), SandwichError> {
    let (r, c) = dims(m);
    if m.iter().any(|row| row.len() != c) {
        return Err(SandwichError::Dimension(format!("{what} is ragged")));
    }
    Ok((r, c))
}

fn product(t: &[Vec<Rat>], u: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = dims(u).1;
    t.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(u).fold(Rat::zero(), |acc, (a, urow)| &acc + &(a * &urow[j])))
                .collect()
        })
        .collect()
}

/// Exact check of `S = T·U`.
pub fn verify_factorization(s: &[Vec<Rat>], t: &[Vec<Rat>], u: &[Vec<Rat>]) -> Result<FactorReport, SandwichError> {
    let (sr, sc) = rectangular(s, "S")?;
    let (tr, tc) = rectangular(t, "T")?;
    let (ur, uc) = rectangular(u, "U")?;
    if sr != tr || tc != ur || uc != sc {
        return Err(SandwichError::Dimension(format!("S {sr}x{sc}, T {tr}x{tc}, U {ur}x{uc}")));
    }
    let equal = product(t, u).as_slice() == s;
    let max_bits_t = t.iter().flatten().map(Rat::bit_len).max().unwrap_or(0);
    Ok(FactorReport { equal, max_bits_t })
}

fn nonnegative(m: &[Vec<Rat>]) -> Result<(), SandwichError> {
    for (r, row) in m.iter().enumerate() {
        if let Some((c, v)) = row.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(SandwichError::Negative { row: r, col: c, value: v.clone() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExtensionReport {
    /// `{(x, y) : a_i·x + T_i·y = b_i, y >= 0}`; x coordinates first.
    pub q: LPSystem,
    /// Every row satisfies `max a_i·x <= b_i` over the extension.
    pub projection_inside_outer: bool,
    /// Every inner vertex lifts with `y = U^j`.
    pub inner_vertices_lift: bool,
}

/// Builds the extension of a factorization `T·U` of the slack of `rows`
/// against `vertices`, and checks both containments.
pub fn extension_from_factorization(
    rows: &[OuterRow],
    vertices: &[Vec<Rat>],
    t: &[Vec<Rat>],
    u: &[Vec<Rat>],
) -> Result<ExtensionReport, SandwichError> {
    nonnegative(t)?;
    nonnegative(u)?;
    let k = rows.first().map_or(0, |r| r.normal.len());
    if rows.iter().any(|r| r.normal.len() != k) || vertices.iter().any(|v| v.len() != k) {
        return Err(SandwichError::Dimension("rows and vertices disagree on dimension".into()));
    }
    let slack: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| {
            vertices
                .iter()
                .map(|v| &r.rhs - &r.normal.iter().zip(v).fold(Rat::zero(), |acc, (c, x)| &acc + &(c * x)))
                .collect()
        })
        .collect();
    let report = verify_factorization(&slack, t, u)?;
    if !report.equal {
        let prod = product(t, u);
        let (row, col) = (0..slack.len())
            .flat_map(|i| (0..slack[i].len()).map(move |j| (i, j)))
            .find(|&(i, j)| prod[i][j] != slack[i][j])
            .expect("some entry differs");
        return Err(SandwichError::Mismatch { row, col });
    }
    let r = dims(t).1;
    let mut q = LPSystem::new();
    let x: Vec<VarId> = (0..k).map(|i| q.add_var_with_bounds(format!("x{}", i + 1), Bounds::free())).collect();
    let y: Vec<VarId> = (0..r).map(|j| q.add_var_with_bounds(format!("y{}", j + 1), Bounds::non_negative())).collect();
    for (row, trow) in rows.iter().zip(t) {
        let terms = x.iter().copied().zip(row.normal.iter().cloned()).chain(y.iter().copied().zip(trow.iter().cloned()));
        // a row with all-zero coefficients only constrains when rhs != 0
        match LinConstraint::eq(terms, row.rhs.clone()) {
            Ok(c) => {
                q.add_constraint(c).expect("vars exist");
            }
            Err(_) if row.rhs.is_zero() => {}
            Err(_) => return Err(SandwichError::Dimension("an empty row with nonzero rhs".into())),
        }
    }
    let projection_inside_outer = rows.iter().all(|row| {
        let obj = Objective::maximize(x.iter().copied().zip(row.normal.iter().cloned()));
        match solve(&q, &obj) {
            OptResult::Optimal(s) => s.z_star <= row.rhs,
            OptResult::Infeasible => true,
            OptResult::Unbounded => false,
        }
    });
    let inner_vertices_lift = vertices.iter().enumerate().all(|(j, v)| {
        let point: Vec<Rat> = v.iter().cloned().chain(u.iter().map(|urow| urow[j].clone())).collect();
        q.contains(&point)
    });
    Ok(ExtensionReport { q, projection_inside_outer, inner_vertices_lift })
}

/// `T = I`, `U = S`: the extension is the outer system with slack variables.
pub fn identity_factorization(s: &[Vec<Rat>]) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
    let rows = dims(s).0;
    let eye = (0..rows).map(|i| (0..rows).map(|j| Rat::from_int((i == j) as i64)).collect()).collect();
    (eye, s.to_vec())
}

/// Outcome of the small factorization search.
#[derive(Debug, Clone)]
pub struct FactorSearch {
    /// Exact rank, a lower bound on the nonnegative rank.
    pub rank: usize,
    /// Inner dimension of the identity factorization.
    pub trivial_dim: usize,
    /// Row subsets of size `rank` tried.
    pub subsets_tried: usize,
    /// A factorization with inner dimension `rank`, when one was found.
    pub found: Option<(Vec<Vec<Rat>>, Vec<Vec<Rat>>)>,
}

/// Cap on row subsets examined by [`search_small_factorization`].
pub const MAX_SUBSETS: usize = 5000;

/// Looks for `S = T·U` with `U` made of `rank(S)` rows of `S` and `T >= 0`,
/// one feasibility problem per row of `S`. A full-rank `S` admits nothing
/// smaller than the identity factorization, so no search is run.
pub fn search_small_factorization(s: &[Vec<Rat>]) -> FactorSearch {
    let (rows, cols) = dims(s);
    let rank = exact_rank(s);
    let trivial_dim = rows.min(cols);
    let mut out = FactorSearch { rank, trivial_dim, subsets_tried: 0, found: None };
    if rank >= trivial_dim || rank == 0 {
        return out;
    }
    let mut pick: Vec<usize> = (0..rank).collect();
    loop {
        if out.subsets_tried == MAX_SUBSETS {
            return out;
        }
        out.subsets_tried += 1;
        let basis: Vec<Vec<Rat>> = pick.iter().map(|&i| s[i].clone()).collect();
        if exact_rank(&basis) == rank {
            if let Some(t) = conic_coefficients(s, &basis) {
                out.found = Some((t, basis));
                return out;
            }
        }
        // next combination in lexicographic order
        let Some(pos) = (0..rank).rev().find(|&k| pick[k] < rows - rank + k) else {
            return out;
        };
        pick[pos] += 1;
        for k in pos + 1..rank {
            pick[k] = pick[k - 1] + 1;
        }
    }
}

/// Nonnegative `T` with `T·basis = S`, solved row by row.
fn conic_coefficients(s: &[Vec<Rat>], basis: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let mut t = Vec::with_capacity(s.len());
    for target in s {
        let mut lp = LPSystem::new();
        let coef: Vec<VarId> =
            (0..basis.len()).map(|k| lp.add_var_with_bounds(format!("t{k}"), Bounds::non_negative())).collect();
        for (j, value) in target.iter().enumerate() {
            let terms: Vec<(VarId, Rat)> =
                coef.iter().zip(basis).filter(|(_, b)| !b[j].is_zero()).map(|(&v, b)| (v, b[j].clone())).collect();
            if terms.is_empty() {
                if !value.is_zero() {
                    return None;
                }
                continue;
            }
            lp.add_constraint(LinConstraint::eq(terms, value.clone()).expect("nonempty")).expect("vars exist");
        }
        match solve(&lp, &Objective::default()) {
            OptResult::Optimal(sol) => t.push(coef.iter().map(|v| sol.point[v.index()].clone()).collect()),
            _ => return None,
        }
    }
    Some(t)
}

/// Exact-rational CSV with a header of column bit strings.
pub fn to_csv(m: &[Vec<Rat>], n: usize) -> String {
    let mut out = String::from("a\\b");
    for b in 0..dims(m).1 {
        let _ = write!(out, ",{}", bitstring(&bits_of(b as u64, n)));
    }
    out.push('\n');
    for (a, row) in m.iter().enumerate() {
        out.push_str(&bitstring(&bits_of(a as u64, n)));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_entries() {
        let lang = Language::from_strings(2, &["11"]).unwrap();
        let m = build_m(&lang, &Rat::new(1, 3), Exec::Sequential).unwrap();
        // a = "10" (index 1), b = "01" (index 2): both outside L
        assert_eq!(m[1][2], Rat::from_int(2));
        // a = "11" in L, b = "10" not in L
        assert_eq!(m[3][1], Rat::new(4, 3));
        assert!((0..4).all(|k| m[k][k].is_zero()));
    }

    #[test]
    fn d_must_be_below_half() {
        let lang = Language::from_mask(1, 0).unwrap();
        assert!(build_m(&lang, &Rat::new(1, 2), Exec::Sequential).is_err());
    }

    #[test]
    fn csv_is_exact() {
        let lang = Language::from_strings(1, &["1"]).unwrap();
        let m = build_m(&lang, &Rat::new(1, 3), Exec::Sequential).unwrap();
        assert_eq!(to_csv(&m, 1), "a\\b,0,1\n0,0,2/3\n1,4/3,0\n");
    }
}
