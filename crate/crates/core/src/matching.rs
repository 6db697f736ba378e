//! Perfect-matching polytope laboratory.
//!
//! Graphs on `n` labelled vertices are edge vectors of length C(n,2) in
//! lexicographic order `12, 13, ..., 1n, 23, ...`. Vertices are 0-based in
//! code and 1-based in printed names.

use wefc_lp::Rat;

use crate::exec::Exec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchingError {
    #[error("perfect matchings need an even vertex count, got {0}")]
    OddOrder(usize),
    #[error("edge vector for n={n} needs {expected} entries, got {got}")]
    Length { n: usize, expected: usize, got: usize },
}

pub fn num_edges(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub fn edge_list(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Position of edge `{i, j}` in the edge vector.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    assert!(j < n && i != j);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All perfect matchings of K_n as lists of edge indices, in lexicographic
/// order of their edge lists.
pub fn perfect_matchings(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, used: &mut Vec<bool>, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(first) = used.iter().position(|u| !u) else {
            out.push(acc.clone());
            return;
        };
        used[first] = true;
        for partner in first + 1..n {
            if !used[partner] {
                used[partner] = true;
                acc.push(edge_index(n, first, partner));
                go(n, used, acc, out);
                acc.pop();
                used[partner] = false;
            }
        }
        used[first] = false;
    }
    assert!(n % 2 == 0, "odd vertex count");
    let mut out = Vec::new();
    go(n, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// (n-1)!! for even n.
pub fn double_factorial_odd(n: usize) -> usize {
    (1..n).step_by(2).product::<usize>().max(1)
}

fn check_len(n: usize, x: &[bool]) -> Result<(), MatchingError> {
    if n % 2 == 1 {
        return Err(MatchingError::OddOrder(n));
    }
    if x.len() != num_edges(n) {
        return Err(MatchingError::Length { n, expected: num_edges(n), got: x.len() });
    }
    Ok(())
}

/// Brute force over the (n-1)!! perfect matchings of K_n.
pub fn has_pm(n: usize, x: &[bool]) -> Result<bool, MatchingError> {
    check_len(n, x)?;
    Ok(perfect_matchings(n).iter().any(|m| m.iter().all(|&e| x[e])))
}

/// Edge vector of the graph whose edges are given as 1-based vertex pairs.
pub fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut x = vec![false; num_edges(n)];
    for &(i, j) in edges {
        x[edge_index(n, i - 1, j - 1)] = true;
    }
    x
}

pub fn bits_of(value: u64, len: usize) -> Vec<bool> {
    (0..len).map(|b| value >> b & 1 == 1).collect()
}

/// Vertices `(x, w_x)` of PM_n, indexed by the integer whose bit `e` is `x[e]`.
pub fn pm_vertices(n: usize, exec: Exec) -> Vec<(Vec<bool>, bool)> {
    let len = num_edges(n);
    let matchings = perfect_matchings(n);
    exec.map_range(1usize << len, |code| {
        let x = bits_of(code as u64, len);
        let w = matchings.iter().any(|m| m.iter().all(|&e| x[e]));
        (x, w)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpFaceReport {
    pub n: usize,
    pub vertices: usize,
    /// Vertices violating `Σx + (1-w)n² >= n/2`.
    pub violations: usize,
    pub tight: usize,
    /// Every tight vertex is `(M, 1)` for a perfect matching M, and all
    /// matchings appear.
    pub tight_are_matchings: bool,
}

impl EpFaceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.tight_are_matchings && self.tight == double_factorial_odd(self.n)
    }
}

pub fn check_ep_face(n: usize, exec: Exec) -> EpFaceReport {
    let verts = pm_vertices(n, exec);
    let n2 = (n * n) as i64;
    let half = (n / 2) as i64;
    let mut violations = 0;
    let mut tight: Vec<Vec<bool>> = Vec::new();
    let mut tight_all_w1 = true;
    for (x, w) in &verts {
        let lhs = x.iter().filter(|b| **b).count() as i64 + if *w { 0 } else { n2 };
        if lhs < half {
            violations += 1;
        } else if lhs == half {
            tight.push(x.clone());
            tight_all_w1 &= *w;
        }
    }
    let mut expected: Vec<Vec<bool>> = perfect_matchings(n)
        .into_iter()
        .map(|m| {
            let mut x = vec![false; num_edges(n)];
            m.into_iter().for_each(|e| x[e] = true);
            x
        })
        .collect();
    expected.sort();
    let mut got = tight.clone();
    got.sort();
    EpFaceReport {
        n,
        vertices: verts.len(),
        violations,
        tight: tight.len(),
        tight_are_matchings: got == expected && tight_all_w1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop2Report {
    pub m: usize,
    pub has_pm: bool,
    pub z_star: Rat,
    pub expected: Rat,
    pub maximizers: usize,
    pub maximizer_is_xbar: bool,
}

impl Prop2Report {
    pub fn passed(&self) -> bool {
        self.z_star == self.expected && self.maximizers == 1 && self.maximizer_is_xbar
    }
}

/// Maximizes `c(x̄)·x + d·w` directly over the vertex list of PM_n.
pub fn check_prop2(n: usize, x_bar: &[bool], d: &Rat, exec: Exec) -> Result<Prop2Report, MatchingError> {
    check_len(n, x_bar)?;
    let verts = pm_vertices(n, exec);
    let values: Vec<Rat> = exec.map(&verts, |(x, w)| {
        let agree = x.iter().zip(x_bar).map(|(a, b)| if *b { *a as i64 } else { -(*a as i64) }).sum::<i64>();
        let mut z = Rat::from_int(agree);
        if *w {
            z += d;
        }
        z
    });
    let best = values.iter().max().expect("nonempty").clone();
    let winners: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
    let m = x_bar.iter().filter(|b| **b).count();
    let pm = has_pm(n, x_bar)?;
    let expected = if pm { Rat::from_int(m as i64) + d } else { Rat::from_int(m as i64) };
    Ok(Prop2Report {
        m,
        has_pm: pm,
        z_star: best,
        expected,
        maximizers: winners.len(),
        maximizer_is_xbar: winners.len() == 1 && verts[winners[0]].0 == x_bar,
    })
}

/// Vertex subsets of odd size at least 3, as bitmasks.
fn odd_sets(n: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << n).filter(|s| s.count_ones() >= 3 && s.count_ones() % 2 == 1)
}

fn crossing(n: usize, set: u32, x: &[bool]) -> usize {
    edge_list(n)
        .iter()
        .zip(x)
        .filter(|((i, j), on)| **on && ((set >> i) & 1 != (set >> j) & 1))
        .count()
}

fn degree(n: usize, v: usize, x: &[bool]) -> usize {
    edge_list(n).iter().zip(x).filter(|((i, j), on)| **on && (*i == v || *j == v)).count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddSetReport {
    pub n: usize,
    pub odd_sets: usize,
    /// Matchings that fail a degree or odd-set row.
    pub matching_failures: usize,
    /// 0/1 points satisfying every row.
    pub feasible_points: usize,
    /// Of those, points that are not perfect matchings.
    pub spurious_points: usize,
}

impl OddSetReport {
    pub fn passed(&self) -> bool {
        self.matching_failures == 0
            && self.spurious_points == 0
            && self.feasible_points == double_factorial_odd(self.n)
    }
}

pub fn check_odd_set(n: usize, exec: Exec) -> OddSetReport {
    let sets: Vec<u32> = odd_sets(n).collect();
    let satisfies = |x: &[bool]| {
        (0..n).all(|v| degree(n, v, x) == 1) && sets.iter().all(|&s| crossing(n, s, x) >= 1)
    };
    let matching_failures = perfect_matchings(n)
        .into_iter()
        .filter(|m| {
            let mut x = vec![false; num_edges(n)];
            m.iter().for_each(|&e| x[e] = true);
            !satisfies(&x)
        })
        .count();
    let verts = pm_vertices(n, exec);
    let flags = exec.map(&verts, |(x, w)| (satisfies(x), *w && x.iter().filter(|b| **b).count() == n / 2));
    let feasible_points = flags.iter().filter(|(s, _)| *s).count();
    let spurious_points = flags.iter().filter(|(s, pm)| *s && !*pm).count();
    OddSetReport { n, odd_sets: sets.len(), matching_failures, feasible_points, spurious_points }
}

/// Proper edge subsets with no perfect matching that gain one from any
/// added edge. Each set is returned as an edge vector.
pub fn hypo_matchable_sets(n: usize, exec: Exec) -> Vec<Vec<bool>> {
    let len = num_edges(n);
    let verts = pm_vertices(n, exec);
    let full = (1usize << len) - 1;
    (0..verts.len())
        .filter(|&code| {
            code != full && !verts[code].1 && (0..len).filter(|e| code >> e & 1 == 0).all(|e| verts[code | 1 << e].1)
        })
        .map(|code| verts[code].0.clone())
        .collect()
}

/// Rank by exact Gaussian elimination.
pub fn exact_rank(rows: &[Vec<Rat>]) -> usize {
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = a[rank][c].recip();
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] * &inv;
                for k in c..cols {
                    let sub = &f * &a[rank][k];
                    a[r][k] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Determinant by exact elimination.
pub fn exact_det(rows: &[Vec<Rat>]) -> Rat {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "square matrix expected");
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let mut det = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = &det * &a[c][c];
        let inv = a[c][c].recip();
        for r in c + 1..n {
            if !a[r][c].is_zero() {
                let f = &a[r][c] * &inv;
                for k in c..n {
                    let sub = &f * &a[c][k];
                    a[r][k] -= sub;
                }
            }
        }
    }
    det
}

/// The appendix facet matrix for the matching `12, 34, ..., (n-1)n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetMatrix {
    /// Column order: non-matching edges (lexicographic), matching edges, w.
    pub columns: Vec<String>,
    /// Rows as `(x, w)` over the graph's own edge order.
    pub points: Vec<(Vec<bool>, bool)>,
    pub matrix: Vec<Vec<Rat>>,
}

pub fn appendix_matrix(n: usize) -> FacetMatrix {
    assert!(n % 2 == 0 && n >= 4);
    let half = n / 2;
    let matching: Vec<usize> = (0..half).map(|k| edge_index(n, 2 * k, 2 * k + 1)).collect();
    let others: Vec<usize> = (0..num_edges(n)).filter(|e| !matching.contains(e)).collect();
    let edges = edge_list(n);
    let name = |e: usize| format!("x{}{}", edges[e].0 + 1, edges[e].1 + 1);
    let mut columns: Vec<String> = others.iter().chain(&matching).map(|&e| name(e)).collect();
    columns.push("w".into());
    let base = |extra: Option<usize>, drop: Option<usize>| {
        let mut x = vec![false; num_edges(n)];
        for &e in &matching {
            x[e] = Some(e) != drop;
        }
        if let Some(e) = extra {
            x[e] = true;
        }
        x
    };
    let mut points = Vec::new();
    for &e in &others {
        points.push((base(Some(e), None), true));
    }
    for &e in &matching {
        points.push((base(None, Some(e)), false));
    }
    points.push((base(None, None), true));
    let order: Vec<usize> = others.iter().chain(&matching).copied().collect();
    let matrix = points
        .iter()
        .map(|(x, w)| {
            let mut row: Vec<Rat> = order.iter().map(|&e| Rat::from_int(x[e] as i64)).collect();
            row.push(Rat::from_int(*w as i64));
            row
        })
        .collect();
    FacetMatrix { columns, points, matrix }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetReport {
    pub n: usize,
    pub matchings_checked: usize,
    /// (matching, vertex) pairs violating the matching inequality.
    pub matching_row_violations: usize,
    pub hypo_matchable: usize,
    pub hypo_row_violations: usize,
    pub matrix_size: usize,
    /// Each matrix row is a PM_n vertex tight for the matching inequality.
    pub rows_tight: bool,
    /// The block layout of the appendix holds entrywise.
    pub block_structure: bool,
    pub determinant: Rat,
}

impl FacetReport {
    pub fn passed(&self) -> bool {
        self.matching_row_violations == 0
            && self.hypo_row_violations == 0
            && self.rows_tight
            && self.block_structure
            && !self.determinant.is_zero()
    }
}

fn block_structure_holds(n: usize, a: &[Vec<Rat>]) -> bool {
    let half = n / 2;
    let t = num_edges(n) - half;
    let size = t + half + 1;
    let want = |r: usize, c: usize| -> i64 {
        match (r < t, r < t + half, c < t, c < t + half) {
            // top band: identity, ones, ones
            (true, _, true, _) => (r == c) as i64,
            (true, _, false, _) => 1,
            // middle band: zeros, J - I, zero
            (false, true, true, _) => 0,
            (false, true, false, true) => (r != c) as i64,
            (false, true, false, false) => 0,
            // last row: zeros, ones, one
            (false, false, true, _) => 0,
            (false, false, false, _) => 1,
        }
    };
    a.len() == size
        && a.iter().enumerate().all(|(r, row)| {
            row.len() == size && row.iter().enumerate().all(|(c, v)| *v == Rat::from_int(want(r, c)))
        })
}

/// Validity of both appendix inequality families and exact facet
/// certification of the matching inequality for `12, 34, ...`.
pub fn check_appendix_facets(n: usize, exec: Exec) -> FacetReport {
    let verts = pm_vertices(n, exec);
    let half = n / 2;
    let matchings = perfect_matchings(n);
    // w >= Σ_{e∈M} x_e - n/2 + 1
    let matching_row_violations: usize = matchings
        .iter()
        .map(|m| {
            verts
                .iter()
                .filter(|(x, w)| (*w as i64) < m.iter().filter(|&&e| x[e]).count() as i64 - half as i64 + 1)
                .count()
        })
        .sum();
    let hypo = hypo_matchable_sets(n, exec);
    // w <= Σ_{e∉S} x_e
    let hypo_row_violations: usize = hypo
        .iter()
        .map(|s| {
            verts
                .iter()
                .filter(|(x, w)| (*w as usize) > x.iter().zip(s).filter(|(on, inside)| **on && !**inside).count())
                .count()
        })
        .sum();
    let fm = appendix_matrix(n);
    let first: Vec<usize> = (0..half).map(|k| edge_index(n, 2 * k, 2 * k + 1)).collect();
    let rows_tight = fm.points.iter().all(|(x, w)| {
        let lhs = *w as i64;
        let rhs = first.iter().filter(|&&e| x[e]).count() as i64 - half as i64 + 1;
        let vertex_w = has_pm(n, x).expect("valid graph");
        lhs == rhs && vertex_w == *w
    });
    FacetReport {
        n,
        matchings_checked: matchings.len(),
        matching_row_violations,
        hypo_matchable: hypo.len(),
        hypo_row_violations,
        matrix_size: fm.matrix.len(),
        rows_tight,
        block_structure: block_structure_holds(n, &fm.matrix),
        determinant: exact_det(&fm.matrix),
    }
}
