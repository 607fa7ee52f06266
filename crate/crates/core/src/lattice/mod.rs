//! The intersection lattice of the linear plumbing and its isometries.
//!
//! The plumbing of spheres along the chain `-a_1, ..., -a_n` has a negative
//! definite intersection form `Q`. We store the positive definite `M = -Q`
//! (tridiagonal, diagonal `a_i`, off-diagonal `-1`); `O(M)` and `O(-M)` are
//! the same set of integer matrices.

mod search;
mod short;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::contfrac::{cf_invariants, CFExpansion};
use crate::error::{Error, Result};

use search::Backtrack;
use short::{exact_norm, vectors_of_norm, Decomposition};

pub const DEFAULT_GROUP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionLattice {
    diag: Vec<i64>,
    gram: Vec<Vec<i64>>,
}

impl IntersectionLattice {
    /// Tridiagonal lattice with the given diagonal and `-1` off the diagonal.
    /// Every diagonal entry must be at least 2, which makes `M` positive definite.
    pub fn from_diag(diag: &[i64]) -> Result<Self> {
        let coeffs = CFExpansion::new(diag.to_vec())?;
        gram(&coeffs)
    }

    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[i64] {
        &self.diag
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn is_palindromic(&self) -> bool {
        self.diag.iter().eq(self.diag.iter().rev())
    }

    /// `v^T M v`.
    pub fn norm(&self, v: &[i64]) -> i128 {
        exact_norm(&self.gram, v)
    }

    /// Leading principal minors `det M[..i]` for `i = 0..=n`.
    pub fn leading_minors(&self) -> Vec<i128> {
        let mut m = vec![1i128, self.diag[0] as i128];
        for i in 1..self.rank() {
            let next = self.diag[i] as i128 * m[i] - m[i - 1];
            m.push(next);
        }
        m
    }

    /// Coordinate bounds for vectors of norm at most `norm`:
    /// `|v_i| <= floor(sqrt(norm * (M^-1)_ii))`, with `(M^-1)_ii` the ratio of
    /// the complementary minor (leading block times trailing block, since `M`
    /// is tridiagonal) to `det M`. This is the box the exact enumeration sits in.
    pub fn coordinate_bounds(&self, norm: i64) -> Vec<i64> {
        let n = self.rank();
        let lead = self.leading_minors();
        let mut rev = self.clone();
        rev.diag.reverse();
        let trail = rev.leading_minors();
        let det = BigInt::from(lead[n]);
        (0..n)
            .map(|i| {
                let cof = BigInt::from(lead[i]) * BigInt::from(trail[n - 1 - i]);
                let limit = (BigInt::from(norm.max(0)) * cof).div_floor(&det);
                limit.sqrt().to_i64().expect("bound fits in i64")
            })
            .collect()
    }

    fn decomposition(&self) -> Decomposition {
        Decomposition::new(&self.gram).expect("diagonal >= 2 tridiagonal is positive definite")
    }
}

/// Builds `M` for an expansion; positive definiteness is checked through the
/// determinant recursion.
pub fn gram(coeffs: &CFExpansion) -> Result<IntersectionLattice> {
    let inv = cf_invariants(coeffs)?;
    debug_assert!((0..=coeffs.len() as isize).all(|i| inv.delta(i) != 0));
    let diag = coeffs.coeffs().to_vec();
    let n = diag.len();
    let mut g = vec![vec![0i64; n]; n];
    for i in 0..n {
        g[i][i] = diag[i];
        if i + 1 < n {
            g[i][i + 1] = -1;
            g[i + 1][i] = -1;
        }
    }
    Ok(IntersectionLattice { diag, gram: g })
}

/// All nonzero `v` with `v^T M v = norm`, sorted lexicographically.
pub fn short_vectors(lattice: &IntersectionLattice, norm: i64) -> Result<Vec<Vec<i64>>> {
    if norm < 0 {
        return Err(Error::InvalidNorm(norm));
    }
    Ok(vectors_of_norm(
        &lattice.gram,
        &lattice.decomposition(),
        norm,
    ))
}

/// An integer matrix `A` (row-major) with `A M A^T = M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Isometry {
    n: usize,
    entries: Vec<i64>,
}

impl Isometry {
    /// Validates `A M A^T = M`.
    pub fn new(lattice: &IntersectionLattice, rows: &[Vec<i64>]) -> Result<Self> {
        let n = lattice.rank();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("isometry must be {n}x{n}")));
        }
        let a = Isometry {
            n,
            entries: rows.concat(),
        };
        if !a.preserves(lattice) {
            return Err(Error::invalid("matrix does not preserve the form"));
        }
        Ok(a)
    }

    fn from_rows_unchecked(rows: &[&[i64]]) -> Self {
        Isometry {
            n: rows.len(),
            entries: rows.concat(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Isometry { n, entries }
    }

    /// `rho`, reversing the order of the basis.
    pub fn reversal(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + (n - 1 - i)] = 1;
        }
        Isometry { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn neg(&self) -> Self {
        Isometry {
            n: self.n,
            entries: self.entries.iter().map(|&x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &Isometry) -> Self {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Isometry { n, entries }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.get(i, j);
            }
        }
        Isometry { n, entries }
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> i64 {
        let n = self.n;
        let mut m: Vec<Vec<i128>> = self
            .entries
            .chunks(n)
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if m[k][k] == 0 {
                match (k + 1..n).find(|&r| m[r][k] != 0) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
                }
            }
            prev = m[k][k];
        }
        (sign * m[n - 1][n - 1]) as i64
    }

    /// The power of `A` just before the identity. Isometries of a definite
    /// form have finite order, so this terminates.
    pub fn inverse(&self) -> Self {
        let id = Isometry::identity(self.n);
        let mut prev = id.clone();
        let mut cur = self.clone();
        while cur != id {
            prev = cur.clone();
            cur = cur.mul(self);
        }
        prev
    }

    pub fn preserves(&self, lattice: &IntersectionLattice) -> bool {
        let n = self.n;
        if n != lattice.rank() {
            return false;
        }
        let g = &lattice.gram;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i128;
                for k in 0..n {
                    let a = self.get(i, k) as i128;
                    if a == 0 {
                        continue;
                    }
                    for l in 0..n {
                        s += a * g[k][l] as i128 * self.get(j, l) as i128;
                    }
                }
                if s != g[i][j] as i128 {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            crate::contfrac::write_list(f, row)?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryGroup {
    pub elements: Vec<Isometry>,
    /// False when the cap stopped the enumeration early.
    pub complete: bool,
}

impl IsometryGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, a: &Isometry) -> bool {
        self.elements.binary_search(a).is_ok()
    }

    /// Traces of all elements, sorted ascending.
    pub fn traces(&self) -> Vec<i64> {
        let mut t: Vec<i64> = self.elements.iter().map(Isometry::trace).collect();
        t.sort_unstable();
        t
    }

    pub fn require_complete(&self, cap: u64) -> Result<&Self> {
        if self.complete {
            Ok(self)
        } else {
            Err(Error::GroupTooLarge { cap })
        }
    }
}

/// Enumerates `O(M)`, sorted lexicographically by row-major entries. The
/// result holds at most `cap` elements; if more exist, `complete` is false
/// and the partial set is whatever the search reached first.
pub fn orthogonal_group(lattice: &IntersectionLattice, cap: u64) -> IsometryGroup {
    let dec = lattice.decomposition();
    let bt = Backtrack::new(&lattice.gram, &dec);
    let mut elements = Vec::new();
    let stats = bt.run(cap, |rows| {
        elements.push(Isometry::from_rows_unchecked(rows));
        ControlFlow::Continue(())
    });
    elements.sort();
    IsometryGroup {
        elements,
        complete: !stats.capped,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceSearch {
    /// The canonically least isometry with the requested trace.
    Found(Isometry),
    /// The whole group was searched; no element has the trace. Carries the
    /// group order and its trace histogram.
    Absent {
        order: u64,
        traces: BTreeMap<i64, u64>,
    },
    /// The cap ran out first.
    Indeterminate { cap: u64 },
}

impl TraceSearch {
    pub fn witness(&self) -> Option<&Isometry> {
        match self {
            TraceSearch::Found(a) => Some(a),
            _ => None,
        }
    }
}

/// Searches for an isometry of trace `t`.
///
/// The signed symmetries of the plumbing graph (`±id`, and `±rho` when the
/// diagonal is palindromic) are tried first, least first. Failing those, the
/// backtracking enumeration stops at the first element of trace `t` in its
/// (deterministic) search order; `cap` bounds the number of group elements
/// it may examine.
pub fn find_isometry_with_trace(lattice: &IntersectionLattice, t: i64, cap: u64) -> TraceSearch {
    if let Some(a) = graph_symmetries(lattice)
        .into_iter()
        .find(|a| a.trace() == t)
    {
        return TraceSearch::Found(a);
    }
    let dec = lattice.decomposition();
    let bt = Backtrack::new(&lattice.gram, &dec);
    let mut found = None;
    let mut traces = BTreeMap::new();
    let stats = bt.run(cap, |rows| {
        let trace: i64 = (0..rows.len()).map(|i| rows[i][i]).sum();
        *traces.entry(trace).or_insert(0u64) += 1;
        if trace == t {
            found = Some(Isometry::from_rows_unchecked(rows));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match found {
        Some(a) => TraceSearch::Found(a),
        None if stats.capped => TraceSearch::Indeterminate { cap },
        None => TraceSearch::Absent {
            order: stats.visited,
            traces,
        },
    }
}

/// Signed permutation isometries induced by automorphisms of the linear
/// plumbing graph, canonically sorted.
pub fn graph_symmetries(lattice: &IntersectionLattice) -> Vec<Isometry> {
    let shape = if lattice.is_palindromic() {
        GroupShape::PlusMinusIdentityAndReversal
    } else {
        GroupShape::PlusMinusIdentity
    };
    shape.elements(lattice.rank())
}

/// Symbolic description of the groups predicted for tridiagonal forms with
/// every diagonal entry at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupShape {
    /// `{id, -id}`
    PlusMinusIdentity,
    /// `{id, -id, rho, -rho}`
    PlusMinusIdentityAndReversal,
}

impl GroupShape {
    pub fn order(&self) -> usize {
        match self {
            GroupShape::PlusMinusIdentity => 2,
            GroupShape::PlusMinusIdentityAndReversal => 4,
        }
    }

    /// The predicted elements in rank `n`, canonically sorted.
    pub fn elements(&self, n: usize) -> Vec<Isometry> {
        let id = Isometry::identity(n);
        let mut out = vec![id.neg(), id];
        if *self == GroupShape::PlusMinusIdentityAndReversal {
            let rho = Isometry::reversal(n);
            out.push(rho.neg());
            out.push(rho);
        }
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for GroupShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupShape::PlusMinusIdentity => f.write_str("{±id}"),
            GroupShape::PlusMinusIdentityAndReversal => f.write_str("{±id,±rho}"),
        }
    }
}

/// `Some` only when `n >= 2` and every diagonal entry is at least 3.
pub fn gerstein_prediction(lattice: &IntersectionLattice) -> Option<GroupShape> {
    if lattice.rank() < 2 || lattice.diag.iter().any(|&a| a < 3) {
        return None;
    }
    Some(if lattice.is_palindromic() {
        GroupShape::PlusMinusIdentityAndReversal
    } else {
        GroupShape::PlusMinusIdentity
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(d: &[i64]) -> IntersectionLattice {
        IntersectionLattice::from_diag(d).unwrap()
    }

    fn iso(l: &IntersectionLattice, rows: &[&[i64]]) -> Isometry {
        Isometry::new(l, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gram_examples() {
        let l = lat(&[2, 4, 2]);
        assert_eq!(l.gram(), &[vec![2, -1, 0], vec![-1, 4, -1], vec![0, -1, 2]]);
        assert_eq!(lat(&[6]).gram(), &[vec![6]]);
        assert_eq!(lat(&[4, 6]).gram(), &[vec![4, -1], vec![-1, 6]]);
        assert_eq!(lat(&[2, 4, 2]).leading_minors(), vec![1, 2, 7, 12]);
        assert!(IntersectionLattice::from_diag(&[1, 3]).is_err());
    }

    #[test]
    fn short_vector_examples() {
        let v = short_vectors(&lat(&[2, 2]), 2).unwrap();
        assert_eq!(v.len(), 6);
        for w in [[1, 0], [0, 1], [1, 1]] {
            assert!(v.contains(&w.to_vec()));
            assert!(v.contains(&w.iter().map(|x| -x).collect()));
        }
        assert_eq!(
            short_vectors(&lat(&[4, 4]), 4).unwrap(),
            vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]
        );
        assert!(short_vectors(&lat(&[3, 5]), 0).unwrap().is_empty());
        assert_eq!(short_vectors(&lat(&[3]), -1), Err(Error::InvalidNorm(-1)));
    }

    #[test]
    fn coordinate_bounds_contain_short_vectors() {
        let l = lat(&[2, 3, 2]);
        for norm in 1..=10 {
            let b = l.coordinate_bounds(norm);
            for v in short_vectors(&l, norm).unwrap() {
                assert!(v.iter().zip(&b).all(|(x, m)| x.abs() <= *m));
            }
        }
        // A_1: (M^-1)_11 = 1/2, so norm 2 allows |v| <= 1
        assert_eq!(lat(&[2]).coordinate_bounds(2), vec![1]);
    }

    #[test]
    fn group_examples() {
        let g = orthogonal_group(&lat(&[4, 4]), DEFAULT_GROUP_CAP);
        assert!(g.complete);
        assert_eq!(
            g.elements,
            GroupShape::PlusMinusIdentityAndReversal.elements(2)
        );

        let g = orthogonal_group(&lat(&[4, 6]), DEFAULT_GROUP_CAP);
        assert_eq!(g.elements, GroupShape::PlusMinusIdentity.elements(2));

        let g = orthogonal_group(&lat(&[2, 2]), DEFAULT_GROUP_CAP);
        assert_eq!(g.order(), 12);
    }

    #[test]
    fn group_elements_are_sorted_and_unimodular() {
        let l = lat(&[2, 2, 2]);
        let g = orthogonal_group(&l, DEFAULT_GROUP_CAP);
        assert_eq!(g.order(), 2 * 24);
        assert!(g.elements.windows(2).all(|w| w[0] < w[1]));
        for a in &g.elements {
            assert!(a.preserves(&l));
            assert_eq!(a.det().abs(), 1);
        }
    }

    #[test]
    fn cap_truncates() {
        let l = lat(&[2, 2, 2]);
        let full = orthogonal_group(&l, DEFAULT_GROUP_CAP);
        let g = orthogonal_group(&l, 10);
        assert!(!g.complete);
        assert_eq!(g.order(), 10);
        assert!(g.elements.iter().all(|a| full.contains(a)));
        assert!(g.require_complete(10).is_err());
        let exact = orthogonal_group(&l, 48);
        assert!(exact.complete);
    }

    #[test]
    fn trace_search_examples() {
        let l = lat(&[2, 4, 2]);
        let w = find_isometry_with_trace(&l, -1, DEFAULT_GROUP_CAP);
        assert_eq!(
            w,
            TraceSearch::Found(iso(&l, &[&[0, 0, -1], &[0, -1, 0], &[-1, 0, 0]]))
        );
        // reflections in the roots e_1, e_3 make the group larger than {±id, ±rho}
        let g = orthogonal_group(&l, DEFAULT_GROUP_CAP);
        assert_eq!(g.order(), 16);
        let least = g.elements.iter().find(|a| a.trace() == -1).unwrap();
        assert_eq!(least.entries(), &[-1, 0, 0, 0, -1, -1, 0, 0, 1]);

        // non-symmetric witness through the backtracking stage
        let l = lat(&[2, 4]);
        let w = find_isometry_with_trace(&l, 0, DEFAULT_GROUP_CAP);
        let w = w.witness().unwrap();
        assert_eq!(w.trace(), 0);
        assert!(orthogonal_group(&l, DEFAULT_GROUP_CAP).contains(w));
        assert!(!graph_symmetries(&l).contains(w));

        let l = lat(&[4, 4]);
        assert_eq!(
            find_isometry_with_trace(&l, -1, DEFAULT_GROUP_CAP),
            TraceSearch::Absent {
                order: 4,
                traces: BTreeMap::from([(-2, 1), (0, 2), (2, 1)])
            }
        );
        assert_eq!(
            orthogonal_group(&l, DEFAULT_GROUP_CAP).traces(),
            vec![-2, 0, 0, 2]
        );

        let l = lat(&[6]);
        assert_eq!(
            find_isometry_with_trace(&l, -1, DEFAULT_GROUP_CAP),
            TraceSearch::Found(iso(&l, &[&[-1]]))
        );
    }

    #[test]
    fn gerstein_examples() {
        assert_eq!(
            gerstein_prediction(&lat(&[4, 4])),
            Some(GroupShape::PlusMinusIdentityAndReversal)
        );
        assert_eq!(
            gerstein_prediction(&lat(&[4, 6])),
            Some(GroupShape::PlusMinusIdentity)
        );
        assert_eq!(gerstein_prediction(&lat(&[2, 4, 2])), None);
        assert_eq!(gerstein_prediction(&lat(&[5])), None);
        assert_eq!(GroupShape::PlusMinusIdentityAndReversal.order(), 4);
    }

    #[test]
    fn reversal_trace_parity() {
        for n in 1..=9 {
            let expected = if n % 2 == 1 { 1 } else { 0 };
            assert_eq!(Isometry::reversal(n).trace(), expected);
        }
    }

    #[test]
    fn matrix_helpers() {
        let l = lat(&[2, 2, 2]);
        let g = orthogonal_group(&l, DEFAULT_GROUP_CAP);
        for a in &g.elements {
            let inv = a.inverse();
            assert_eq!(a.mul(&inv), Isometry::identity(3));
        }
        let rho = Isometry::reversal(3);
        assert_eq!(rho.det(), -1);
        assert_eq!(rho.transpose(), rho);
        assert_eq!(rho.to_string(), "[[0,0,1],[0,1,0],[1,0,0]]");
    }
}
