//! Tight contact structures on `L(p,q)` as rotation-number vectors.
//!
//! Each tight structure comes from a Legendrian realization of the surgery
//! chain; component `i` carries a rotation number `r_i` with
//! `|r_i| <= a_i - 2` and `r_i = a_i (mod 2)`. The Poincaré dual of `c_1`
//! is `sum r_i mu_i` in `H_1 = Z/p`.

use std::fmt;

use crate::contfrac::{cf_invariants, CFExpansion, CFInvariants};
use crate::error::{Error, Result};

pub const DEFAULT_STRUCTURE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RotationVector {
    coeffs: CFExpansion,
    r: Vec<i64>,
}

impl RotationVector {
    pub fn new(coeffs: CFExpansion, r: Vec<i64>) -> Result<Self> {
        if r.len() != coeffs.len() {
            return Err(Error::invalid(format!(
                "expected {} rotation numbers, got {}",
                coeffs.len(),
                r.len()
            )));
        }
        for (i, (&ri, &ai)) in r.iter().zip(coeffs.coeffs()).enumerate() {
            if ri.unsigned_abs() > (ai - 2) as u64 {
                return Err(Error::invalid(format!(
                    "rotation number r_{} = {ri} exceeds a_{} - 2 = {}",
                    i + 1,
                    i + 1,
                    ai - 2
                )));
            }
            if (ri - ai).rem_euclid(2) != 0 {
                return Err(Error::invalid(format!(
                    "rotation number r_{} = {ri} must have the parity of a_{} = {ai}",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(RotationVector { coeffs, r })
    }

    /// The all-zero vector, which exists only when every `a_i` is even.
    pub fn zero(coeffs: CFExpansion) -> Result<Self> {
        let n = coeffs.len();
        RotationVector::new(coeffs, vec![0; n])
    }

    pub fn coeffs(&self) -> &CFExpansion {
        &self.coeffs
    }

    pub fn values(&self) -> &[i64] {
        &self.r
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().all(|&x| x == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TightClass {
    UniversallyTight,
    VirtuallyOvertwisted,
}

impl TightClass {
    pub fn short_name(&self) -> &'static str {
        match self {
            TightClass::UniversallyTight => "UT",
            TightClass::VirtuallyOvertwisted => "VO",
        }
    }
}

impl fmt::Display for TightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// `c_1(xi)` as an element of `Z/p`, stored in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChernResidue {
    pub value: i64,
    pub p: i64,
}

impl ChernResidue {
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for ChernResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.p)
    }
}

/// `prod (a_i - 1)`, the number of tight structures.
pub fn structure_count(coeffs: &CFExpansion) -> u128 {
    coeffs
        .coeffs()
        .iter()
        .try_fold(1u128, |acc, &a| acc.checked_mul((a - 1) as u128))
        .unwrap_or(u128::MAX)
}

/// All rotation vectors, lexicographic in `(r_1, ..., r_n)` with each slot ascending.
pub fn enumerate_structures(coeffs: &CFExpansion, cap: u64) -> Result<Vec<RotationVector>> {
    let count = structure_count(coeffs);
    if count > cap as u128 {
        return Err(Error::ResultTooLarge { count, cap });
    }
    let slots: Vec<Vec<i64>> = coeffs
        .coeffs()
        .iter()
        .map(|&a| (-(a - 2)..=(a - 2)).step_by(2).collect())
        .collect();

    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; slots.len()];
    loop {
        let r = idx.iter().zip(&slots).map(|(&k, s)| s[k]).collect();
        out.push(RotationVector {
            coeffs: coeffs.clone(),
            r,
        });

        // odometer, last slot fastest
        let mut pos = slots.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < slots[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The integer `sum r_i mu_i`, a lift of `PD(c_1)`.
pub fn rotation_sum(r: &RotationVector) -> Result<i64> {
    let inv = cf_invariants(&r.coeffs)?;
    weighted_sum(&inv, &r.r)
}

fn weighted_sum(inv: &CFInvariants, r: &[i64]) -> Result<i64> {
    r.iter().zip(inv.mu()).try_fold(0i64, |acc, (&ri, &mi)| {
        ri.checked_mul(mi)
            .and_then(|x| acc.checked_add(x))
            .ok_or(Error::Overflow("rotation sum"))
    })
}

pub fn chern_residue(r: &RotationVector) -> Result<ChernResidue> {
    let inv = cf_invariants(&r.coeffs)?;
    let sum = weighted_sum(&inv, &r.r)?;
    Ok(ChernResidue {
        value: sum.rem_euclid(inv.p()),
        p: inv.p(),
    })
}

/// Universally tight exactly when all stabilizations sit on one side,
/// i.e. `r = (a_i - 2)_i` or `r = -(a_i - 2)_i`.
pub fn classify_structure(r: &RotationVector) -> TightClass {
    let a = r.coeffs.coeffs();
    let plus = r.r.iter().zip(a).all(|(&ri, &ai)| ri == ai - 2);
    let minus = r.r.iter().zip(a).all(|(&ri, &ai)| ri == 2 - ai);
    if plus || minus {
        TightClass::UniversallyTight
    } else {
        TightClass::VirtuallyOvertwisted
    }
}

/// Checks, over every structure, that `c_1 = 0` happens exactly at `r = 0`.
pub fn check_c1_theorem(coeffs: &CFExpansion, cap: u64) -> Result<bool> {
    let inv = cf_invariants(coeffs)?;
    for r in enumerate_structures(coeffs, cap)? {
        let residue = weighted_sum(&inv, &r.r)?.rem_euclid(inv.p());
        if (residue == 0) != r.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The inequalities behind the vanishing theorem, evaluated on one input.
/// Each field is the truth value of the inequality; inequalities conditioned
/// on `r_n != 0` (or on `n >= 2`) are vacuously true when the condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundReport {
    /// `|det Q| > |sum r_i mu_i|`.
    pub det_exceeds_sum: bool,
    /// `a_n mu_n - a_{n-1} mu_{n-1} > 0`.
    pub tail_growth: bool,
    /// `|r_n mu_n| - |r_{n-1} mu_{n-1}| > 0` when `r_n != 0`.
    pub last_dominates_previous: bool,
    /// `|r_n mu_n| > |sum_{i<n} r_i mu_i|` when `r_n != 0`.
    pub last_dominates_prefix: bool,
    /// `sum r_i mu_i = 0` implies `r = 0`.
    pub zero_sum_forces_zero: bool,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.det_exceeds_sum
            && self.tail_growth
            && self.last_dominates_previous
            && self.last_dominates_prefix
            && self.zero_sum_forces_zero
    }
}

pub fn lemma_bounds(r: &RotationVector) -> Result<BoundReport> {
    let inv = cf_invariants(&r.coeffs)?;
    let a = r.coeffs.coeffs();
    let n = a.len();
    let mu = inv.mu();
    let rv = &r.r;
    let ovf = || Error::Overflow("lemma bounds");

    let sum = weighted_sum(&inv, rv)?;
    let det_exceeds_sum = inv.det().unsigned_abs() > sum.unsigned_abs();

    let tail_growth = if n >= 2 {
        let last = a[n - 1].checked_mul(mu[n - 1]).ok_or_else(ovf)?;
        let prev = a[n - 2].checked_mul(mu[n - 2]).ok_or_else(ovf)?;
        last > prev
    } else {
        true
    };

    let last_term = rv[n - 1]
        .checked_mul(mu[n - 1])
        .ok_or_else(ovf)?
        .unsigned_abs();
    let last_dominates_previous = if rv[n - 1] != 0 && n >= 2 {
        let prev_term = rv[n - 2]
            .checked_mul(mu[n - 2])
            .ok_or_else(ovf)?
            .unsigned_abs();
        last_term > prev_term
    } else {
        true
    };

    let last_dominates_prefix = if rv[n - 1] != 0 {
        let prefix = weighted_sum(&inv, &rv[..n - 1])?;
        last_term > prefix.unsigned_abs()
    } else {
        true
    };

    let zero_sum_forces_zero = sum != 0 || r.is_zero();

    Ok(BoundReport {
        det_exceeds_sum,
        tail_growth,
        last_dominates_previous,
        last_dominates_prefix,
        zero_sum_forces_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::expand;

    fn cf(xs: &[i64]) -> CFExpansion {
        CFExpansion::new(xs.to_vec()).unwrap()
    }

    fn rot(xs: &[i64], r: &[i64]) -> RotationVector {
        RotationVector::new(cf(xs), r.to_vec()).unwrap()
    }

    fn values(v: &[RotationVector]) -> Vec<Vec<i64>> {
        v.iter().map(|r| r.values().to_vec()).collect()
    }

    #[test]
    fn enumerate_examples() {
        let s = enumerate_structures(&cf(&[3]), DEFAULT_STRUCTURE_CAP).unwrap();
        assert_eq!(values(&s), vec![vec![-1], vec![1]]);

        let s = enumerate_structures(&cf(&[2, 2, 2]), DEFAULT_STRUCTURE_CAP).unwrap();
        assert_eq!(values(&s), vec![vec![0, 0, 0]]);

        let s = enumerate_structures(&cf(&[2, 3, 2]), DEFAULT_STRUCTURE_CAP).unwrap();
        assert_eq!(values(&s), vec![vec![0, -1, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn enumerate_is_lexicographic() {
        let s = enumerate_structures(&cf(&[4, 3, 5]), DEFAULT_STRUCTURE_CAP).unwrap();
        assert_eq!(s.len(), 3 * 2 * 4);
        let v = values(&s);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(v[0], vec![-2, -1, -3]);
        assert_eq!(v[v.len() - 1], vec![2, 1, 3]);
    }

    #[test]
    fn enumerate_respects_cap() {
        let e = enumerate_structures(&cf(&[11, 11]), 99).unwrap_err();
        assert_eq!(
            e,
            Error::ResultTooLarge {
                count: 100,
                cap: 99
            }
        );
        assert_eq!(
            enumerate_structures(&cf(&[11, 11]), 100).unwrap().len(),
            100
        );
    }

    #[test]
    fn rotation_vector_validation() {
        assert!(RotationVector::new(cf(&[4]), vec![1]).is_err());
        assert!(RotationVector::new(cf(&[4]), vec![4]).is_err());
        assert!(RotationVector::new(cf(&[4]), vec![-2]).is_ok());
        assert!(RotationVector::new(cf(&[4, 4]), vec![0]).is_err());
        assert!(RotationVector::zero(cf(&[3, 4])).is_err());
    }

    #[test]
    fn chern_examples() {
        let c = chern_residue(&rot(&[2, 4, 2], &[0, 0, 0])).unwrap();
        assert_eq!((c.value, c.p), (0, 12));
        let c = chern_residue(&rot(&[3], &[1])).unwrap();
        assert_eq!((c.value, c.p), (1, 3));
        let c = chern_residue(&rot(&[2, 3, 2], &[0, 1, 0])).unwrap();
        assert_eq!((c.value, c.p), (2, 8));
        // negative sums wrap into [0, p)
        let c = chern_residue(&rot(&[2, 3, 2], &[0, -1, 0])).unwrap();
        assert_eq!((c.value, c.p), (6, 8));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_structure(&rot(&[4], &[2])),
            TightClass::UniversallyTight
        );
        assert_eq!(
            classify_structure(&rot(&[4], &[-2])),
            TightClass::UniversallyTight
        );
        assert_eq!(
            classify_structure(&rot(&[4], &[0])),
            TightClass::VirtuallyOvertwisted
        );
        assert_eq!(
            classify_structure(&rot(&[2; 5], &[0; 5])),
            TightClass::UniversallyTight
        );
        assert_eq!(
            classify_structure(&rot(&[2, 4, 2], &[0, 0, 0])),
            TightClass::VirtuallyOvertwisted
        );
        // mixed-sign extremes are not universally tight
        assert_eq!(
            classify_structure(&rot(&[3, 3], &[1, -1])),
            TightClass::VirtuallyOvertwisted
        );
    }

    #[test]
    fn c1_theorem_examples() {
        assert!(check_c1_theorem(&cf(&[2, 4, 2]), DEFAULT_STRUCTURE_CAP).unwrap());
        assert!(check_c1_theorem(&cf(&[2]), DEFAULT_STRUCTURE_CAP).unwrap());

        let e = cf(&[5, 7]);
        assert_eq!(e, expand(34, 7).unwrap());
        assert!(check_c1_theorem(&e, DEFAULT_STRUCTURE_CAP).unwrap());
        let all = enumerate_structures(&e, DEFAULT_STRUCTURE_CAP).unwrap();
        assert_eq!(all.len(), 24);
        assert!(all.iter().all(|r| !chern_residue(r).unwrap().is_zero()));
    }

    #[test]
    fn lemma_examples() {
        let b = lemma_bounds(&rot(&[2, 3, 2], &[0, 1, 0])).unwrap();
        assert!(b.all_hold());
        assert_eq!(rotation_sum(&rot(&[2, 3, 2], &[0, 1, 0])).unwrap(), 2);

        let b = lemma_bounds(&rot(&[2, 2], &[0, 0])).unwrap();
        assert!(b.all_hold());

        let r = rot(&[3, 3], &[1, -1]);
        let b = lemma_bounds(&r).unwrap();
        assert!(b.all_hold());
        let inv = cf_invariants(r.coeffs()).unwrap();
        assert_eq!(inv.mu(), &[1, 3]);
    }

    #[test]
    fn universally_tight_count() {
        for (p, q, expected) in [(7, 6, 1), (12, 7, 2), (34, 7, 2), (2, 1, 1)] {
            let e = expand(p, q).unwrap();
            let n = enumerate_structures(&e, DEFAULT_STRUCTURE_CAP)
                .unwrap()
                .iter()
                .filter(|r| classify_structure(r) == TightClass::UniversallyTight)
                .count();
            assert_eq!(n, expected, "L({p},{q})");
        }
    }
}
