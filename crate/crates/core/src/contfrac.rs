//! Hirzebruch–Jung (negative) continued fractions.
//!
//! A lens space `L(p,q)` with `p > q > 0` coprime is encoded by the unique
//! expansion `p/q = a_1 - 1/(a_2 - 1/(... - 1/a_n))` with every `a_i >= 2`.
//! The expansion is also the list of (negated) framings of the linear chain
//! of unknots whose surgery produces `L(p,q)`, so everything downstream
//! (contact structures, the intersection lattice) is computed from it.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

/// The lens space `L(p,q)`, stored with `p >= 2`, `0 < q < p`, `gcd(p,q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LensSpace {
    p: i64,
    q: i64,
}

impl LensSpace {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid(format!("p must be at least 2, got {p}")));
        }
        if q <= 0 || q >= p {
            return Err(Error::invalid(format!(
                "q must satisfy 0 < q < p, got {p}/{q}"
            )));
        }
        if p.gcd(&q) != 1 {
            return Err(Error::invalid(format!(
                "p and q must be coprime, got {p}/{q}"
            )));
        }
        Ok(LensSpace { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// The `q'` with `q q' = 1 mod p` and `0 < q' < p`; `L(p,q')` has the
    /// reversed expansion.
    pub fn dual(&self) -> LensSpace {
        let ext = self.q.extended_gcd(&self.p);
        let q_inv = ext.x.mod_floor(&self.p);
        LensSpace {
            p: self.p,
            q: q_inv,
        }
    }

    /// Every lens space with the given `p`, in ascending `q`.
    pub fn all_with_p(p: i64) -> impl Iterator<Item = LensSpace> {
        (1..p.max(1)).filter_map(move |q| LensSpace::new(p, q).ok())
    }
}

impl fmt::Display for LensSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({},{})", self.p, self.q)
    }
}

/// Coefficients `a_1, ..., a_n` of a negative continued fraction, all `>= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CFExpansion {
    coeffs: Vec<i64>,
}

impl CFExpansion {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid(
                "expansion must have at least one coefficient",
            ));
        }
        if let Some(bad) = coeffs.iter().find(|&&a| a < 2) {
            return Err(Error::invalid(format!(
                "every coefficient must be at least 2, found {bad}"
            )));
        }
        Ok(CFExpansion { coeffs })
    }

    /// Accepts either all-positive entries (`2,4,2`) or the negated form
    /// (`-2,-4,-2`), normalizing to positive.
    pub fn from_signed(entries: &[i64]) -> Result<Self> {
        if !entries.is_empty() && entries.iter().all(|&a| a < 0) {
            let coeffs = entries
                .iter()
                .map(|&a| {
                    a.checked_neg()
                        .ok_or(Error::Overflow("coefficient negation"))
                })
                .collect::<Result<Vec<_>>>()?;
            return CFExpansion::new(coeffs);
        }
        if entries.iter().any(|&a| a < 0) {
            return Err(Error::invalid(
                "coefficients must be all positive or all negative",
            ));
        }
        CFExpansion::new(entries.to_vec())
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn reversed(&self) -> CFExpansion {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        CFExpansion { coeffs }
    }

    pub fn all_twos(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 2)
    }

    pub fn all_even(&self) -> bool {
        self.coeffs.iter().all(|&a| a % 2 == 0)
    }

    /// `x_i = a_i / 2` when every coefficient is even.
    pub fn halves(&self) -> Option<Vec<i64>> {
        self.all_even()
            .then(|| self.coeffs.iter().map(|&a| a / 2).collect())
    }

    /// The negated form `[-a_1, ..., -a_n]` used for `-p/q`.
    pub fn negated(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&a| -a).collect()
    }
}

impl fmt::Display for CFExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, &self.coeffs)
    }
}

pub(crate) fn write_list(f: &mut impl fmt::Write, xs: &[i64]) -> fmt::Result {
    f.write_char('[')?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{x}")?;
    }
    f.write_char(']')
}

/// Sequences derived from an expansion: the meridian classes `mu_i`
/// (with `mu_1` a generator of `H_1 = Z/p`), the signed leading minors
/// `Delta[i]` of the linking matrix, and its determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFInvariants {
    mu: Vec<i64>,
    // delta[k] holds Delta[k - 1], so delta[0] = Delta[-1].
    delta: Vec<i64>,
    det: i64,
    p: i64,
}

impl CFInvariants {
    /// `mu_1 .. mu_n`; index 0 is `mu_1`.
    pub fn mu(&self) -> &[i64] {
        &self.mu
    }

    /// `mu_i` with a 1-based index.
    pub fn mu_at(&self, i: usize) -> i64 {
        self.mu[i - 1]
    }

    /// `Delta[-1] .. Delta[n]`.
    pub fn delta_seq(&self) -> &[i64] {
        &self.delta
    }

    /// `Delta[i]` for `-1 <= i <= n`.
    pub fn delta(&self, i: isize) -> i64 {
        self.delta[(i + 1) as usize]
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }
}

/// Expands `p/q` by repeated ceiling division.
pub fn expand(p: i64, q: i64) -> Result<CFExpansion> {
    let lens = LensSpace::new(p, q)?;
    Ok(expand_lens(&lens))
}

pub fn expand_lens(lens: &LensSpace) -> CFExpansion {
    let (mut num, mut den) = (lens.p as i128, lens.q as i128);
    let mut coeffs = Vec::new();
    while den != 0 {
        let a = (num + den - 1) / den;
        coeffs.push(a as i64);
        // 0 <= a*den - num < den
        let next = a * den - num;
        num = den;
        den = next;
    }
    CFExpansion { coeffs }
}

/// Folds the continued fraction from the tail: `(num, den) <- (a*num - den, num)`.
pub fn evaluate(expansion: &CFExpansion) -> Result<LensSpace> {
    let coeffs = expansion.coeffs();
    let mut num: i64 = *coeffs.last().expect("nonempty");
    let mut den: i64 = 1;
    for &a in coeffs.iter().rev().skip(1) {
        let next = a
            .checked_mul(num)
            .and_then(|x| x.checked_sub(den))
            .ok_or(Error::Overflow("continued fraction value"))?;
        den = num;
        num = next;
    }
    Ok(LensSpace { p: num, q: den })
}

/// Evaluates both recursions with overflow detection.
pub fn cf_invariants(expansion: &CFExpansion) -> Result<CFInvariants> {
    let a = expansion.coeffs();
    let n = a.len();

    let mut mu = Vec::with_capacity(n);
    mu.push(1i64);
    if n >= 2 {
        mu.push(a[0]);
    }
    for i in 2..n {
        // mu_{i+1} = a_i mu_i - mu_{i-1} in 1-based terms
        let next = a[i - 1]
            .checked_mul(mu[i - 1])
            .and_then(|x| x.checked_sub(mu[i - 2]))
            .ok_or(Error::Overflow("meridian recursion"))?;
        mu.push(next);
    }

    let mut delta = Vec::with_capacity(n + 2);
    delta.push(0i64);
    delta.push(1i64);
    for (k, &ak) in a.iter().enumerate() {
        let next = ak
            .checked_neg()
            .and_then(|x| x.checked_mul(delta[k + 1]))
            .and_then(|x| x.checked_sub(delta[k]))
            .ok_or(Error::Overflow("determinant recursion"))?;
        delta.push(next);
    }

    let det = delta[n + 1];
    let p = det.checked_abs().ok_or(Error::Overflow("determinant"))?;
    Ok(CFInvariants { mu, delta, det, p })
}

pub fn is_palindromic(expansion: &CFExpansion) -> bool {
    let a = expansion.coeffs();
    a.iter().eq(a.iter().rev())
}

pub fn q_squared_is_one(p: i64, q: i64) -> Result<bool> {
    let lens = LensSpace::new(p, q)?;
    Ok(lens_q_squared_is_one(&lens))
}

pub(crate) fn lens_q_squared_is_one(lens: &LensSpace) -> bool {
    let q = lens.q as i128;
    (q * q).rem_euclid(lens.p as i128) == 1
}
