//! Exact enumeration of lattice vectors of a given norm.
//!
//! The Gram matrix is split as `Q(x) = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2`
//! over the rationals (a square-root-free Cholesky decomposition). Coordinates
//! are fixed from `x_n` down to `x_1`; at each level the admissible `x_i` form
//! the integer points of an interval around the rational center
//! `-sum_{j>i} u_ij x_j`, found without floating point. This visits exactly the
//! integer points of the ellipsoid `Q(x) <= N`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Square-root-free Cholesky factors of a positive definite Gram matrix.
pub(crate) struct Decomposition {
    n: usize,
    d: Vec<BigRational>,
    // u[i][j] for j > i
    u: Vec<Vec<BigRational>>,
}

impl Decomposition {
    /// `None` when the matrix is not positive definite.
    pub(crate) fn new(gram: &[Vec<i64>]) -> Option<Self> {
        let n = gram.len();
        let mut q: Vec<Vec<BigRational>> = gram
            .iter()
            .map(|row| row.iter().map(|&x| rat(x)).collect())
            .collect();
        for i in 0..n {
            if !q[i][i].is_positive() {
                return None;
            }
            for j in i + 1..n {
                q[j][i] = q[i][j].clone();
                q[i][j] = &q[i][j] / &q[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let delta = &q[k][i] * &q[i][l];
                    q[k][l] -= delta;
                }
            }
        }
        let d = (0..n).map(|i| q[i][i].clone()).collect();
        Some(Decomposition { n, d, u: q })
    }
}

/// All nonzero `v` with `v^T G v == norm`, sorted lexicographically.
pub(crate) fn vectors_of_norm(gram: &[Vec<i64>], dec: &Decomposition, norm: i64) -> Vec<Vec<i64>> {
    if norm <= 0 {
        return Vec::new();
    }
    let n = dec.n;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    descend(gram, dec, norm, n, rat(norm), &mut x, &mut out);
    out.sort();
    out
}

fn descend(
    gram: &[Vec<i64>],
    dec: &Decomposition,
    norm: i64,
    level: usize,
    budget: BigRational,
    x: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if level == 0 {
        if x.iter().any(|&c| c != 0) && exact_norm(gram, x) == norm as i128 {
            out.push(x.clone());
        }
        return;
    }
    let i = level - 1;
    let mut center = BigRational::zero();
    for j in i + 1..dec.n {
        if x[j] != 0 {
            center -= &dec.u[i][j] * rat(x[j]);
        }
    }
    let d = &dec.d[i];
    let cost = |v: i64| -> BigRational {
        let t = rat(v) - &center;
        d * &t * &t
    };
    let base = center.floor().to_integer();
    let base: i64 = i64::try_from(base).expect("coordinate fits in i64");

    let (mut lo, mut hi) = if cost(base) <= budget {
        (base, base)
    } else if cost(base + 1) <= budget {
        (base + 1, base + 1)
    } else {
        return;
    };
    while cost(lo - 1) <= budget {
        lo -= 1;
    }
    while cost(hi + 1) <= budget {
        hi += 1;
    }
    for v in lo..=hi {
        let rest = &budget - cost(v);
        x[i] = v;
        descend(gram, dec, norm, i, rest, x, out);
    }
    x[i] = 0;
}

pub(crate) fn exact_norm(gram: &[Vec<i64>], v: &[i64]) -> i128 {
    let mut s: i128 = 0;
    for (i, row) in gram.iter().enumerate() {
        if v[i] == 0 {
            continue;
        }
        for (j, &g) in row.iter().enumerate() {
            s += v[i] as i128 * g as i128 * v[j] as i128;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(gram: &[Vec<i64>], norm: i64, bound: i64) -> Vec<Vec<i64>> {
        let n = gram.len();
        let mut out = Vec::new();
        let width = (2 * bound + 1) as usize;
        let total = width.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let v: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (c % width) as i64 - bound;
                    c /= width;
                    d
                })
                .collect();
            if v.iter().any(|&t| t != 0) && exact_norm(gram, &v) == norm as i128 {
                out.push(v);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn a2_roots() {
        let g = vec![vec![2, -1], vec![-1, 2]];
        let dec = Decomposition::new(&g).unwrap();
        let v = vectors_of_norm(&g, &dec, 2);
        assert_eq!(
            v,
            vec![
                vec![-1, -1],
                vec![-1, 0],
                vec![0, -1],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1]
            ]
        );
        assert_eq!(v, brute(&g, 2, 2));
    }

    #[test]
    fn non_tridiagonal_gram() {
        let g = vec![vec![3, 1, 1], vec![1, 3, -1], vec![1, -1, 5]];
        let dec = Decomposition::new(&g).unwrap();
        for norm in 1..=12 {
            assert_eq!(
                vectors_of_norm(&g, &dec, norm),
                brute(&g, norm, 4),
                "norm {norm}"
            );
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(Decomposition::new(&[vec![1, 2], vec![2, 1]]).is_none());
        assert!(Decomposition::new(&[vec![0]]).is_none());
    }
}
