//! Backtracking over isometries `A` with `A M A^T = M`.
//!
//! Row `i` of `A` is the image `b_i` of the basis vector `e_i`, so it is a
//! vector of norm `M_ii`, and `b_i M b_j^T = M_ij` for every pair. The search
//! is cut down in three ways:
//!
//! * fingerprint: an isometry permutes each set `V(k)` of vectors of norm
//!   `k`, so `#{w in V(M_jj) : w M v^T = M_ij}` must be the same for the
//!   candidate `v` as for `e_i`, for every `j`;
//! * forward checking: fixing a row filters the candidates of every open row
//!   down to those with the right inner product against it;
//! * the open row with the fewest remaining candidates is fixed next (lowest
//!   index on ties).
//!
//! Completions come out in a deterministic order that is not lexicographic;
//! callers sort when they need the canonical order.

use std::collections::HashMap;
use std::ops::ControlFlow;

use super::short::{vectors_of_norm, Decomposition};

pub(crate) struct Backtrack<'a> {
    gram: &'a [Vec<i64>],
    // filtered candidates for each row, sorted
    candidates: Vec<Vec<Vec<i64>>>,
    // candidates[i][k] * M, for the inner-product test
    images: Vec<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SearchStats {
    /// Completed matrices handed to the visitor.
    pub visited: u64,
    /// The cap was hit before the search space was exhausted.
    pub capped: bool,
    /// The visitor asked to stop.
    pub stopped: bool,
}

impl<'a> Backtrack<'a> {
    pub(crate) fn new(gram: &'a [Vec<i64>], dec: &Decomposition) -> Self {
        let n = gram.len();
        let mut by_norm: HashMap<i64, Vec<Vec<i64>>> = HashMap::new();
        for i in 0..n {
            by_norm
                .entry(gram[i][i])
                .or_insert_with(|| vectors_of_norm(gram, dec, gram[i][i]));
        }
        let images_of = |vs: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
            vs.iter().map(|v| times_gram(gram, v)).collect()
        };
        let norm_images: HashMap<i64, Vec<Vec<i64>>> =
            by_norm.iter().map(|(&k, vs)| (k, images_of(vs))).collect();

        let mut candidates = Vec::with_capacity(n);
        for i in 0..n {
            // j = i only counts v itself; rows sharing (M_jj, M_ij) agree
            let mut keys: Vec<(i64, i64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (gram[j][j], gram[i][j]))
                .collect();
            keys.sort_unstable();
            keys.dedup();
            let fingerprint = |v: &[i64]| -> Vec<usize> {
                keys.iter()
                    .map(|&(norm, target)| {
                        norm_images[&norm]
                            .iter()
                            .filter(|img| dot(img, v) == target as i128)
                            .count()
                    })
                    .collect()
            };
            let mut e = vec![0i64; n];
            e[i] = 1;
            let reference = fingerprint(&e);
            let kept: Vec<Vec<i64>> = by_norm[&gram[i][i]]
                .iter()
                .filter(|v| fingerprint(v) == reference)
                .cloned()
                .collect();
            candidates.push(kept);
        }
        let images = candidates.iter().map(images_of).collect();
        Backtrack {
            gram,
            candidates,
            images,
        }
    }

    /// Visits at most `cap` matrices; finding one more sets `capped`.
    pub(crate) fn run<F>(&self, cap: u64, mut visit: F) -> SearchStats
    where
        F: FnMut(&[&[i64]]) -> ControlFlow<()>,
    {
        let n = self.gram.len();
        let mut state = State {
            chosen: vec![usize::MAX; n],
            stats: SearchStats {
                visited: 0,
                capped: false,
                stopped: false,
            },
        };
        let domains: Vec<Vec<u32>> = self
            .candidates
            .iter()
            .map(|c| (0..c.len() as u32).collect())
            .collect();
        if domains.iter().all(|d| !d.is_empty()) {
            let _ = self.step(&domains, cap, &mut state, &mut visit);
        }
        state.stats
    }

    fn step<F>(
        &self,
        domains: &[Vec<u32>],
        cap: u64,
        state: &mut State,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[&[i64]]) -> ControlFlow<()>,
    {
        let n = self.gram.len();
        let open = (0..n)
            .filter(|&i| state.chosen[i] == usize::MAX)
            .min_by_key(|&i| (domains[i].len(), i));
        let Some(row) = open else {
            if state.stats.visited >= cap {
                state.stats.capped = true;
                return ControlFlow::Break(());
            }
            state.stats.visited += 1;
            let rows: Vec<&[i64]> = (0..n)
                .map(|i| self.candidates[i][state.chosen[i]].as_slice())
                .collect();
            if visit(&rows).is_break() {
                state.stats.stopped = true;
                return ControlFlow::Break(());
            }
            return ControlFlow::Continue(());
        };

        'next: for &k in &domains[row] {
            let img = &self.images[row][k as usize];
            let mut narrowed = domains.to_vec();
            for j in 0..n {
                if j == row || state.chosen[j] != usize::MAX {
                    continue;
                }
                let target = self.gram[row][j] as i128;
                let cands = &self.candidates[j];
                narrowed[j].retain(|&m| dot(img, &cands[m as usize]) == target);
                if narrowed[j].is_empty() {
                    continue 'next;
                }
            }
            state.chosen[row] = k as usize;
            let flow = self.step(&narrowed, cap, state, visit);
            state.chosen[row] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

struct State {
    chosen: Vec<usize>,
    stats: SearchStats,
}

fn times_gram(gram: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    let n = gram.len();
    (0..n)
        .map(|j| (0..n).map(|i| v[i] * gram[i][j]).sum())
        .collect()
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}
