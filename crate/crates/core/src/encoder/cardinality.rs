//! Sequential-counter encoding of `Σ xᵢ ≤ k`.
//!
//! Auxiliary `s(i, j)` (for `i < n - 1`, `j < k`) reads "at least `j + 1`
//! of the first `i + 1` inputs are true". The counter uses `k·(n−1)`
//! auxiliaries and `2nk + n − 3k − 1` clauses, which together with the
//! `2n + 2m` detection clauses gives the `O(k·n + m)` size of the whole
//! encoding. Any input assignment with at most `k` true literals extends to
//! the auxiliaries by setting each `s(i, j)` to its intended meaning.

use crate::satcore::{CnfFormula, Lit, Var};

use super::EncodeError;

/// Clauses and auxiliaries produced for one at-most-k constraint.
#[derive(Debug, Clone, Default)]
pub struct CardinalityEncoding {
    pub clauses: Vec<Vec<Lit>>,
    pub aux: Vec<Var>,
}

/// Number of clauses the sequential counter emits for `n` inputs and bound
/// `k`. The constraint is vacuous for `k ≥ n` and emits nothing.
pub fn sequential_counter_clauses(n: usize, k: usize) -> usize {
    if k >= n {
        0
    } else {
        2 * n * k + n - 3 * k - 1
    }
}

pub fn sequential_counter_aux(n: usize, k: usize) -> usize {
    if k >= n {
        0
    } else {
        k * (n - 1)
    }
}

/// Encodes `Σ vars ≤ k`, allocating auxiliaries from `alloc`. The clauses
/// are returned, not added to `alloc`.
pub fn encode_cardinality(vars: &[Var], k: usize, alloc: &mut CnfFormula) -> Result<CardinalityEncoding, EncodeError> {
    let n = vars.len();
    if k == 0 || k > n {
        return Err(EncodeError::KOutOfRange { k, n });
    }
    if k == n {
        return Ok(CardinalityEncoding::default());
    }

    // s[i][j] for i in 0..n-1
    let s: Vec<Vec<Var>> = (0..n - 1).map(|_| alloc.new_vars(k as u32)).collect();
    let x = |i: usize| vars[i];
    let mut clauses = Vec::with_capacity(sequential_counter_clauses(n, k));

    clauses.push(vec![x(0).neg(), s[0][0].pos()]);
    for s0j in &s[0][1..] {
        clauses.push(vec![s0j.neg()]);
    }
    for i in 1..n - 1 {
        clauses.push(vec![x(i).neg(), s[i][0].pos()]);
        clauses.push(vec![s[i - 1][0].neg(), s[i][0].pos()]);
        for j in 1..k {
            clauses.push(vec![x(i).neg(), s[i - 1][j - 1].neg(), s[i][j].pos()]);
            clauses.push(vec![s[i - 1][j].neg(), s[i][j].pos()]);
        }
        clauses.push(vec![x(i).neg(), s[i - 1][k - 1].neg()]);
    }
    clauses.push(vec![x(n - 1).neg(), s[n - 2][k - 1].neg()]);

    debug_assert_eq!(clauses.len(), sequential_counter_clauses(n, k));
    Ok(CardinalityEncoding { clauses, aux: s.into_iter().flatten().collect() })
}
