//! Brute-force ground truth that does not go through the CNF encoding.
//!
//! Signatures are computed straight from the graph, GICS-ness by hashing the
//! signature of every failure set of size at most `k`, and grouped
//! independent support by inspecting the enumerated truth table. Everything
//! here is exponential and meant for small instances only.

use std::collections::HashMap;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::encoder::EncodedInstance;
use crate::graph::{Graph, GraphError, NodeId};
use crate::satcore::{enumerate_models_projected, SatError, Var};

/// Default cap on enumerated objects (subsets, candidate sets, models).
pub const DEFAULT_LIMIT: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration needs {needed} items, limit is {limit}")]
    LimitExceeded { needed: String, limit: usize },
    #[error("k = {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sat(#[from] SatError),
}

/// `(U ∩ S, N⁺(U) ∩ S)`, both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub sigma0: Vec<NodeId>,
    pub sigma1: Vec<NodeId>,
}

fn membership(g: &Graph, nodes: &[NodeId]) -> Result<Vec<bool>, GraphError> {
    let mut mark = vec![false; g.n()];
    for &v in nodes {
        g.check_node(v)?;
        mark[v.index()] = true;
    }
    Ok(mark)
}

fn signature_with(g: &Graph, is_sensor: &[bool], failed: &[NodeId]) -> Result<Signature, GraphError> {
    let mut sigma0: Vec<NodeId> = failed.iter().copied().filter(|v| is_sensor[v.index()]).collect();
    sigma0.sort_unstable();
    sigma0.dedup();
    let sigma1 = g.closed_neighborhood_set(failed)?.into_iter().filter(|v| is_sensor[v.index()]).collect();
    Ok(Signature { sigma0, sigma1 })
}

pub fn signature(g: &Graph, sensors: &[NodeId], failed: &[NodeId]) -> Result<Signature, GraphError> {
    let is_sensor = membership(g, sensors)?;
    signature_with(g, &is_sensor, failed)
}

/// `Σ_{i ≤ k} C(n, i)`, or `None` on overflow.
pub fn count_subsets_up_to(n: usize, k: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for i in 0..=k.min(n) {
        if i > 0 {
            term = term.checked_mul((n - i + 1) as u128)? / i as u128;
        }
        total = total.checked_add(term)?;
    }
    Some(total)
}

/// Every subset of `0..n` with at most `k` members: by size, then
/// lexicographically.
pub fn subsets_up_to(n: usize, k: usize) -> impl Iterator<Item = Vec<NodeId>> {
    (0..=k.min(n)).flat_map(move |size| (0..n as u32).map(NodeId).combinations(size))
}

fn check_limit(needed: Option<u128>, limit: usize) -> Result<(), OracleError> {
    match needed {
        Some(x) if x <= limit as u128 => Ok(()),
        Some(x) => Err(OracleError::LimitExceeded { needed: x.to_string(), limit }),
        None => Err(OracleError::LimitExceeded { needed: "overflow".into(), limit }),
    }
}

fn check_k(g: &Graph, k: usize) -> Result<(), OracleError> {
    if k == 0 || k > g.n() {
        Err(OracleError::KOutOfRange { k, n: g.n() })
    } else {
        Ok(())
    }
}

/// Two distinct failure sets with the same signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub first: Vec<NodeId>,
    pub second: Vec<NodeId>,
    pub signature: Signature,
}

/// First signature collision in canonical subset order, if any.
pub fn find_collision(g: &Graph, sensors: &[NodeId], k: usize, limit: usize) -> Result<Option<Collision>, OracleError> {
    check_k(g, k)?;
    check_limit(count_subsets_up_to(g.n(), k), limit)?;
    let is_sensor = membership(g, sensors)?;
    let mut seen: HashMap<Signature, Vec<NodeId>> = HashMap::new();
    for failed in subsets_up_to(g.n(), k) {
        let sig = signature_with(g, &is_sensor, &failed)?;
        if let Some(prev) = seen.get(&sig) {
            return Ok(Some(Collision { first: prev.clone(), second: failed, signature: sig }));
        }
        seen.insert(sig, failed);
    }
    Ok(None)
}

pub fn is_gics(g: &Graph, sensors: &[NodeId], k: usize, limit: usize) -> Result<bool, OracleError> {
    Ok(find_collision(g, sensors, k, limit)?.is_none())
}

/// Smallest GICS by increasing-size search; the first hit in lexicographic
/// order wins. `limit` caps the number of candidate sets examined.
pub fn min_gics_exhaustive(g: &Graph, k: usize, limit: usize) -> Result<(Vec<NodeId>, usize), OracleError> {
    check_k(g, k)?;
    let needed =
        count_subsets_up_to(g.n(), k).ok_or(OracleError::LimitExceeded { needed: "overflow".into(), limit })?;
    check_limit(Some(needed), limit)?;
    // s sensors admit at most 3^s signatures (each sensor is off, red at t1
    // only, or red at t0 and t1)
    let mut lower = 0usize;
    while 3u128.checked_pow(lower as u32).is_some_and(|c| c < needed) {
        lower += 1;
    }
    let mut examined = 0usize;
    for size in lower..=g.n() {
        for cand in (0..g.n() as u32).map(NodeId).combinations(size) {
            examined += 1;
            if examined > limit {
                return Err(OracleError::LimitExceeded { needed: format!("more than {limit} candidate sets"), limit });
            }
            if is_gics(g, &cand, k, limit)? {
                return Ok((cand, size));
            }
        }
    }
    unreachable!("the full node set is always a GICS")
}

/// The projected models of `F_k` on `Z`, one row per failure set.
#[derive(Debug, Clone)]
pub struct TruthTable {
    pub support: Vec<Var>,
    pub rows: Vec<Vec<bool>>,
}

pub fn truth_table(inst: &EncodedInstance, cap: usize) -> Result<TruthTable, OracleError> {
    let support = inst.varmap.support();
    let models = enumerate_models_projected(&inst.formula, &support, cap)?;
    if models.cap_hit {
        return Err(OracleError::LimitExceeded { needed: format!("more than {cap} projected models"), limit: cap });
    }
    Ok(TruthTable { support, rows: models.models })
}

impl TruthTable {
    fn columns(&self, inst: &EncodedInstance, groups: &[NodeId]) -> Vec<usize> {
        inst.partition
            .support_of(groups)
            .into_iter()
            .map(|v| self.support.iter().position(|&z| z == v).expect("group variable in support"))
            .collect()
    }

    /// A pair of rows violating the GIS condition for `groups`: they agree
    /// on every selected column but differ somewhere on `Z`.
    pub fn gis_violation(&self, inst: &EncodedInstance, groups: &[NodeId]) -> Option<(usize, usize)> {
        let cols = self.columns(inst, groups);
        for i in 0..self.rows.len() {
            for j in i + 1..self.rows.len() {
                let (a, b) = (&self.rows[i], &self.rows[j]);
                let agree_on_groups = cols.iter().all(|&c| a[c] == b[c]);
                let agree_on_z = a == b;
                if agree_on_groups != agree_on_z {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_gis(&self, inst: &EncodedInstance, groups: &[NodeId]) -> bool {
        self.gis_violation(inst, groups).is_none()
    }
}

/// Checks the grouped-independent-support condition literally over all
/// pairs of projected models.
pub fn is_gis_bruteforce(inst: &EncodedInstance, groups: &[NodeId], cap: usize) -> Result<bool, OracleError> {
    for &v in groups {
        inst.graph.check_node(v)?;
    }
    Ok(truth_table(inst, cap)?.is_gis(inst, groups))
}
