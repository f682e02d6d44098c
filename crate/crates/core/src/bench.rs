//! Benchmark records, PAR-2 scoring and encoding-size tables.

use serde::{Deserialize, Serialize};

use crate::encoder::{expected_clause_count, EncodeError};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Solved,
    Timeout,
    Memout,
    EncodeFail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub method: String,
    pub status: RunStatus,
    pub wall_seconds: f64,
    pub sensor_count: Option<usize>,
    pub verified: Option<bool>,
    pub queries: Option<u64>,
    pub conflicts: Option<u64>,
    pub budget_exhaustions: Option<u64>,
}

/// Mean of the wall time for solved runs and twice the limit otherwise.
/// `None` for an empty record list.
pub fn par2(records: &[BenchRecord], time_limit: f64) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let total: f64 = records
        .iter()
        .map(|r| match r.status {
            RunStatus::Solved => r.wall_seconds,
            _ => 2.0 * time_limit,
        })
        .sum();
    Some(total / records.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseScalingRow {
    pub k: usize,
    pub clauses: usize,
    /// `clauses(F_k) / clauses(F_1)`
    pub ratio: f64,
}

/// Clause counts of `F_k` for each requested `k`, normalised by `F_1`.
/// Uses the closed-form sizes, so nothing is materialised.
pub fn clause_scaling(g: &Graph, ks: &[usize]) -> Result<Vec<ClauseScalingRow>, EncodeError> {
    let n = g.n();
    if n == 0 {
        return Err(EncodeError::EmptyGraph);
    }
    let base = expected_clause_count(n, g.m(), 1) as f64;
    ks.iter()
        .map(|&k| {
            if k == 0 || k > n {
                return Err(EncodeError::KOutOfRange { k, n });
            }
            let clauses = expected_clause_count(n, g.m(), k);
            Ok(ClauseScalingRow { k, clauses, ratio: clauses as f64 / base })
        })
        .collect()
}
