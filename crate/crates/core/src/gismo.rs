//! Group-wise elimination towards a set-minimal grouped independent support.
//!
//! Groups are visited one at a time. A group is dropped when each of its
//! variables is defined by the remaining candidates plus the groups kept so
//! far, and kept as soon as one of its variables is not (or the engine runs
//! out of budget before deciding). The kept groups are the sensor set.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::definability::{DefinabilityContext, QueryMode};
use crate::encoder::EncodedInstance;
use crate::graph::{GraphError, NodeId};
use crate::oracle::{self, OracleError};
use crate::satcore::{ConflictBudget, SolveStatus, Var};

#[derive(Debug, Error)]
pub enum GismoError {
    #[error("explicit order must list every node exactly once ({0})")]
    InvalidOrder(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("deadline reached after {processed} of {total} groups")]
    Deadline { processed: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum GroupOrder {
    #[default]
    Input,
    DegreeDescending,
    DegreeAscending,
    Random(u64),
    Explicit(Vec<NodeId>),
}

impl GroupOrder {
    /// The processing sequence for `inst`. Degree sorts are stable, so
    /// ties keep input order.
    pub fn resolve(&self, inst: &EncodedInstance) -> Result<Vec<NodeId>, GismoError> {
        let g = &inst.graph;
        let mut order: Vec<NodeId> = g.nodes().collect();
        match self {
            GroupOrder::Input => {}
            GroupOrder::DegreeDescending => order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v))),
            GroupOrder::DegreeAscending => order.sort_by_key(|&v| g.degree(v)),
            GroupOrder::Random(seed) => order.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed)),
            GroupOrder::Explicit(list) => {
                let mut seen = vec![false; g.n()];
                for &v in list {
                    g.check_node(v)?;
                    if std::mem::replace(&mut seen[v.index()], true) {
                        return Err(GismoError::InvalidOrder(format!("`{}` repeated", g.label(v))));
                    }
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(GismoError::InvalidOrder(format!("`{}` missing", g.label(NodeId(missing as u32)))));
                }
                order = list.clone();
            }
        }
        Ok(order)
    }

    pub fn name(&self) -> String {
        match self {
            GroupOrder::Input => "input".into(),
            GroupOrder::DegreeDescending => "deg-desc".into(),
            GroupOrder::DegreeAscending => "deg-asc".into(),
            GroupOrder::Random(seed) => format!("random({seed})"),
            GroupOrder::Explicit(_) => "explicit".into(),
        }
    }
}

/// Which variable of a group is tested first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerOrder {
    #[default]
    YFirst,
    XFirst,
}

#[derive(Debug, Clone)]
pub struct GismoConfig {
    pub budget: ConflictBudget,
    pub order: GroupOrder,
    pub inner_order: InnerOrder,
    pub query_mode: QueryMode,
}

pub const DEFAULT_BUDGET: u64 = 5000;

impl Default for GismoConfig {
    fn default() -> Self {
        GismoConfig {
            budget: ConflictBudget::new(DEFAULT_BUDGET).expect("positive"),
            order: GroupOrder::Input,
            inner_order: InnerOrder::YFirst,
            query_mode: QueryMode::Incremental,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryRecord {
    pub variable: u32,
    pub kind: VarKind,
    pub outcome: SolveStatus,
    pub conflicts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupLog {
    pub group: NodeId,
    pub label: String,
    pub tests: Vec<QueryRecord>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GisResult {
    /// Kept groups, named by their node, ascending.
    pub selected_groups: Vec<NodeId>,
    /// Sensor nodes, ascending. Equal to the kept groups' nodes.
    pub sensor_set: Vec<NodeId>,
    pub sensor_labels: Vec<String>,
    /// One entry per group in processing order.
    pub per_group_log: Vec<GroupLog>,
    pub budget_exhaustions: u64,
    pub total_queries: u64,
    pub total_conflicts: u64,
}

pub fn run_gismo(inst: &EncodedInstance, cfg: &GismoConfig) -> Result<GisResult, GismoError> {
    run_gismo_until(inst, cfg, None)
}

/// Like [`run_gismo`], but gives up between queries once `deadline` passes.
pub fn run_gismo_until(
    inst: &EncodedInstance,
    cfg: &GismoConfig,
    deadline: Option<Instant>,
) -> Result<GisResult, GismoError> {
    let ctx = DefinabilityContext::new(inst, cfg.query_mode);
    run_with_context(inst, cfg, ctx, deadline)
}

/// Runs the elimination loop against a prepared definability context, for
/// callers supplying their own engine.
pub fn run_with_context(
    inst: &EncodedInstance,
    cfg: &GismoConfig,
    mut ctx: DefinabilityContext,
    deadline: Option<Instant>,
) -> Result<GisResult, GismoError> {
    let order = cfg.order.resolve(inst)?;
    let n = inst.n();
    let mut candidate = vec![true; n];
    let mut selected = vec![false; n];
    let mut logs = Vec::with_capacity(n);
    let mut exhaustions = 0u64;

    for (processed, &g) in order.iter().enumerate() {
        candidate[g.index()] = false;
        let defining_groups: Vec<NodeId> =
            (0..n).filter(|&v| candidate[v] || selected[v]).map(|v| NodeId(v as u32)).collect();
        let defining: Vec<Var> = inst.partition.support_of(&defining_groups);
        let (x, y) = inst.partition.group(g);
        let inner = match cfg.inner_order {
            InnerOrder::YFirst => [(y, VarKind::Y), (x, VarKind::X)],
            InnerOrder::XFirst => [(x, VarKind::X), (y, VarKind::Y)],
        };

        let mut tests = Vec::with_capacity(2);
        let mut keep = false;
        for (z, kind) in inner {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(GismoError::Deadline { processed, total: n });
            }
            let out = ctx
                .padoa_query(&defining, z, cfg.budget)
                .expect("group variables are support variables outside the defining set");
            tests.push(QueryRecord { variable: z.id(), kind, outcome: out.status, conflicts: out.conflicts });
            if out.status == SolveStatus::BudgetExhausted {
                exhaustions += 1;
            }
            if out.status != SolveStatus::Unsat {
                keep = true;
                break;
            }
        }
        selected[g.index()] = keep;
        logs.push(GroupLog { group: g, label: inst.graph.label(g).to_string(), tests, selected: keep });
    }

    let selected_groups: Vec<NodeId> = (0..n).filter(|&v| selected[v]).map(|v| NodeId(v as u32)).collect();
    let sensor_set = extract_sensor_set(&selected_groups);
    let sensor_labels = sensor_set.iter().map(|&v| inst.graph.label(v).to_string()).collect();
    Ok(GisResult {
        selected_groups,
        sensor_set,
        sensor_labels,
        per_group_log: logs,
        budget_exhaustions: exhaustions,
        total_queries: ctx.queries(),
        total_conflicts: ctx.total_conflicts(),
    })
}

/// Each group belongs to exactly one node, so the sensors are the nodes of
/// the kept groups.
pub fn extract_sensor_set(groups: &[NodeId]) -> Vec<NodeId> {
    let mut out = groups.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub is_gis: bool,
    pub projected_models: usize,
    /// Groups whose removal leaves a GIS. Empty for a set-minimal result.
    pub redundant_groups: Vec<NodeId>,
}

impl VerifyReport {
    pub fn set_minimal(&self) -> bool {
        self.redundant_groups.is_empty()
    }
}

/// Checks a result against the enumerated truth table: GIS-ness, then
/// every single-group removal.
pub fn verify_result(inst: &EncodedInstance, res: &GisResult, cap: usize) -> Result<VerifyReport, OracleError> {
    let table = oracle::truth_table(inst, cap)?;
    let is_gis = table.is_gis(inst, &res.selected_groups);
    let redundant_groups = res
        .selected_groups
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let mut rest = res.selected_groups.clone();
            rest.remove(i);
            table.is_gis(inst, &rest)
        })
        .map(|(_, &g)| g)
        .collect();
    Ok(VerifyReport { is_gis, projected_models: table.rows.len(), redundant_groups })
}
