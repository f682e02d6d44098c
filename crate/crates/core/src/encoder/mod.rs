//! CNF encoding of the sensor placement problem.
//!
//! For every node `v` the failure variable `x_v` is true when `v` fails and
//! the detection variable `y_v` is true when a sensor at `v` would be red
//! one step later, i.e. when some node of `N⁺(v)` failed. The formula is
//! the detection constraint `y_v ↔ ⋁_{u ∈ N⁺(v)} x_u` for all `v`, plus
//! `Σ x_v ≤ k`. Each node contributes one group `{x_v, y_v}`.

mod cardinality;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::satcore::{CnfFormula, Lit, Var};

pub use cardinality::{encode_cardinality, sequential_counter_aux, sequential_counter_clauses, CardinalityEncoding};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("k = {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("cannot encode an empty graph")]
    EmptyGraph,
}

/// Variable layout: `x` occupies `1..=n`, `y` occupies `n+1..=2n`, the
/// cardinality auxiliaries follow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarMap {
    pub x: Vec<Var>,
    pub y: Vec<Var>,
    pub aux: Vec<Var>,
    pub total_vars: u32,
}

impl VarMap {
    pub fn for_graph(g: &Graph) -> Self {
        let n = g.n() as u32;
        VarMap {
            x: (1..=n).map(Var::new).collect(),
            y: (n + 1..=2 * n).map(Var::new).collect(),
            aux: Vec::new(),
            total_vars: 2 * n,
        }
    }

    pub fn x(&self, v: NodeId) -> Var {
        self.x[v.index()]
    }

    pub fn y(&self, v: NodeId) -> Var {
        self.y[v.index()]
    }

    /// `Z = X ∪ Y` in variable order.
    pub fn support(&self) -> Vec<Var> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn is_aux(&self, v: Var) -> bool {
        v.index() >= self.x.len() + self.y.len()
    }
}

/// One group `{x_v, y_v}` per node, indexed by node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPartition {
    pub groups: Vec<(Var, Var)>,
}

impl GroupPartition {
    pub fn group(&self, v: NodeId) -> (Var, Var) {
        self.groups[v.index()]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Union of the given groups, in variable order.
    pub fn support_of<'a, I>(&self, nodes: I) -> Vec<Var>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let mut out: Vec<Var> = nodes
            .into_iter()
            .flat_map(|&v| {
                let (x, y) = self.group(v);
                [x, y]
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// `F_k` together with its variable map and group partition.
#[derive(Debug, Clone)]
pub struct EncodedInstance {
    pub graph: Graph,
    pub k: usize,
    pub formula: CnfFormula,
    pub varmap: VarMap,
    pub partition: GroupPartition,
    pub detection_clauses: usize,
    pub cardinality_clauses: usize,
}

impl EncodedInstance {
    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

/// The detection clauses for every node, in node order: the long clause
/// `¬y_v ∨ ⋁ x_u` followed by one `¬x_u ∨ y_v` per `u ∈ N⁺(v)`.
pub fn encode_detection(g: &Graph, vm: &VarMap) -> Vec<Vec<Lit>> {
    let mut clauses = Vec::with_capacity(2 * g.n() + 2 * g.m());
    for v in g.nodes() {
        let closed = g.closed_neighborhood(v).expect("node from graph");
        let yv = vm.y(v);
        let mut long = Vec::with_capacity(closed.len() + 1);
        long.push(yv.neg());
        long.extend(closed.iter().map(|&u| vm.x(u).pos()));
        clauses.push(long);
        for &u in &closed {
            clauses.push(vec![vm.x(u).neg(), yv.pos()]);
        }
    }
    clauses
}

/// Builds `F_k = F_detection ∧ F_card,k`.
pub fn encode_instance(g: &Graph, k: usize) -> Result<EncodedInstance, EncodeError> {
    let n = g.n();
    if n == 0 {
        return Err(EncodeError::EmptyGraph);
    }
    if k == 0 || k > n {
        return Err(EncodeError::KOutOfRange { k, n });
    }
    let mut varmap = VarMap::for_graph(g);
    let mut formula = CnfFormula::with_vars(varmap.total_vars);

    let detection = encode_detection(g, &varmap);
    let card = encode_cardinality(&varmap.x, k, &mut formula)?;
    varmap.aux = card.aux;
    varmap.total_vars = formula.num_vars();

    let detection_clauses = detection.len();
    let cardinality_clauses = card.clauses.len();
    for c in detection.iter().chain(&card.clauses) {
        formula.add_clause(c).expect("encoder emits clauses over allocated variables");
    }
    debug_assert_eq!(formula.num_clauses(), detection_clauses + cardinality_clauses);

    let partition = GroupPartition { groups: varmap.x.iter().copied().zip(varmap.y.iter().copied()).collect() };
    Ok(EncodedInstance { graph: g.clone(), k, formula, varmap, partition, detection_clauses, cardinality_clauses })
}

/// Closed-form clause count of [`encode_instance`].
pub fn expected_clause_count(n: usize, m: usize, k: usize) -> usize {
    2 * n + 2 * m + sequential_counter_clauses(n, k)
}

/// "c group <label> <x> <y>" lines for every node.
pub fn group_comments(inst: &EncodedInstance) -> Vec<String> {
    inst.graph
        .nodes()
        .map(|v| {
            let (x, y) = inst.partition.group(v);
            format!("group {} {} {}", inst.graph.label(v), x, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generators, parse_graph, GraphFormat};
    use crate::satcore::enumerate_models_projected;

    fn house() -> Graph {
        parse_graph("a b\na d\nb c\nb e\nc e\nd e".as_bytes(), GraphFormat::EdgeList).unwrap()
    }

    fn binom(n: usize, r: usize) -> usize {
        (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn detection_clause_counts() {
        let g = house();
        let cls = encode_detection(&g, &VarMap::for_graph(&g));
        assert_eq!(cls.len(), 22);
        assert_eq!(cls.iter().filter(|c| c.len() == 2).count(), 17);
        assert_eq!(cls.iter().filter(|c| c.len() > 2).count(), 5);

        let single = Graph::with_numeric_labels(1, []).unwrap();
        let vm = VarMap::for_graph(&single);
        let cls = encode_detection(&single, &vm);
        let (x, y) = (vm.x[0], vm.y[0]);
        assert_eq!(cls, vec![vec![y.neg(), x.pos()], vec![x.neg(), y.pos()]]);

        let ab = generators::path(2);
        assert_eq!(encode_detection(&ab, &VarMap::for_graph(&ab)).len(), 6);
    }

    #[test]
    fn variable_layout_is_deterministic() {
        let inst = encode_instance(&house(), 1).unwrap();
        let vm = &inst.varmap;
        assert_eq!(vm.x.iter().map(|v| v.id()).collect::<Vec<_>>(), [1, 2, 3, 4, 5]);
        assert_eq!(vm.y.iter().map(|v| v.id()).collect::<Vec<_>>(), [6, 7, 8, 9, 10]);
        assert_eq!(vm.aux.first().map(|v| v.id()), Some(11));
        assert_eq!(vm.aux.len(), 4);
        assert_eq!(vm.total_vars, 14);
        assert_eq!(inst.partition.len(), 5);
        assert!(inst.partition.groups.iter().all(|&(x, y)| x != y));
        assert_eq!(inst.formula.num_clauses(), expected_clause_count(5, 6, 1));
    }

    #[test]
    fn k_range_and_empty_graph() {
        let g = house();
        assert!(matches!(encode_instance(&g, 0), Err(EncodeError::KOutOfRange { .. })));
        assert!(matches!(encode_instance(&g, 6), Err(EncodeError::KOutOfRange { .. })));
        let empty = Graph::with_numeric_labels(0, []).unwrap();
        assert!(matches!(encode_instance(&empty, 1), Err(EncodeError::EmptyGraph)));
        assert_eq!(encode_instance(&g, 5).unwrap().cardinality_clauses, 0);
    }

    /// Truth-table rows of F_1 on the house graph, X then Y in order a..e.
    #[test]
    fn house_k1_models_are_the_truth_table() {
        let g = house();
        let inst = encode_instance(&g, 1).unwrap();
        let names = ["a", "b", "c", "d", "e"];
        let z: Vec<Var> = names
            .iter()
            .map(|s| inst.varmap.x(g.node_by_label(s).unwrap()))
            .chain(names.iter().map(|s| inst.varmap.y(g.node_by_label(s).unwrap())))
            .collect();
        let got = enumerate_models_projected(&inst.formula, &z, 100).unwrap();
        let rows = ["1000011010", "0100011101", "0010001101", "0001010011", "0000101111", "0000000000"];
        let mut expected: Vec<Vec<bool>> = rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect();
        expected.sort();
        assert_eq!(got.models, expected);
    }

    #[test]
    fn projected_counts_match_binomial_sums() {
        let g = house();
        for (k, expected) in [(1, 6), (2, 16), (5, 32)] {
            let inst = encode_instance(&g, k).unwrap();
            let got = enumerate_models_projected(&inst.formula, &inst.varmap.support(), 100).unwrap();
            assert_eq!(got.len(), expected, "k = {k}");
        }
        for seed in 0..10 {
            let g = generators::random_connected(6, seed as usize % 5, seed);
            for k in 1..=3 {
                let inst = encode_instance(&g, k).unwrap();
                let got = enumerate_models_projected(&inst.formula, &inst.varmap.support(), 1000).unwrap();
                let expected: usize = (0..=k).map(|i| binom(6, i)).sum();
                assert_eq!(got.len(), expected);
            }
        }
    }

    /// y is a function of x: y_v = 1 iff U ∩ N⁺(v) ≠ ∅.
    #[test]
    fn y_is_determined_by_x() {
        for seed in 0..8 {
            let g = generators::gnm(6, 7, seed);
            let inst = encode_instance(&g, 2).unwrap();
            let vm = &inst.varmap;
            let models = enumerate_models_projected(&inst.formula, &vm.support(), 1000).unwrap();
            for row in &models.models {
                let failed: Vec<NodeId> = g.nodes().filter(|v| row[v.index()]).collect();
                let red = g.closed_neighborhood_set(&failed).unwrap();
                for v in g.nodes() {
                    assert_eq!(row[g.n() + v.index()], red.contains(&v));
                }
            }
        }
    }

    #[test]
    fn monotone_in_k() {
        let g = generators::cycle(6);
        for k in 1..6 {
            let small = encode_instance(&g, k).unwrap();
            let large = encode_instance(&g, k + 1).unwrap();
            let z = small.varmap.support();
            let rows = enumerate_models_projected(&small.formula, &z, 1000).unwrap();
            for row in rows.models {
                let assumptions: Vec<Lit> = z.iter().zip(&row).map(|(v, &b)| Lit::new(*v, !b)).collect();
                let out =
                    crate::satcore::solve(&large.formula, &assumptions, crate::satcore::ConflictBudget::unlimited())
                        .unwrap();
                assert!(out.is_sat());
            }
        }
    }

    #[test]
    fn group_comment_format() {
        let inst = encode_instance(&house(), 1).unwrap();
        let lines = group_comments(&inst);
        assert_eq!(lines[0], "group a 1 6");
        assert_eq!(lines.len(), 5);
    }
}
