//! Undirected, loop-free, simple graphs with closed-neighbourhood queries.

pub mod generators;
mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_graph, GraphFormat};

/// Largest node count accepted. Keeps every derived variable id (two copies
/// of the encoding plus indicators) inside the positive `i32` range used by
/// DIMACS.
pub const MAX_NODES: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("graph has no nodes")]
    Empty,
    #[error("node count exceeds {max}")]
    NodeCountOverflow { max: usize },
    #[error("node index {index} out of range (n = {n})")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("unknown node label `{0}`")]
    UnknownLabel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense node index in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An immutable simple undirected graph.
///
/// Adjacency lists are sorted ascending and symmetric. Labels are the
/// original tokens of the input file; the label to index mapping is a
/// bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index_of: HashMap<String, NodeId>,
    adjacency: Vec<Vec<NodeId>>,
    num_edges: usize,
}

impl Graph {
    /// Builds a graph from labelled nodes and index pairs. Self-loops are
    /// dropped and duplicate or reversed edges collapse into one.
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = labels.len();
        if n > MAX_NODES {
            return Err(GraphError::NodeCountOverflow { max: MAX_NODES });
        }
        let mut index_of = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index_of.insert(label.clone(), NodeId(i as u32)).is_some() {
                return Err(GraphError::Malformed { line: 0, msg: format!("duplicate node label `{label}`") });
            }
        }
        let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::NodeOutOfRange { index: w, n });
                }
            }
            if u == v {
                continue;
            }
            adjacency[u].push(NodeId(v as u32));
            adjacency[v].push(NodeId(u as u32));
        }
        let mut twice_edges = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice_edges += list.len();
        }
        Ok(Graph { labels, index_of, adjacency, num_edges: twice_edges / 2 })
    }

    /// Graph on `n` nodes labelled `"0"`, `"1"`, ... .
    pub fn with_numeric_labels<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.num_edges
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n() as u32).map(NodeId)
    }

    /// Each edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = NodeId(u as u32);
            list.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Result<NodeId, GraphError> {
        self.index_of.get(label).copied().ok_or_else(|| GraphError::UnknownLabel(label.to_string()))
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if v.index() < self.n() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange { index: v.index(), n: self.n() })
        }
    }

    /// Sorted open neighbourhood. Panics on an out-of-range node.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency.get(u.index()).is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// `N⁺(v)`: `v` together with its direct neighbours, sorted.
    pub fn closed_neighborhood(&self, v: NodeId) -> Result<Vec<NodeId>, GraphError> {
        self.check_node(v)?;
        let list = &self.adjacency[v.index()];
        let mut out = Vec::with_capacity(list.len() + 1);
        let pos = list.partition_point(|&u| u < v);
        out.extend_from_slice(&list[..pos]);
        out.push(v);
        out.extend_from_slice(&list[pos..]);
        Ok(out)
    }

    /// `N⁺(U)`: union of the closed neighbourhoods of the members of `U`.
    pub fn closed_neighborhood_set<'a, I>(&self, nodes: I) -> Result<BTreeSet<NodeId>, GraphError>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let mut out = BTreeSet::new();
        for &v in nodes {
            self.check_node(v)?;
            out.insert(v);
            out.extend(self.adjacency[v.index()].iter().copied());
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in self.neighbors(u) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n()
    }
}
