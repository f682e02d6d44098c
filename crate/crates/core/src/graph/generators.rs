//! Synthetic graph families used by tests and the benchmark harness.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;

pub fn path(n: usize) -> Graph {
    Graph::with_numeric_labels(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
}

pub fn cycle(n: usize) -> Graph {
    let closing = (n > 2).then(|| (n - 1, 0));
    Graph::with_numeric_labels(n, (1..n).map(|i| (i - 1, i)).chain(closing)).expect("valid cycle")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Graph::with_numeric_labels(n, edges).expect("valid complete graph")
}

pub fn star(n: usize) -> Graph {
    Graph::with_numeric_labels(n, (1..n).map(|i| (0, i))).expect("valid star")
}

pub fn grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::with_numeric_labels(rows * cols, edges).expect("valid grid")
}

/// Uniform random graph with exactly `m` distinct edges (capped at the
/// complete graph).
pub fn gnm(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = n * n.saturating_sub(1) / 2;
    let target = m.min(max);
    let mut edges = std::collections::BTreeSet::new();
    while edges.len() < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    Graph::with_numeric_labels(n, edges).expect("valid random graph")
}

/// Connected random graph: a random spanning tree plus `extra` further
/// distinct edges where room allows.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let child = order[i];
        edges.insert((parent.min(child), parent.max(child)));
    }
    let max = n * n.saturating_sub(1) / 2;
    let target = (edges.len() + extra).min(max);
    while edges.len() < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    Graph::with_numeric_labels(n, edges).expect("valid random graph")
}
