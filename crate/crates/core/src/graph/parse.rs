use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use super::{Graph, GraphError, MAX_NODES};

/// Input formats accepted by [`parse_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// One edge per line as two whitespace- or comma-separated tokens; any
    /// further columns (weights, timestamps) are ignored. Lines starting
    /// with `#` or `%` are comments.
    EdgeList,
    /// Matrix Market coordinate format. Nodes are the declared rows
    /// `1..=N`, labelled by their 1-based index.
    MatrixMarket,
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edgelist" | "edges" | "el" => Ok(GraphFormat::EdgeList),
            "mtx" | "matrix-market" => Ok(GraphFormat::MatrixMarket),
            other => Err(format!("unknown graph format `{other}`")),
        }
    }
}

impl GraphFormat {
    /// Guess from a file extension, defaulting to an edge list.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") => GraphFormat::MatrixMarket,
            _ => GraphFormat::EdgeList,
        }
    }
}

pub fn parse_graph<R: BufRead>(source: R, format: GraphFormat) -> Result<Graph, GraphError> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(source),
        GraphFormat::MatrixMarket => parse_matrix_market(source),
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty())
}

fn parse_edge_list<R: BufRead>(source: R) -> Result<Graph, GraphError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();

    let mut intern = |tok: &str| -> Result<usize, GraphError> {
        if let Some(&i) = index_of.get(tok) {
            return Ok(i);
        }
        if labels.len() == MAX_NODES {
            return Err(GraphError::NodeCountOverflow { max: MAX_NODES });
        }
        let i = labels.len();
        labels.push(tok.to_string());
        index_of.insert(tok.to_string(), i);
        Ok(i)
    };

    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = tokens(trimmed);
        let (Some(a), Some(b)) = (toks.next(), toks.next()) else {
            return Err(GraphError::Malformed {
                line: lineno,
                msg: format!("expected two node tokens, got `{trimmed}`"),
            });
        };
        let u = intern(a)?;
        let v = intern(b)?;
        edges.push((u, v));
    }

    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    Graph::from_edges(labels, edges)
}

fn parse_matrix_market<R: BufRead>(source: R) -> Result<Graph, GraphError> {
    let mut lines = source.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(GraphError::Empty),
    };
    let head: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if head.len() < 4 || head[0] != "%%matrixmarket" || head[1] != "matrix" || head[2] != "coordinate" {
        return Err(GraphError::Malformed {
            line: 1,
            msg: "expected `%%MatrixMarket matrix coordinate ...` header".into(),
        });
    }
    let malformed = |line: usize, msg: &str| GraphError::Malformed { line, msg: msg.to_string() };
    let parse_index = |tok: &str, line: usize| -> Result<usize, GraphError> {
        tok.parse::<usize>().map_err(|_| malformed(line, &format!("bad integer `{tok}`")))
    };

    let mut size: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 1;
    for (lineno, line) in lines {
        let line = line?;
        let lineno = lineno + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(malformed(lineno, "expected `rows cols entries` size line"));
                }
                let rows = parse_index(toks[0], lineno)?;
                let cols = parse_index(toks[1], lineno)?;
                let nnz = parse_index(toks[2], lineno)?;
                if rows != cols {
                    return Err(malformed(lineno, "adjacency matrix must be square"));
                }
                if rows > MAX_NODES {
                    return Err(GraphError::NodeCountOverflow { max: MAX_NODES });
                }
                size = Some((rows, nnz));
                edges.reserve(nnz);
            }
            Some((rows, nnz)) => {
                if toks.len() < 2 {
                    return Err(malformed(lineno, "expected `row col` entry"));
                }
                if edges.len() == nnz {
                    return Err(malformed(lineno, "more entries than declared"));
                }
                let i = parse_index(toks[0], lineno)?;
                let j = parse_index(toks[1], lineno)?;
                if i == 0 || j == 0 || i > rows || j > rows {
                    return Err(malformed(lineno, "entry index outside 1..=N"));
                }
                edges.push((i - 1, j - 1));
            }
        }
    }
    let Some((rows, nnz)) = size else {
        return Err(malformed(last_line, "missing size line"));
    };
    if edges.len() != nnz {
        return Err(malformed(last_line, &format!("declared {nnz} entries, found {}", edges.len())));
    }
    if rows == 0 {
        return Err(GraphError::Empty);
    }
    Graph::from_edges((1..=rows).map(|i| i.to_string()).collect(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> Result<Graph, GraphError> {
        parse_graph(s.as_bytes(), GraphFormat::EdgeList)
    }

    fn mtx(s: &str) -> Result<Graph, GraphError> {
        parse_graph(s.as_bytes(), GraphFormat::MatrixMarket)
    }

    #[test]
    fn house_edge_list() {
        let g = el("a b\na d\nb c\nb e\nc e\nd e").unwrap();
        assert_eq!((g.n(), g.m()), (5, 6));
        assert_eq!(g.labels(), ["a", "b", "d", "c", "e"]);
    }

    #[test]
    fn duplicates_and_reversals_collapse() {
        let g = el("u v\nu v\nv u").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn self_loops_dropped() {
        let g = el("x x\nx y").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn comments_blank_lines_and_extra_columns() {
        let g = el("# header\n% other\n\n1 2 0.5\n2,3\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.labels(), ["1", "2", "3"]);
    }

    #[test]
    fn malformed_line_reports_number() {
        match el("a b\n\nc\n") {
            Err(GraphError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(el(""), Err(GraphError::Empty)));
        assert!(matches!(el("# only comments\n"), Err(GraphError::Empty)));
        assert!(matches!(mtx("%%MatrixMarket matrix coordinate pattern symmetric\n0 0 0\n"), Err(GraphError::Empty)));
    }

    #[test]
    fn matrix_market_pattern_symmetric() {
        let src = "%%MatrixMarket matrix coordinate pattern symmetric\n% comment\n4 4 4\n2 1\n3 2\n3 3\n1 2\n";
        let g = mtx(src).unwrap();
        assert_eq!((g.n(), g.m()), (4, 2));
        assert_eq!(g.degree(g.node_by_label("4").unwrap()), 0);
        assert!(g.has_edge(g.node_by_label("1").unwrap(), g.node_by_label("2").unwrap()));
    }

    #[test]
    fn matrix_market_errors() {
        assert!(matches!(mtx("not a header\n"), Err(GraphError::Malformed { line: 1, .. })));
        let bad_index = "%%MatrixMarket matrix coordinate pattern general\n3 3 1\n4 1\n";
        assert!(matches!(mtx(bad_index), Err(GraphError::Malformed { line: 3, .. })));
        let short = "%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 2\n";
        assert!(matches!(mtx(short), Err(GraphError::Malformed { .. })));
        let rect = "%%MatrixMarket matrix coordinate real general\n3 4 0\n";
        assert!(matches!(mtx(rect), Err(GraphError::Malformed { line: 2, .. })));
    }
}
