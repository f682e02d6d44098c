//! DIMACS CNF reading and writing.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{CnfFormula, Lit, SatError};

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Clause { line: usize, source: SatError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A parsed DIMACS file: the formula plus the text of its comment lines
/// (without the leading `c `).
#[derive(Debug, Clone)]
pub struct DimacsFile {
    pub formula: CnfFormula,
    pub comments: Vec<String>,
}

/// Writes `c <comment>` lines, the `p cnf` header and one clause per line.
pub fn write_dimacs<W: Write>(mut out: W, f: &CnfFormula, comments: &[String]) -> io::Result<()> {
    for c in comments {
        if c.is_empty() {
            writeln!(out, "c")?;
        } else {
            writeln!(out, "c {c}")?;
        }
    }
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses())?;
    for clause in f.clauses() {
        for l in clause {
            write!(out, "{} ", l.to_dimacs())?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

pub fn to_dimacs_string(f: &CnfFormula, comments: &[String]) -> String {
    let mut buf = Vec::new();
    write_dimacs(&mut buf, f, comments).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn parse_dimacs<R: BufRead>(source: R) -> Result<DimacsFile, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut formula = CnfFormula::new();
    let mut comments = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut raw_clauses = 0usize;
    let mut last_line = 0;

    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                comments.push(rest.trim_start().to_string());
                continue;
            }
        }
        let syntax = |msg: String| DimacsError::Syntax { line: lineno, msg };
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(syntax("duplicate header".into()));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(syntax("expected `p cnf <vars> <clauses>`".into()));
            }
            let vars = parts[2].parse::<u32>().map_err(|_| syntax(format!("bad variable count `{}`", parts[2])))?;
            let clauses = parts[3].parse::<usize>().map_err(|_| syntax(format!("bad clause count `{}`", parts[3])))?;
            header = Some((vars, clauses));
            formula = CnfFormula::with_vars(vars);
            continue;
        }
        if header.is_none() {
            return Err(syntax("clause before header".into()));
        }
        for tok in trimmed.split_whitespace() {
            let x: i32 = tok.parse().map_err(|_| syntax(format!("bad literal `{tok}`")))?;
            if x == 0 {
                raw_clauses += 1;
                formula.add_clause(&current).map_err(|source| DimacsError::Clause { line: lineno, source })?;
                current.clear();
            } else {
                if x == i32::MIN {
                    return Err(syntax(format!("bad literal `{tok}`")));
                }
                current.push(Lit::from_dimacs(x));
            }
        }
    }

    let Some((_, declared)) = header else {
        return Err(DimacsError::Syntax { line: last_line, msg: "missing `p cnf` header".into() });
    };
    if !current.is_empty() {
        return Err(DimacsError::Syntax { line: last_line, msg: "last clause not terminated by 0".into() });
    }
    if raw_clauses != declared {
        return Err(DimacsError::Syntax {
            line: last_line,
            msg: format!("header declares {declared} clauses, found {raw_clauses}"),
        });
    }
    Ok(DimacsFile { formula, comments })
}
