//! CNF formulas, the incremental solving contract, and the bundled engine.
//!
//! Every engine implements [`SatEngine`]: clauses are added once, then
//! [`SatEngine::solve_limited`] may be called any number of times with
//! different assumption sets. Learned state persists across calls. Effort
//! is bounded by a conflict count rather than wall-clock time so that runs
//! are reproducible.

mod cdcl;
pub mod dimacs;
mod enumerate;

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cdcl::CdclSolver;
pub use enumerate::{enumerate_models_projected, ProjectedModels};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("variable {var} is not allocated (formula has {num_vars} variables)")]
    UnallocatedVar { var: u32, num_vars: u32 },
    #[error("empty clause")]
    EmptyClause,
    #[error("conflict budget must be at least 1")]
    ZeroBudget,
    #[error("variable {0} appears twice in the projection set")]
    DuplicateProjectionVar(u32),
}

/// A Boolean variable. Ids start at 1, as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(u32);

impl Var {
    /// Panics on 0.
    pub fn new(id: u32) -> Self {
        assert!(id > 0, "variable ids start at 1");
        Var(id)
    }

    #[inline]
    pub fn id(self) -> u32 {
        self.0
    }

    /// 0-based position, for indexing assignment vectors.
    #[inline]
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        Var(index as u32 + 1)
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit::new(self, false)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, true)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal, packed as `2 * index + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, negated: bool) -> Self {
        Lit(((var.0 - 1) << 1) | negated as u32)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    /// Signed DIMACS form. Panics on 0.
    pub fn from_dimacs(x: i32) -> Self {
        assert!(x != 0, "0 is not a literal");
        Lit::new(Var(x.unsigned_abs()), x < 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().0 as i32;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Truth value of this literal under a full assignment indexed by
    /// [`Var::index`].
    #[inline]
    pub fn eval(self, model: &[bool]) -> bool {
        model[self.var().index()] != self.is_negated()
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A CNF formula over variables `1..=num_vars`.
///
/// Clauses are normalised on insertion: duplicate literals are removed and
/// tautologies are dropped. Empty clauses are rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vars(num_vars: u32) -> Self {
        CnfFormula { num_vars, clauses: Vec::new() }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars = self.num_vars.checked_add(1).expect("variable count overflow");
        Var(self.num_vars)
    }

    pub fn new_vars(&mut self, count: u32) -> Vec<Var> {
        (0..count).map(|_| self.new_var()).collect()
    }

    /// Grow the variable range to at least `num_vars`.
    pub fn reserve_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    pub fn check_lit(&self, lit: Lit) -> Result<(), SatError> {
        if lit.var().0 <= self.num_vars {
            Ok(())
        } else {
            Err(SatError::UnallocatedVar { var: lit.var().0, num_vars: self.num_vars })
        }
    }

    /// Appends a clause. Returns `Ok(false)` when the clause was a
    /// tautology and therefore not stored.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<bool, SatError> {
        for &l in lits {
            self.check_lit(l)?;
        }
        match normalize_clause(lits) {
            Normalized::Tautology => Ok(false),
            Normalized::Clause(c) if c.is_empty() => Err(SatError::EmptyClause),
            Normalized::Clause(c) => {
                self.clauses.push(c);
                Ok(true)
            }
        }
    }

    /// Appends every clause of `other`, growing the variable range if needed.
    pub fn extend_from(&mut self, other: &CnfFormula) {
        self.reserve_vars(other.num_vars);
        self.clauses.extend(other.clauses.iter().cloned());
    }

    /// Whether `model` (indexed by [`Var::index`]) satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        model.len() >= self.num_vars as usize && self.clauses.iter().all(|c| c.iter().any(|l| l.eval(model)))
    }
}

pub(crate) enum Normalized {
    Tautology,
    Clause(Vec<Lit>),
}

pub(crate) fn normalize_clause(lits: &[Lit]) -> Normalized {
    let mut c = lits.to_vec();
    c.sort_unstable();
    c.dedup();
    // complementary literals are adjacent after sorting by code
    if c.windows(2).any(|w| w[0].var() == w[1].var()) {
        return Normalized::Tautology;
    }
    Normalized::Clause(c)
}

/// Maximum number of conflicts one query may spend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConflictBudget(u64);

impl ConflictBudget {
    pub fn new(conflicts: u64) -> Result<Self, SatError> {
        if conflicts == 0 {
            Err(SatError::ZeroBudget)
        } else {
            Ok(ConflictBudget(conflicts))
        }
    }

    pub const fn unlimited() -> Self {
        ConflictBudget(u64::MAX)
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Sat,
    Unsat,
    BudgetExhausted,
}

/// Result of one bounded query. `model` is present iff `status` is `Sat`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub model: Option<Vec<bool>>,
    pub conflicts: u64,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        self.status == SolveStatus::Sat
    }

    pub fn is_unsat(&self) -> bool {
        self.status == SolveStatus::Unsat
    }
}

/// The incremental solving contract.
///
/// Implementations must keep every clause ever added and may keep any
/// learned information implied by them. Assumptions only hold for the call
/// they are passed to.
pub trait SatEngine {
    /// Make variables `1..=num_vars` available.
    fn reserve_vars(&mut self, num_vars: u32);

    /// Add a permanent clause. Literals must be reserved beforehand.
    fn add_clause(&mut self, lits: &[Lit]);

    fn solve_limited(&mut self, assumptions: &[Lit], budget: ConflictBudget) -> SolveOutcome;

    fn add_formula(&mut self, f: &CnfFormula) {
        self.reserve_vars(f.num_vars());
        for c in f.clauses() {
            self.add_clause(c);
        }
    }
}

/// Decide `f` under `assumptions` with a fresh bundled engine.
pub fn solve(f: &CnfFormula, assumptions: &[Lit], budget: ConflictBudget) -> Result<SolveOutcome, SatError> {
    if budget.get() == 0 {
        return Err(SatError::ZeroBudget);
    }
    for &a in assumptions {
        f.check_lit(a)?;
    }
    let mut engine = CdclSolver::new();
    engine.add_formula(f);
    Ok(engine.solve_limited(assumptions, budget))
}
