//! Padoa-style definability queries over a doubled formula.
//!
//! The base formula is
//!
//! ```text
//! φ = F(Z, B) ∧ F(Ẑ, B̂) ∧ ⋀ᵢ eᵢ → (zᵢ ↔ ẑᵢ)
//! ```
//!
//! where `Ẑ` and `B̂` are fresh copies of the support and auxiliary
//! variables and each indicator `eᵢ` ties `zᵢ` to its copy when assumed.
//! A variable `z` is defined by a set `C ⊆ Z` iff
//! `φ ∧ ⋀_{zᵢ ∈ C} eᵢ ∧ z ∧ ¬ẑ` is unsatisfiable.
//!
//! The auxiliaries are renamed in the second copy as well. The counter
//! auxiliaries are not functionally determined by `Z`, and sharing them
//! between the copies lets counter state from one copy forbid models of the
//! other, which can turn a satisfiable query into a spurious UNSAT.
//!
//! Layout for an instance with `T` variables: originals `1..=T`, copies
//! `T+1..=2T` (`ẑ = z + T`), then one indicator per support variable in
//! support order.

use thiserror::Error;

use crate::encoder::EncodedInstance;
use crate::satcore::{dimacs, CdclSolver, CnfFormula, ConflictBudget, Lit, SatEngine, SolveOutcome, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DefinabilityError {
    #[error("target variable {0} is part of the defining set")]
    TargetInDefiningSet(u32),
    #[error("variable {0} is not a support variable")]
    NotInSupport(u32),
}

/// How queries reach the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueryMode {
    /// One engine loaded once; learned clauses carry over between queries.
    #[default]
    Incremental,
    /// A new engine per query.
    FreshPerQuery,
}

type EngineFactory = Box<dyn Fn() -> Box<dyn SatEngine>>;

pub struct DefinabilityContext {
    base: CnfFormula,
    original_vars: u32,
    support: Vec<Var>,
    /// indicator of support variable `v`, indexed by `v.index()`
    indicator: Vec<Option<Var>>,
    mode: QueryMode,
    factory: EngineFactory,
    engine: Option<Box<dyn SatEngine>>,
    queries: u64,
    conflicts: u64,
}

impl std::fmt::Debug for DefinabilityContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DefinabilityContext")
            .field("base_vars", &self.base.num_vars())
            .field("base_clauses", &self.base.num_clauses())
            .field("mode", &self.mode)
            .field("queries", &self.queries)
            .finish()
    }
}

impl DefinabilityContext {
    /// Builds `φ` for an encoded instance, backed by the bundled engine.
    pub fn new(inst: &EncodedInstance, mode: QueryMode) -> Self {
        Self::with_engine(inst, mode, Box::new(|| Box::new(CdclSolver::new())))
    }

    /// Builds `φ` with a caller-supplied engine constructor.
    pub fn with_engine(inst: &EncodedInstance, mode: QueryMode, factory: EngineFactory) -> Self {
        let f = &inst.formula;
        let t = f.num_vars();
        let support = inst.varmap.support();
        let num_vars = 2 * t + support.len() as u32;
        let mut base = CnfFormula::with_vars(num_vars);

        for c in f.clauses() {
            base.add_clause(c).expect("original clause");
        }
        for c in f.clauses() {
            let renamed: Vec<Lit> = c.iter().map(|&l| shift(l, t)).collect();
            base.add_clause(&renamed).expect("renamed clause");
        }
        let mut indicator = vec![None; t as usize];
        for (i, &z) in support.iter().enumerate() {
            let e = Var::new(2 * t + 1 + i as u32);
            let zh = Var::new(z.id() + t);
            base.add_clause(&[e.neg(), z.neg(), zh.pos()]).expect("indicator clause");
            base.add_clause(&[e.neg(), z.pos(), zh.neg()]).expect("indicator clause");
            indicator[z.index()] = Some(e);
        }

        DefinabilityContext {
            base,
            original_vars: t,
            support,
            indicator,
            mode,
            factory,
            engine: None,
            queries: 0,
            conflicts: 0,
        }
    }

    pub fn base(&self) -> &CnfFormula {
        &self.base
    }

    pub fn support(&self) -> &[Var] {
        &self.support
    }

    pub fn mode(&self) -> QueryMode {
        self.mode
    }

    /// The copy `ẑ` of an original variable (support or auxiliary).
    pub fn hat(&self, v: Var) -> Var {
        assert!(v.id() <= self.original_vars);
        Var::new(v.id() + self.original_vars)
    }

    pub fn indicator(&self, z: Var) -> Result<Var, DefinabilityError> {
        self.indicator.get(z.index()).copied().flatten().ok_or(DefinabilityError::NotInSupport(z.id()))
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn total_conflicts(&self) -> u64 {
        self.conflicts
    }

    /// Assumptions for "is `target` defined by `defining`".
    pub fn query_assumptions(&self, defining: &[Var], target: Var) -> Result<Vec<Lit>, DefinabilityError> {
        self.indicator(target)?;
        let mut assumptions = Vec::with_capacity(defining.len() + 2);
        for &c in defining {
            if c == target {
                return Err(DefinabilityError::TargetInDefiningSet(c.id()));
            }
            assumptions.push(self.indicator(c)?.pos());
        }
        assumptions.push(target.pos());
        assumptions.push(self.hat(target).neg());
        Ok(assumptions)
    }

    /// UNSAT means `target` takes the same value in every pair of models
    /// that agree on `defining`. SAT yields two such models that differ on
    /// `target`. Budget exhaustion leaves the question open.
    pub fn padoa_query(
        &mut self,
        defining: &[Var],
        target: Var,
        budget: ConflictBudget,
    ) -> Result<SolveOutcome, DefinabilityError> {
        let assumptions = self.query_assumptions(defining, target)?;
        let outcome = match self.mode {
            QueryMode::Incremental => {
                if self.engine.is_none() {
                    let mut engine = (self.factory)();
                    engine.add_formula(&self.base);
                    self.engine = Some(engine);
                }
                self.engine.as_mut().expect("engine initialised").solve_limited(&assumptions, budget)
            }
            QueryMode::FreshPerQuery => {
                let mut engine = (self.factory)();
                engine.add_formula(&self.base);
                engine.solve_limited(&assumptions, budget)
            }
        };
        self.queries += 1;
        self.conflicts += outcome.conflicts;
        Ok(outcome)
    }

    /// `φ` in DIMACS, preceded by one `c z <z> <ẑ> <e>` line per support
    /// variable.
    pub fn debug_dimacs(&self) -> String {
        let mut comments = vec![format!(
            "definability base: {} original variables, {} support variables",
            self.original_vars,
            self.support.len()
        )];
        for &z in &self.support {
            let e = self.indicator(z).expect("support variable");
            comments.push(format!("z {} {} {}", z, self.hat(z), e));
        }
        dimacs::to_dimacs_string(&self.base, &comments)
    }
}

#[inline]
fn shift(l: Lit, offset: u32) -> Lit {
    Lit::new(Var::new(l.var().id() + offset), l.is_negated())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode_instance;
    use crate::graph::{generators, parse_graph, Graph, GraphFormat};
    use crate::satcore::{enumerate_models_projected, solve, SolveStatus};
    use proptest::prelude::*;

    fn house() -> Graph {
        parse_graph("a b\na d\nb c\nb e\nc e\nd e".as_bytes(), GraphFormat::EdgeList).unwrap()
    }

    fn group_vars(inst: &EncodedInstance, labels: &[&str]) -> Vec<Var> {
        labels
            .iter()
            .flat_map(|s| {
                let v = inst.graph.node_by_label(s).unwrap();
                [inst.varmap.x(v), inst.varmap.y(v)]
            })
            .collect()
    }

    fn x_of(inst: &EncodedInstance, s: &str) -> Var {
        inst.varmap.x(inst.graph.node_by_label(s).unwrap())
    }

    fn y_of(inst: &EncodedInstance, s: &str) -> Var {
        inst.varmap.y(inst.graph.node_by_label(s).unwrap())
    }

    /// Brute-force definability over the enumerated projected truth table.
    fn defined_by_table(rows: &[Vec<bool>], z: &[Var], defining: &[Var], target: Var) -> bool {
        let pos = |v: Var| z.iter().position(|&w| w == v).unwrap();
        let cols: Vec<usize> = defining.iter().map(|&v| pos(v)).collect();
        let t = pos(target);
        for a in rows {
            for b in rows {
                if cols.iter().all(|&c| a[c] == b[c]) && a[t] != b[t] {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn house_worked_example_queries() {
        let inst = encode_instance(&house(), 1).unwrap();
        for mode in [QueryMode::Incremental, QueryMode::FreshPerQuery] {
            let mut ctx = DefinabilityContext::new(&inst, mode);
            let b = ConflictBudget::unlimited();
            let c = group_vars(&inst, &["a", "b", "c", "d"]);
            assert_eq!(ctx.padoa_query(&c, y_of(&inst, "e"), b).unwrap().status, SolveStatus::Unsat);
            assert_eq!(ctx.padoa_query(&c, x_of(&inst, "e"), b).unwrap().status, SolveStatus::Unsat);

            let c = group_vars(&inst, &["a", "b"]);
            assert_eq!(ctx.padoa_query(&c, y_of(&inst, "c"), b).unwrap().status, SolveStatus::Unsat);
            let out = ctx.padoa_query(&c, x_of(&inst, "c"), b).unwrap();
            assert_eq!(out.status, SolveStatus::Sat);
            // the witness is the pair of rows {c} and {e}
            let m = out.model.unwrap();
            let xs = |off: u32| -> Vec<bool> {
                ["a", "b", "c", "d", "e"].iter().map(|s| m[x_of(&inst, s).index() + off as usize]).collect()
            };
            let t = inst.formula.num_vars();
            assert_eq!(xs(0), [false, false, true, false, false]);
            assert_eq!(xs(t), [false, false, false, false, true]);

            let c = group_vars(&inst, &["c"]);
            assert_eq!(ctx.padoa_query(&c, x_of(&inst, "a"), b).unwrap().status, SolveStatus::Sat);
            assert_eq!(ctx.queries(), 5);
        }
    }

    #[test]
    fn variable_counts() {
        let inst = encode_instance(&house(), 1).unwrap();
        let ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
        // 14 originals, 14 copies, 10 indicators
        assert_eq!(ctx.base().num_vars(), 2 * 14 + 10);
        assert_eq!(ctx.base().num_clauses(), 2 * inst.formula.num_clauses() + 2 * 10);
        let z = ctx.support()[0];
        assert_eq!(ctx.hat(z).id(), z.id() + 14);
        assert_eq!(ctx.indicator(z).unwrap().id(), 29);
        assert!(ctx.debug_dimacs().contains("c z 1 15 29\n"));
    }

    #[test]
    fn disabled_indicators_decouple_copies() {
        let g = Graph::with_numeric_labels(1, []).unwrap();
        let inst = encode_instance(&g, 1).unwrap();
        let ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
        let x = inst.varmap.x[0];
        let e = ctx.indicator(x).unwrap();
        let out = solve(ctx.base(), &[e.neg(), x.pos(), ctx.hat(x).neg()], ConflictBudget::unlimited()).unwrap();
        assert!(out.is_sat());
        let out = solve(ctx.base(), &[e.pos(), x.pos(), ctx.hat(x).neg()], ConflictBudget::unlimited()).unwrap();
        assert!(out.is_unsat());
    }

    #[test]
    fn all_indicators_force_agreement() {
        let inst = encode_instance(&house(), 2).unwrap();
        let ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
        let mut assumptions: Vec<Lit> = ctx.support().iter().map(|&z| ctx.indicator(z).unwrap().pos()).collect();
        assumptions.push(x_of(&inst, "b").pos());
        let out = solve(ctx.base(), &assumptions, ConflictBudget::unlimited()).unwrap();
        let m = out.model.unwrap();
        for &z in ctx.support() {
            assert_eq!(m[z.index()], m[ctx.hat(z).index()]);
        }
    }

    #[test]
    fn rejects_ill_formed_queries() {
        let inst = encode_instance(&house(), 1).unwrap();
        let mut ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
        let xa = x_of(&inst, "a");
        assert_eq!(
            ctx.padoa_query(&[xa], xa, ConflictBudget::unlimited()).unwrap_err(),
            DefinabilityError::TargetInDefiningSet(xa.id())
        );
        let aux = inst.varmap.aux[0];
        assert_eq!(
            ctx.padoa_query(&[], aux, ConflictBudget::unlimited()).unwrap_err(),
            DefinabilityError::NotInSupport(aux.id())
        );
    }

    /// Sharing the counter auxiliaries between the copies wrongly reports
    /// x_c as defined by {x_a, y_a, x_b, y_b}.
    #[test]
    fn shared_auxiliaries_would_be_unsound() {
        let inst = encode_instance(&house(), 1).unwrap();
        let f = &inst.formula;
        let t = f.num_vars();
        let z = inst.varmap.support();
        let zlen = z.len() as u32;
        let hat = |v: Var| if inst.varmap.is_aux(v) { v } else { Var::new(v.id() + t) };
        let mut shared = CnfFormula::with_vars(2 * t + zlen);
        for c in f.clauses() {
            shared.add_clause(c).unwrap();
            let r: Vec<Lit> = c.iter().map(|&l| Lit::new(hat(l.var()), l.is_negated())).collect();
            shared.add_clause(&r).unwrap();
        }
        let mut assumptions = Vec::new();
        for v in group_vars(&inst, &["a", "b"]) {
            let e = Var::new(2 * t + v.id());
            shared.add_clause(&[e.neg(), v.neg(), hat(v).pos()]).unwrap();
            shared.add_clause(&[e.neg(), v.pos(), hat(v).neg()]).unwrap();
            assumptions.push(e.pos());
        }
        let xc = x_of(&inst, "c");
        assumptions.extend([xc.pos(), hat(xc).neg()]);
        let out = solve(&shared, &assumptions, ConflictBudget::unlimited()).unwrap();
        assert!(out.is_unsat());

        let mut ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
        let out = ctx.padoa_query(&group_vars(&inst, &["a", "b"]), xc, ConflictBudget::unlimited()).unwrap();
        assert!(out.is_sat());
    }

    /// Query with unconditional equivalences for every j ≠ i, built
    /// directly, agrees with the indicator formulation on C = Z \ {z_i}.
    #[test]
    fn unconditional_equivalences_agree_with_indicators() {
        for seed in 0..6 {
            let g = generators::random_connected(5, seed as usize % 4, seed);
            for k in 1..=2 {
                let inst = encode_instance(&g, k).unwrap();
                let f = &inst.formula;
                let t = f.num_vars();
                let z = inst.varmap.support();
                let mut ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
                for &target in &z {
                    let mut direct = CnfFormula::with_vars(2 * t);
                    for c in f.clauses() {
                        direct.add_clause(c).unwrap();
                        let r: Vec<Lit> = c.iter().map(|&l| shift(l, t)).collect();
                        direct.add_clause(&r).unwrap();
                    }
                    for &other in z.iter().filter(|&&w| w != target) {
                        let oh = Var::new(other.id() + t);
                        direct.add_clause(&[other.neg(), oh.pos()]).unwrap();
                        direct.add_clause(&[other.pos(), oh.neg()]).unwrap();
                    }
                    let th = Var::new(target.id() + t);
                    let want = solve(&direct, &[target.pos(), th.neg()], ConflictBudget::unlimited()).unwrap();
                    let rest: Vec<Var> = z.iter().copied().filter(|&w| w != target).collect();
                    let got = ctx.padoa_query(&rest, target, ConflictBudget::unlimited()).unwrap();
                    assert_eq!(want.status, got.status);
                    if inst.varmap.y.contains(&target) {
                        assert!(got.is_unsat());
                    }
                }
            }
        }
    }

    fn arb_instance() -> impl Strategy<Value = (Graph, usize)> {
        (2usize..=6, 0usize..6, any::<u64>(), 1usize..=2)
            .prop_map(|(n, extra, seed, k)| (generators::random_connected(n, extra, seed), k.min(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sound_against_truth_table((g, k) in arb_instance(), mask in any::<u32>(), pick in any::<usize>()) {
            let inst = encode_instance(&g, k).unwrap();
            let z = inst.varmap.support();
            let rows = enumerate_models_projected(&inst.formula, &z, 10_000).unwrap().models;
            let target = z[pick % z.len()];
            let defining: Vec<Var> = z.iter().enumerate()
                .filter(|&(i, &v)| v != target && mask >> (i % 32) & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            let mut ctx = DefinabilityContext::new(&inst, QueryMode::Incremental);
            let out = ctx.padoa_query(&defining, target, ConflictBudget::unlimited()).unwrap();
            let defined = defined_by_table(&rows, &z, &defining, target);
            prop_assert_eq!(out.is_unsat(), defined);
            prop_assert_ne!(out.status, SolveStatus::BudgetExhausted);

            // supersets of a defining set still define
            if defined {
                let all: Vec<Var> = z.iter().copied().filter(|&v| v != target).collect();
                prop_assert!(ctx.padoa_query(&all, target, ConflictBudget::unlimited()).unwrap().is_unsat());
            }
        }
    }
}
