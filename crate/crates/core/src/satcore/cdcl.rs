//! Bundled CDCL engine: two-watched-literal propagation, first-UIP learning
//! with local minimisation, VSIDS, phase saving, Luby restarts, activity
//! based learnt-clause deletion and MiniSat-style assumptions.
//!
//! Heuristics are fully deterministic. A fresh engine given the same
//! clauses and assumptions walks the same search regardless of its conflict
//! budget, so a smaller budget only ever cuts a run short.

use super::{ConflictBudget, Lit, SatEngine, SolveOutcome, SolveStatus, Var};

const TRUE: u8 = 1;
const FALSE: u8 = 0;
const UNDEF: u8 = 2;

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: f64 = 100.0;
const LEARNTS_GROWTH: f64 = 1.1;

type CRef = usize;

#[derive(Debug, Clone, Copy)]
struct Watch {
    cref: CRef,
    blocker: Lit,
}

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Indexed binary max-heap of variable indices ordered by activity.
#[derive(Debug, Default, Clone)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, NOT_IN_HEAP);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    // ties break towards the smaller index so the order is total
    fn before(a: usize, b: usize, act: &[f64]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(v, p, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && Self::before(self.heap[right], self.heap[left], act) { right } else { left };
            let c = self.heap[child];
            if !Self::before(c, v, act) {
                break;
            }
            self.heap[i] = c;
            self.pos[c] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }
}

enum SearchResult {
    Sat,
    Unsat,
    Restart,
    Budget,
}

/// The bundled incremental CDCL engine.
#[derive(Debug, Clone)]
pub struct CdclSolver {
    num_vars: usize,
    clauses: Vec<Clause>,
    learnts: Vec<CRef>,
    num_original: usize,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    max_learnts: f64,
    ok: bool,
    total_conflicts: u64,
    total_decisions: u64,
}

impl Default for CdclSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl CdclSolver {
    pub fn new() -> Self {
        CdclSolver {
            num_vars: 0,
            clauses: Vec::new(),
            learnts: Vec::new(),
            num_original: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            polarity: Vec::new(),
            seen: Vec::new(),
            max_learnts: 0.0,
            ok: true,
            total_conflicts: 0,
            total_decisions: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Conflicts over the engine's lifetime.
    pub fn total_conflicts(&self) -> u64 {
        self.total_conflicts
    }

    pub fn total_decisions(&self) -> u64 {
        self.total_decisions
    }

    pub fn num_learnts(&self) -> usize {
        self.learnts.len()
    }

    #[inline]
    fn value(&self, l: Lit) -> u8 {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.polarity[v] = l.is_negated();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.qhead.min(start);
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        debug_assert!(lits.len() >= 2);
        let cref = self.clauses.len();
        self.watches[lits[0].code()].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1].code()].push(Watch { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.learnts.push(cref);
        } else {
            self.num_original += 1;
        }
        cref
    }

    /// Unit propagation. Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() && conflict.is_none() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[w.cref];
                if clause.deleted {
                    continue;
                }
                let lits = &mut clause.lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let kept = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && lit_value(&self.assigns, first) == TRUE {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if lit_value(&self.assigns, lits[k]) != FALSE {
                        lits.swap(1, k);
                        self.watches[lits[1].code()].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if lit_value(&self.assigns, first) == FALSE {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    let v = first.var().index();
                    self.assigns[v] = if first.is_negated() { FALSE } else { TRUE };
                    self.level[v] = self.trail_lim.len() as u32;
                    self.reason[v] = Some(w.cref);
                    self.trail.push(first);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
        }
        if conflict.is_some() {
            self.qhead = self.trail.len();
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal
    /// first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt = vec![Lit::new(Var::new(1), false)];
        let mut pending = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();

        loop {
            self.bump_clause(confl);
            let skip = usize::from(p.is_some());
            let len = self.clauses[confl].lits.len();
            for k in skip..len {
                let q = self.clauses[confl].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = lit.var().index();
            self.seen[v] = false;
            pending -= 1;
            p = Some(lit);
            if pending == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();

        // local minimisation: drop literals whose reason is already covered
        let to_clear: Vec<Lit> = learnt.clone();
        let mut kept = 1;
        for i in 1..learnt.len() {
            let v = learnt[i].var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|q| {
                    let u = q.var().index();
                    self.seen[u] || self.level[u] == 0
                }),
            };
            if !redundant {
                learnt[kept] = learnt[i];
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in to_clear {
            self.seen[l.var().index()] = false;
        }

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, backjump)
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.clauses[cref].lits[0];
        self.reason[first.var().index()] == Some(cref) && self.value(first) == TRUE
    }

    fn reduce_db(&mut self) {
        let mut order = std::mem::take(&mut self.learnts);
        order.sort_by(|&a, &b| self.clauses[a].activity.total_cmp(&self.clauses[b].activity).then(a.cmp(&b)));
        let half = order.len() / 2;
        let mut keep = Vec::with_capacity(order.len());
        for (i, cref) in order.into_iter().enumerate() {
            let c = &self.clauses[cref];
            if i < half && c.lits.len() > 2 && !self.locked(cref) {
                let c = &mut self.clauses[cref];
                c.deleted = true;
                c.lits = Vec::new();
            } else {
                keep.push(cref);
            }
        }
        keep.sort_unstable();
        self.learnts = keep;
        self.max_learnts *= LEARNTS_GROWTH;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Lit::new(Var::from_index(v), self.polarity[v]));
            }
        }
        None
    }

    fn search(&mut self, restart_after: u64, assumptions: &[Lit], budget: u64, used: &mut u64) -> SearchResult {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.total_conflicts += 1;
                *used += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SearchResult::Unsat;
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                if *used >= budget {
                    return SearchResult::Budget;
                }
            } else {
                if local_conflicts >= restart_after {
                    self.cancel_until(0);
                    return SearchResult::Restart;
                }
                if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.value(a) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => return SearchResult::Unsat,
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(a) => a,
                    None => match self.pick_branch() {
                        Some(l) => {
                            self.total_decisions += 1;
                            l
                        }
                        None => return SearchResult::Sat,
                    },
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }
}

#[inline]
fn lit_value(assigns: &[u8], l: Lit) -> u8 {
    let a = assigns[l.var().index()];
    if a == UNDEF {
        UNDEF
    } else {
        a ^ l.is_negated() as u8
    }
}

/// `i`-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ...
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

impl SatEngine for CdclSolver {
    fn reserve_vars(&mut self, num_vars: u32) {
        let n = num_vars as usize;
        if n <= self.num_vars {
            return;
        }
        self.assigns.resize(n, UNDEF);
        self.level.resize(n, 0);
        self.reason.resize(n, None);
        self.activity.resize(n, 0.0);
        self.polarity.resize(n, true);
        self.seen.resize(n, false);
        self.watches.resize(2 * n, Vec::new());
        self.heap.grow(n);
        for v in self.num_vars..n {
            self.heap.insert(v, &self.activity);
        }
        self.num_vars = n;
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let max_var = lits.iter().map(|l| l.var().id()).max().unwrap_or(0);
        self.reserve_vars(max_var);
        let mut c = match super::normalize_clause(lits) {
            super::Normalized::Tautology => return,
            super::Normalized::Clause(c) => c,
        };
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return;
        }
        c.retain(|&l| self.value(l) != FALSE);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c, false);
            }
        }
    }

    fn solve_limited(&mut self, assumptions: &[Lit], budget: ConflictBudget) -> SolveOutcome {
        let unsat = |conflicts| SolveOutcome { status: SolveStatus::Unsat, model: None, conflicts };
        if let Some(max) = assumptions.iter().map(|l| l.var().id()).max() {
            self.reserve_vars(max);
        }
        if !self.ok {
            return unsat(0);
        }
        self.cancel_until(0);
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.num_original as f64 / 3.0).max(1000.0);
        }
        let budget = budget.get().max(1);
        let mut used = 0u64;
        let mut restarts = 0u64;
        let status = loop {
            let restart_after = (luby(restarts) as f64 * RESTART_BASE) as u64;
            restarts += 1;
            match self.search(restart_after, assumptions, budget, &mut used) {
                SearchResult::Restart => continue,
                SearchResult::Sat => break SolveStatus::Sat,
                SearchResult::Unsat => break SolveStatus::Unsat,
                SearchResult::Budget => break SolveStatus::BudgetExhausted,
            }
        };
        let model =
            (status == SolveStatus::Sat).then(|| self.assigns.iter().map(|&a| a == TRUE).collect::<Vec<bool>>());
        self.cancel_until(0);
        SolveOutcome { status, model, conflicts: used }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satcore::CnfFormula;
    use proptest::prelude::*;

    fn lits(xs: &[i32]) -> Vec<Lit> {
        xs.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    fn brute_force_sat(num_vars: u32, clauses: &[Vec<i32>], assumptions: &[i32]) -> bool {
        (0u32..1 << num_vars).any(|mask| {
            let val = |x: i32| ((mask >> (x.unsigned_abs() - 1)) & 1 == 1) == (x > 0);
            assumptions.iter().all(|&a| val(a)) && clauses.iter().all(|c| c.iter().any(|&x| val(x)))
        })
    }

    /// Pigeonhole: `p` pigeons into `p - 1` holes, unsatisfiable.
    fn pigeonhole(p: i32) -> (u32, Vec<Vec<i32>>) {
        let h = p - 1;
        let var = |i: i32, j: i32| i * h + j + 1;
        let mut cls = Vec::new();
        for i in 0..p {
            cls.push((0..h).map(|j| var(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    cls.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        ((p * h) as u32, cls)
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_is_unsat_and_budget_bounded() {
        let (n, cls) = pigeonhole(6);
        let mut s = CdclSolver::new();
        s.reserve_vars(n);
        for c in &cls {
            s.add_clause(&lits(c));
        }
        let mut small = s.clone();
        let out = small.solve_limited(&[], ConflictBudget::new(3).unwrap());
        assert_eq!(out.status, SolveStatus::BudgetExhausted);
        assert_eq!(out.conflicts, 3);
        let out = s.solve_limited(&[], ConflictBudget::unlimited());
        assert_eq!(out.status, SolveStatus::Unsat);
        assert!(out.conflicts > 3);
    }

    #[test]
    fn assumptions_do_not_persist() {
        let mut s = CdclSolver::new();
        s.reserve_vars(3);
        s.add_clause(&lits(&[1, 2]));
        s.add_clause(&lits(&[-1, 3]));
        let b = ConflictBudget::unlimited();
        assert!(s.solve_limited(&lits(&[-2, -3]), b).is_unsat());
        let out = s.solve_limited(&lits(&[-2]), b);
        assert!(out.is_sat());
        let m = out.model.unwrap();
        assert!(m[0] && !m[1] && m[2]);
        assert!(s.solve_limited(&[], b).is_sat());
        assert!(s.solve_limited(&lits(&[1, -1]), b).is_unsat());
        assert!(s.solve_limited(&[], b).is_sat());
    }

    #[test]
    fn level_zero_conflict_is_permanent() {
        let mut s = CdclSolver::new();
        s.add_clause(&lits(&[1]));
        s.add_clause(&lits(&[-1]));
        assert!(s.solve_limited(&[], ConflictBudget::unlimited()).is_unsat());
        s.add_clause(&lits(&[2]));
        assert!(s.solve_limited(&[], ConflictBudget::unlimited()).is_unsat());
    }

    #[test]
    fn incremental_clause_addition() {
        let mut s = CdclSolver::new();
        s.add_clause(&lits(&[1, 2, 3]));
        assert!(s.solve_limited(&[], ConflictBudget::unlimited()).is_sat());
        s.add_clause(&lits(&[-1]));
        s.add_clause(&lits(&[-2]));
        let out = s.solve_limited(&[], ConflictBudget::unlimited());
        assert!(out.model.unwrap()[2]);
        s.add_clause(&lits(&[-3]));
        assert!(s.solve_limited(&[], ConflictBudget::unlimited()).is_unsat());
    }

    fn arb_cnf() -> impl Strategy<Value = (u32, Vec<Vec<i32>>, Vec<i32>)> {
        (1u32..9).prop_flat_map(|n| {
            let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
            let clause = proptest::collection::vec(lit.clone(), 1..4);
            (Just(n), proptest::collection::vec(clause, 0..30), proptest::collection::vec(lit, 0..3))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn agrees_with_brute_force((n, cls, assumptions) in arb_cnf()) {
            let mut f = CnfFormula::with_vars(n);
            for c in &cls {
                f.add_clause(&lits(c)).unwrap();
            }
            let mut s = CdclSolver::new();
            s.add_formula(&f);
            let out = s.solve_limited(&lits(&assumptions), ConflictBudget::unlimited());
            let expected = brute_force_sat(n, &cls, &assumptions);
            prop_assert_eq!(out.is_sat(), expected);
            prop_assert_ne!(out.status, SolveStatus::BudgetExhausted);
            if let Some(m) = out.model {
                prop_assert!(f.is_satisfied_by(&m));
                prop_assert!(lits(&assumptions).iter().all(|l| l.eval(&m)));
            }
            // second call on the same engine without assumptions
            let again = s.solve_limited(&[], ConflictBudget::unlimited());
            prop_assert_eq!(again.is_sat(), brute_force_sat(n, &cls, &[]));
        }

        #[test]
        fn unsat_is_stable_under_larger_budgets(p in 4i32..7, b in 1u64..200, extra in 0u64..500) {
            let (n, cls) = pigeonhole(p);
            let mut f = CnfFormula::with_vars(n);
            for c in &cls {
                f.add_clause(&lits(c)).unwrap();
            }
            let small = crate::satcore::solve(&f, &[], ConflictBudget::new(b).unwrap()).unwrap();
            let large = crate::satcore::solve(&f, &[], ConflictBudget::new(b + extra).unwrap()).unwrap();
            if small.is_unsat() {
                prop_assert!(large.is_unsat());
                prop_assert_eq!(small.conflicts, large.conflicts);
            }
        }
    }
}
