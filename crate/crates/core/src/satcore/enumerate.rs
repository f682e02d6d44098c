use super::{CdclSolver, CnfFormula, ConflictBudget, SatEngine, SatError, Var};

/// Distinct assignments of `projection` that extend to models of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedModels {
    pub projection: Vec<Var>,
    /// One row per projected model, aligned with `projection`, sorted
    /// lexicographically (`false < true`).
    pub models: Vec<Vec<bool>>,
    /// Set when more than `cap` projected models exist; `models` then holds
    /// only the first `cap` found.
    pub cap_hit: bool,
}

impl ProjectedModels {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Enumerates `Sol↓projection(f)` with a blocking-clause loop over the
/// projection variables.
pub fn enumerate_models_projected(f: &CnfFormula, projection: &[Var], cap: usize) -> Result<ProjectedModels, SatError> {
    let mut seen = vec![false; f.num_vars() as usize];
    for &v in projection {
        f.check_lit(v.pos())?;
        if std::mem::replace(&mut seen[v.index()], true) {
            return Err(SatError::DuplicateProjectionVar(v.id()));
        }
    }

    let mut engine = CdclSolver::new();
    engine.add_formula(f);
    let mut models = Vec::new();
    let mut cap_hit = false;
    loop {
        let out = engine.solve_limited(&[], ConflictBudget::unlimited());
        let Some(model) = out.model else { break };
        if models.len() == cap {
            cap_hit = true;
            break;
        }
        let row: Vec<bool> = projection.iter().map(|v| model[v.index()]).collect();
        if projection.is_empty() {
            models.push(row);
            break;
        }
        let blocking: Vec<_> =
            projection.iter().zip(&row).map(|(v, &val)| if val { v.neg() } else { v.pos() }).collect();
        engine.add_clause(&blocking);
        models.push(row);
    }
    models.sort();
    Ok(ProjectedModels { projection: projection.to_vec(), models, cap_hit })
}
