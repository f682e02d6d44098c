use gics_core::gismo::{run_gismo, verify_result, GismoConfig, GroupOrder};
use gics_core::graph::generators;
use gics_core::oracle::{self, is_gics, min_gics_exhaustive};
use gics_core::satcore::dimacs::{parse_dimacs, to_dimacs_string};
use gics_core::satcore::{enumerate_models_projected, SolveStatus};
use gics_core::{encode_instance, ConflictBudget, Graph, QueryMode};

fn small_graphs() -> Vec<Graph> {
    (0..24u64).map(|s| generators::random_connected(4 + (s % 5) as usize, (s % 4) as usize, 300 + s)).collect()
}

fn budget(b: u64) -> ConflictBudget {
    ConflictBudget::new(b).unwrap()
}

#[test]
fn gismo_never_beats_exhaustive_minimum() {
    for g in small_graphs() {
        for k in 1..=2 {
            let inst = encode_instance(&g, k).unwrap();
            let (best, size) = min_gics_exhaustive(&g, k, oracle::DEFAULT_LIMIT).unwrap();
            assert!(is_gics(&g, &best, k, oracle::DEFAULT_LIMIT).unwrap());
            for order in [GroupOrder::Input, GroupOrder::DegreeAscending, GroupOrder::Random(1)] {
                let res = run_gismo(&inst, &GismoConfig { order, ..Default::default() }).unwrap();
                assert!(size <= res.sensor_set.len());
            }
        }
    }
}

#[test]
fn larger_budget_never_keeps_more_groups() {
    let mut compared = 0;
    for g in small_graphs() {
        let inst = encode_instance(&g, 2.min(g.n())).unwrap();
        let small = run_gismo(&inst, &GismoConfig { budget: budget(1), ..Default::default() }).unwrap();
        let large = run_gismo(&inst, &GismoConfig::default()).unwrap();
        assert!(verify_result(&inst, &small, 100_000).unwrap().is_gis);
        // only comparable when every undecided group at the small budget is
        // dropped at the large one
        let resolved = large.budget_exhaustions == 0
            && small
                .per_group_log
                .iter()
                .zip(&large.per_group_log)
                .all(|(s, l)| !s.tests.iter().any(|t| t.outcome == SolveStatus::BudgetExhausted) || !l.selected);
        if resolved {
            compared += 1;
            assert!(large.selected_groups.len() <= small.selected_groups.len());
        }
    }
    assert!(compared > 0);
}

#[test]
fn query_modes_agree_without_exhaustion() {
    for g in small_graphs() {
        let inst = encode_instance(&g, 1).unwrap();
        let inc = run_gismo(&inst, &GismoConfig::default()).unwrap();
        let fresh =
            run_gismo(&inst, &GismoConfig { query_mode: QueryMode::FreshPerQuery, ..Default::default() }).unwrap();
        if inc.budget_exhaustions == 0 && fresh.budget_exhaustions == 0 {
            assert_eq!(inc.selected_groups, fresh.selected_groups);
            assert_eq!(inc.total_queries, fresh.total_queries);
        }
    }
}

#[test]
fn encodings_survive_dimacs_roundtrip() {
    for g in small_graphs().into_iter().take(8) {
        let inst = encode_instance(&g, 2).unwrap();
        let back = parse_dimacs(to_dimacs_string(&inst.formula, &[]).as_bytes()).unwrap();
        assert_eq!(back.formula, inst.formula);
        let support = inst.varmap.support();
        let a = enumerate_models_projected(&inst.formula, &support, 10_000).unwrap();
        let b = enumerate_models_projected(&back.formula, &support, 10_000).unwrap();
        assert_eq!(a.models, b.models);
    }
}

#[test]
fn synthetic_families_solve_and_verify() {
    let families = [
        generators::path(7),
        generators::cycle(7),
        generators::star(6),
        generators::complete(5),
        generators::grid(2, 4),
    ];
    for g in families {
        for k in 1..=3 {
            let inst = encode_instance(&g, k).unwrap();
            let res = run_gismo(&inst, &GismoConfig::default()).unwrap();
            let report = verify_result(&inst, &res, 100_000).unwrap();
            assert!(report.is_gis && report.set_minimal());
            assert!(is_gics(&g, &res.sensor_set, k, oracle::DEFAULT_LIMIT).unwrap());
        }
    }
}
