use super::*;
use crate::chase::{chase, Strategy};
use crate::corpus::{gen_dexp, gen_qbf, gen_qbf_merged, gen_sets, qbf_suite, CorpusInstance};
use crate::depgraph::{build_ledgraph, compute_rank, scc_analysis, LabelledDepGraph};
use crate::model::{parse_program, Position, Program};
use crate::saturation::{find_saturating_certificate, SearchOptions};

struct Analysed {
    graph: LabelledDepGraph,
    scc: SccAnalysis,
    verdict: ArboreousVerdict,
}

fn analyse(p: &Program) -> Analysed {
    let cert = find_saturating_certificate(p, &SearchOptions::default()).unwrap();
    let ranks = compute_rank(&cert.graph, &cert.scc, &cert.edge_sets()).unwrap();
    let verdict = check_arboreous(p, &cert.scc, &ranks, &cert.edge_sets());
    Analysed {
        graph: build_ledgraph(p),
        scc: scc_analysis(&build_ledgraph(p)),
        verdict,
    }
}

fn order_of(p: &Program) -> (ArboreousInfo, PositionOrder) {
    let a = analyse(p);
    let info = a.verdict.info().expect("arboreous").clone();
    let order = compute_position_order(p, &a.graph, &a.scc, &info);
    (info, order)
}

#[test]
fn sets_are_arboreous() {
    let c = gen_sets(1);
    let (info, _) = order_of(&c.program);
    assert_eq!(info.rank, 1);
    assert_eq!(info.e_rules, [0].into());
    assert_eq!(info.v_e.len(), 1);
}

#[test]
fn dexp_is_not_arboreous() {
    let c = gen_dexp(2, true);
    match analyse(&c.program).verdict {
        ArboreousVerdict::NotArboreous(r) => assert!(r.contains("confluence 2"), "{r}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn two_maximal_components() {
    let p = parse_program(
        "elem(X), set(S) -> set(V), su(X, S, V), su(X, V, V) .
         su(X, S, T), su(Y, S, S) -> su(Y, T, T) .
         elem2(X), set2(S) -> set2(V), su2(X, S, V), su2(X, V, V) .
         su2(X, S, T), su2(Y, S, S) -> su2(Y, T, T) .",
    )
    .unwrap();
    match analyse(&p).verdict {
        ArboreousVerdict::NotArboreous(r) => assert!(r.contains("2 components"), "{r}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn rank_zero_not_applicable() {
    let p = parse_program("a(X) -> r(X, V) .").unwrap();
    assert!(matches!(analyse(&p).verdict, ArboreousVerdict::NotApplicable(_)));
}

#[test]
fn qbf_order_and_guardedness() {
    let phi = &qbf_suite()[2];
    let c = gen_qbf(phi);
    let (_, order) = order_of(&c.program);
    assert!(order.holds(Position::new("su", 2), Position::new("su", 3)));
    assert!(!order.holds(Position::new("su", 3), Position::new("su", 2)));
    assert_eq!(
        order.removed[&(Position::new("su", 3), Position::new("su", 2))],
        Removal::NewBag
    );
    for (pred, n) in c.program.signature().iter() {
        for i in 1..=n as u32 {
            let pos = Position { pred, index: i };
            assert!(order.holds(pos, pos));
        }
    }
    assert!(is_path_guarded(&order).guarded);

    let m = gen_qbf_merged(phi);
    let (_, order) = order_of(&m.program);
    let g = is_path_guarded(&order);
    assert!(!g.guarded);
    let merged = m.program.len() - 1;
    assert_eq!(g.offending.iter().map(|o| o.0).collect::<Vec<_>>(), vec![merged]);
    let names: Vec<(&str, &str)> = g.offending[0]
        .1
        .iter()
        .map(|&(x, y)| (m.program.var_name(x), m.program.var_name(y)))
        .collect();
    assert!(names.contains(&("T", "T2")), "{names:?}");
}

#[test]
fn new_bag_condition() {
    let p = parse_program(
        "elem(X), set(S) -> set(V), su(X, S, V), su(X, V, V), p(V, X) .
         su(X, S, T), su(Y, S, S) -> su(Y, T, T) .
         p(S, X), su(Y, S, T) -> p(T, X) .",
    )
    .unwrap();
    let (info, order) = order_of(&p);
    assert_eq!(info.v_e.len(), 1);
    assert_eq!(
        order.removed.get(&(Position::new("p", 1), Position::new("p", 2))),
        Some(&Removal::NewBag)
    );
}

fn forest_and_tree(c: &CorpusInstance) -> (ArboreousInfo, PositionOrder, NullForest, TermTree, crate::chase::ChaseResult) {
    let (info, order) = order_of(&c.program);
    let r = chase(&c.program, &c.database, Strategy::Deterministic, 100_000);
    assert!(r.terminated());
    let forest = build_null_forest(&c.program, r.trace(), &info).unwrap();
    let tree = build_term_tree(&c.program, r.trace(), r.interp(), &info, &forest).unwrap();
    (info, order, forest, tree, r)
}

#[test]
fn sets_term_tree() {
    let c = gen_sets(1);
    let (info, _, forest, tree, r) = forest_and_tree(&c);
    let e_steps = r.trace().steps.iter().filter(|s| info.e_rules.contains(&s.rule)).count();
    assert_eq!(e_steps, 1);
    assert_eq!(tree.len(), 2);
    assert_eq!(forest.nodes.len(), 1);
    assert!(forest.edges.is_empty());

    let c = gen_sets(2);
    let (info, _, forest, tree, r) = forest_and_tree(&c);
    assert_eq!(forest.nodes.len(), r.null_count());
    assert_eq!(forest.nodes.len(), 4);
    assert_eq!(forest.roots().len(), 2);
    for (&child, &parent) in &forest.parent {
        assert!(forest.nodes.contains(&child) && forest.nodes.contains(&parent));
    }
    let e_steps = r.trace().steps.iter().filter(|s| info.e_rules.contains(&s.rule)).count();
    assert_eq!(tree.len(), e_steps + 1);
    assert_eq!(tree.max_depth(), 2);
}

#[test]
fn qbf_traces_satisfy_invariants() {
    for phi in qbf_suite() {
        let c = gen_qbf(&phi);
        let (info, order, forest, tree, r) = forest_and_tree(&c);
        for n in &forest.nodes {
            assert!(forest.edges.iter().filter(|e| e.1 == *n).count() <= 1);
        }
        let e_steps = r.trace().steps.iter().filter(|s| info.e_rules.contains(&s.rule)).count();
        assert_eq!(tree.len(), e_steps + 1, "{phi}");
        check_order_soundness(r.interp(), &tree, &order).unwrap();
        check_locality(&c.program, r.trace(), &tree).unwrap();
    }
}

#[test]
fn datalog_trace_gives_root_only() {
    let c = gen_sets(0);
    let (_, _, forest, tree, _) = forest_and_tree(&c);
    assert!(forest.nodes.is_empty());
    assert_eq!(tree.len(), 1);
    assert!(term_tree_dot(&c.program, &chase(&c.program, &c.database, Strategy::Deterministic, 10).trace().clone(), &tree).contains("B0"));
}

#[test]
fn anti_monotone_order() {
    let c = gen_qbf(&qbf_suite()[0]);
    let (_, small) = order_of(&c.program);
    let m = parse_program(&format!("{}su(X, S, T), su(T, S, U) -> su(U, T, S) .\n", c.program_text)).unwrap();
    let a = analyse(&m);
    if let Some(info) = a.verdict.info() {
        let big = compute_position_order(&m, &a.graph, &a.scc, info);
        assert!(big.pairs.is_subset(&small.pairs));
    }
}
