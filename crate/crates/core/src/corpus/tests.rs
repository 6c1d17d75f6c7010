use super::*;
use crate::chase::{chase, evaluate_bcq, Strategy};
use crate::model::Term;

fn run(c: &CorpusInstance, cap: usize) -> crate::chase::ChaseResult {
    chase(&c.program, &c.database, Strategy::Deterministic, cap)
}

#[test]
fn all_generators_parse() {
    for name in NAMES {
        let c = by_name(name, None, true).unwrap();
        assert!(!c.program.is_empty(), "{name}");
        assert!(!c.database.is_empty(), "{name}");
    }
    assert!(by_name("nope", None, true).is_none());
}

#[test]
fn level_database() {
    assert_eq!(level_facts(3), "first(1) .\nlast(3) .\nnext(1, 2) .\nnext(2, 3) .\n");
}

#[test]
fn qbf_verdicts_match_brute_force() {
    for phi in qbf_suite() {
        let c = gen_qbf(&phi);
        let r = run(&c, 100_000);
        assert!(r.terminated(), "{phi}");
        assert_eq!(evaluate_bcq(r.interp(), &c.queries[0]), phi.eval(), "{phi}");
        let m = gen_qbf_merged(&phi);
        let r = run(&m, 100_000);
        assert_eq!(evaluate_bcq(r.interp(), &m.queries[0]), phi.eval(), "merged {phi}");
    }
}

#[test]
fn nontermination_sentinels() {
    assert!(!run(&dexp_nonterm(), 5_000).terminated());
    assert!(!run(&gen_sets_nonterm(true), 5_000).terminated());
    assert!(run(&gen_sets_nonterm(false), 5_000).terminated());
}

#[test]
fn sets_without_elements_is_database() {
    let c = gen_sets(0);
    let r = run(&c, 100);
    assert!(r.terminated());
    assert!(r.interp().same_atoms(&c.database));
}

#[test]
fn sets_query() {
    let c = gen_sets(2);
    let r = run(&c, 10_000);
    assert!(r.terminated());
    assert!(evaluate_bcq(r.interp(), &c.queries[0]));
}

fn cat_nulls_at(r: &crate::chase::ChaseResult, level: usize) -> usize {
    let z = Term::constant(&level.to_string());
    r.interp()
        .iter()
        .filter(|a| a.pred.as_str() == "cat" && a.args[2] == z && a.args[3].is_null())
        .count()
}

#[test]
fn dexp_top_level_counts() {
    let counts: Vec<usize> = (1..=3)
        .map(|l| {
            let r = run(&gen_dexp(l, true), 200_000);
            assert!(r.terminated());
            cat_nulls_at(&r, l)
        })
        .collect();
    assert_eq!(counts, vec![4, 16, 256]);
}
