mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use sattgd::analysis::analyze;
use sattgd::arboreal::compute_position_order;
use sattgd::chase::{chase, evaluate_bcq, trace_text, Strategy as ChaseStrategy};
use sattgd::corpus::{self, Lit, Qbf, Quant};
use sattgd::datalog::{entails, saturate};
use sattgd::depgraph::{build_ledgraph, omega};
use sattgd::model::{parse_facts, parse_program, parse_query, Atom, FactStore, Position, Program, Sym, Term, VarId};
use sattgd::saturation::SearchOptions;
use sattgd::treechase::tree_chase_guided;

use common::*;

const PREDS: &[(&str, usize)] = &[("p", 1), ("q", 2), ("r", 2), ("s", 3)];
const VARS: &[&str] = &["X", "Y", "Z", "W"];
const CONSTS: &[&str] = &["a", "b", "c"];

fn atom_text(pred: usize, args: &[String]) -> String {
    format!("{}({})", PREDS[pred].0, args.join(", "))
}

fn arb_body_atom() -> impl Strategy<Value = (usize, Vec<String>)> {
    (0..PREDS.len()).prop_flat_map(|p| {
        let arg = prop_oneof![
            4 => proptest::sample::select(VARS).prop_map(str::to_string),
            1 => proptest::sample::select(CONSTS).prop_map(str::to_string),
        ];
        (Just(p), proptest::collection::vec(arg, PREDS[p].1))
    })
}

/// Rule text; head terms come from the body variables, constants, and
/// (when `existential`) the fresh variables `N` and `M`.
fn arb_rule(existential: bool) -> impl Strategy<Value = String> {
    proptest::collection::vec(arb_body_atom(), 1..=3).prop_flat_map(move |body| {
        let vars: Vec<String> = body
            .iter()
            .flat_map(|(_, a)| a.iter().filter(|t| t.starts_with(char::is_uppercase)).cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut pool: Vec<String> = vars.clone();
        pool.extend(CONSTS.iter().map(|c| c.to_string()));
        if existential {
            pool.extend(["N".to_string(), "M".to_string()]);
        }
        let head_atom = (0..PREDS.len()).prop_flat_map(move |p| {
            (Just(p), proptest::collection::vec(proptest::sample::select(pool.clone()), PREDS[p].1))
        });
        let body = body.clone();
        proptest::collection::vec(head_atom, 1..=2).prop_map(move |head| {
            let b: Vec<String> = body.iter().map(|(p, a)| atom_text(*p, a)).collect();
            let h: Vec<String> = head.iter().map(|(p, a)| atom_text(*p, a)).collect();
            format!("{} -> {} .", b.join(", "), h.join(", "))
        })
    })
}

fn arb_program(existential: bool) -> impl Strategy<Value = String> {
    proptest::collection::vec(arb_rule(existential), 1..=4).prop_map(|rs| rs.join("\n"))
}

fn arb_facts() -> impl Strategy<Value = String> {
    let fact = (0..PREDS.len()).prop_flat_map(|p| {
        (Just(p), proptest::collection::vec(proptest::sample::select(CONSTS).prop_map(str::to_string), PREDS[p].1))
    });
    proptest::collection::vec(fact, 0..=8)
        .prop_map(|fs| fs.iter().map(|(p, a)| format!("{} .\n", atom_text(*p, a))).collect())
}

fn arb_query_atoms(offset: u32) -> impl Strategy<Value = Vec<Atom>> {
    let term = prop_oneof![
        3 => (0u32..3).prop_map(move |i| Term::Var(VarId(offset + i))),
        1 => proptest::sample::select(CONSTS).prop_map(Term::constant),
    ];
    let atom = (0..PREDS.len()).prop_flat_map(move |p| {
        (Just(p), proptest::collection::vec(term.clone(), PREDS[p].1)).prop_map(|(p, args)| Atom {
            pred: Sym::new(PREDS[p].0),
            args,
        })
    });
    proptest::collection::vec(atom, 1..=3)
}

fn arb_qbf() -> impl Strategy<Value = Qbf> {
    (1usize..=3).prop_flat_map(|k| {
        let quant = prop_oneof![Just(Quant::Exists), Just(Quant::Forall)];
        let lit = (1..=k, any::<bool>()).prop_map(|(var, neg)| Lit { var, neg });
        let clause = proptest::collection::vec(lit, 1..=3);
        (proptest::collection::vec(quant, k), proptest::collection::vec(clause, 1..=3))
            .prop_map(|(prefix, clauses)| Qbf::new(prefix, clauses))
    })
}

/// Renames predicates, constants and variables of a rule, fact or query
/// text by prefixing or suffixing every identifier.
fn rename_text(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word.starts_with(char::is_uppercase) {
                out.push_str(&format!("{word}_r"));
            } else if chars.get(i) == Some(&'(') {
                out.push_str(&format!("ren_{word}"));
            } else if word.starts_with(char::is_numeric) {
                out.push_str(&word);
            } else {
                out.push_str(&format!("k_{word}"));
            }
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn positions(atoms: &[Atom], v: VarId) -> BTreeSet<Position> {
    let mut out = BTreeSet::new();
    for a in atoms {
        for (i, &t) in a.args.iter().enumerate() {
            if t == Term::Var(v) {
                out.insert(Position {
                    pred: a.pred,
                    index: i as u32 + 1,
                });
            }
        }
    }
    out
}

/// Least fixpoint of `Ω_v` computed straight from the definition.
fn naive_omega(p: &Program, v: VarId) -> BTreeSet<Position> {
    let mut om = positions(&p.rule(p.rule_of_var(v)).head, v);
    loop {
        let before = om.len();
        for r in p.rules() {
            for x in r.body_vars() {
                if positions(&r.body, x).is_subset(&om) {
                    om.extend(positions(&r.head, x));
                }
            }
        }
        if om.len() == before {
            return om;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_round_trip(text in arb_program(true)) {
        let p = parse_program(&text).unwrap();
        let printed = p.to_string();
        let again = parse_program(&printed).unwrap();
        prop_assert_eq!(again.to_string(), printed);
        prop_assert_eq!(again.len(), p.len());
    }

    #[test]
    fn saturation_matches_naive_fixpoint(text in arb_program(false), facts in arb_facts(), more in arb_facts()) {
        let p = parse_program(&text).unwrap();
        let d = parse_facts(&facts).unwrap();
        let sat = saturate(p.rules(), &d);
        prop_assert_eq!(to_set(&sat), naive_saturate(p.rules(), d.iter().cloned()));
        prop_assert!(saturate(p.rules(), &sat).same_atoms(&sat));
        let mut bigger = d.clone();
        for a in parse_facts(&more).unwrap().iter() {
            bigger.insert(a.clone());
        }
        prop_assert!(sat.is_subset(&saturate(p.rules(), &bigger)));
    }

    #[test]
    fn entailment_matches_oracle(text in arb_program(false), body in arb_query_atoms(1000), head in arb_query_atoms(1000)) {
        let p = parse_program(&text).unwrap();
        prop_assert_eq!(entails(p.rules(), &body, &head), naive_entails(p.rules(), &body, &head));
    }

    #[test]
    fn omega_is_least_and_monotone(text in arb_program(true), extra in arb_rule(false)) {
        let p = parse_program(&text).unwrap();
        let q = parse_program(&format!("{text}\n{extra}")).unwrap();
        for v in p.existential_vars() {
            let om = omega(&p, v).unwrap();
            prop_assert_eq!(&om, &naive_omega(&p, v));
            prop_assert!(om.is_subset(&omega(&q, v).unwrap()));
        }
    }

    #[test]
    fn chase_result_is_model(text in arb_program(true), facts in arb_facts(), seed in any::<u64>()) {
        let p = parse_program(&text).unwrap();
        let d = parse_facts(&facts).unwrap();
        let r = chase(&p, &d, ChaseStrategy::Seeded(seed), 300);
        prop_assert!(d.is_subset(r.interp()));
        if r.terminated() {
            prop_assert!(is_model(&p, &to_set(r.interp())));
        }
    }

    #[test]
    fn strategies_are_deterministic(text in arb_program(true), facts in arb_facts(), seed in any::<u64>()) {
        let p = parse_program(&text).unwrap();
        let d = parse_facts(&facts).unwrap();
        for st in [ChaseStrategy::Deterministic, ChaseStrategy::Seeded(seed)] {
            let a = chase(&p, &d, st, 200);
            let b = chase(&p, &d, st, 200);
            prop_assert_eq!(trace_text(&p, a.trace()), trace_text(&p, b.trace()));
            prop_assert!(a.interp().same_atoms(b.interp()));
        }
    }

    #[test]
    fn qbf_engines_agree(phi in arb_qbf(), seed in any::<u64>()) {
        let c = corpus::gen_qbf(&phi);
        let q = &c.queries[0];
        let truth = phi.eval();
        let r = chase(&c.program, &c.database, ChaseStrategy::Seeded(seed), 100_000);
        prop_assert!(r.terminated());
        prop_assert_eq!(evaluate_bcq(r.interp(), q), truth);
        prop_assert_eq!(naive_bcq(&to_set(r.interp()), q), truth);
        let a = analyze(&c.program, &SearchOptions::default());
        prop_assert!(a.is_arboreous() && a.is_path_guarded());
        let info = a.arboreous.as_ref().unwrap().info().unwrap();
        let g = tree_chase_guided(&c.program, &c.database, q, info, 100_000).unwrap();
        prop_assert_eq!(g.entailed, truth);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn order_shrinks_when_rules_are_added(k in 0usize..12, body in proptest::collection::vec(0usize..4, 1..=2), head in 0usize..4) {
        // Datalog rules over QBF predicates, arguments drawn from X, S, T.
        const QP: &[(&str, usize)] = &[("su", 3), ("csat", 2), ("new", 2), ("sat", 1)];
        const AV: &[&str] = &["X", "S", "T"];
        let atom = |i: usize| format!("{}({})", QP[i].0, (0..QP[i].1).map(|j| AV[(i + j) % 3]).collect::<Vec<_>>().join(", "));
        let b: Vec<String> = body.iter().map(|&i| atom(i)).collect();
        let bvars: BTreeSet<&str> = body.iter().flat_map(|&i| (0..QP[i].1).map(move |j| AV[(i + j) % 3])).collect();
        let hv: Vec<&str> = (0..QP[head].1).map(|j| AV[(head + j) % 3]).collect();
        prop_assume!(hv.iter().all(|v| bvars.contains(v)));
        let c = corpus::gen_qbf(&corpus::qbf_suite()[k]);
        let extended = parse_program(&format!("{}{} -> {} .\n", c.program_text, b.join(", "), atom(head))).unwrap();
        let small = analyze(&c.program, &SearchOptions::default());
        let big = analyze(&extended, &SearchOptions::default());
        let (Some(si), Some(bi)) = (
            small.arboreous.as_ref().and_then(|v| v.info()),
            big.arboreous.as_ref().and_then(|v| v.info()),
        ) else {
            return Ok(());
        };
        prop_assume!(small.graph.edges == big.graph.edges && si.c_hat == bi.c_hat);
        let so = compute_position_order(&c.program, &small.graph, &small.scc, si);
        let bo = compute_position_order(&extended, &big.graph, &big.scc, bi);
        prop_assert!(bo.pairs.is_subset(&so.pairs));
    }

    #[test]
    fn renaming_preserves_verdicts(which in 0usize..5, k in 0usize..12) {
        let c = match which {
            0 => corpus::gen_dexp(1, true),
            1 => corpus::gen_sets(2),
            2 => corpus::gen_sets_nonterm(true),
            3 => corpus::gen_qbf_merged(&corpus::qbf_suite()[k]),
            _ => corpus::gen_qbf(&corpus::qbf_suite()[k]),
        };
        let p = parse_program(&rename_text(&c.program_text)).unwrap();
        let opts = SearchOptions::default();
        let (a, b) = (analyze(&c.program, &opts), analyze(&p, &opts));
        prop_assert_eq!(a.saturation.verdict(), b.saturation.verdict());
        prop_assert_eq!(a.rank.as_ref().map(|r| r.program_rank), b.rank.as_ref().map(|r| r.program_rank));
        prop_assert_eq!(a.is_arboreous(), b.is_arboreous());
        prop_assert_eq!(a.is_path_guarded(), b.is_path_guarded());
        prop_assert_eq!(a.graph.edges.len(), b.graph.edges.len());
        prop_assert_eq!(build_ledgraph(&p).edges.len(), build_ledgraph(&c.program).edges.len());
        if let Some(qt) = c.query_texts.first() {
            let d: FactStore = parse_facts(&rename_text(&c.facts_text)).unwrap();
            let q = parse_query(&rename_text(qt)).unwrap();
            let r1 = chase(&c.program, &c.database, ChaseStrategy::Deterministic, 20_000);
            let r2 = chase(&p, &d, ChaseStrategy::Deterministic, 20_000);
            prop_assert_eq!(r1.terminated(), r2.terminated());
            prop_assert_eq!(evaluate_bcq(r1.interp(), &c.queries[0]), evaluate_bcq(r2.interp(), &q));
        }
    }
}

#[test]
fn rename_text_shapes() {
    assert_eq!(rename_text("su(X, e0, 1) ."), "ren_su(X_r, k_e0, 1) .");
    assert_eq!(rename_text("?- sat(V) ."), "?- ren_sat(V_r) .");
}
