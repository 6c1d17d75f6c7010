//! Naive reference implementations used as test oracles. None of these
//! share code with the library's matcher, Datalog engine or chase.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use sattgd::model::{Atom, Bcq, FactStore, Program, Term, Tgd, VarId};

pub type Subst = HashMap<VarId, Term>;

fn unify(pattern: &Atom, fact: &Atom, s: &Subst) -> Option<Subst> {
    if pattern.pred != fact.pred || pattern.args.len() != fact.args.len() {
        return None;
    }
    let mut out = s.clone();
    for (&p, &f) in pattern.args.iter().zip(&fact.args) {
        match p {
            Term::Var(v) => match out.get(&v) {
                Some(&t) if t != f => return None,
                Some(_) => {}
                None => {
                    out.insert(v, f);
                }
            },
            t if t != f => return None,
            _ => {}
        }
    }
    Some(out)
}

/// Every extension of `s` mapping `atoms` into `facts`, by plain
/// left-to-right backtracking.
pub fn homs(facts: &BTreeSet<Atom>, atoms: &[Atom], s: &Subst) -> Vec<Subst> {
    let Some((first, rest)) = atoms.split_first() else {
        return vec![s.clone()];
    };
    let mut out = Vec::new();
    for f in facts {
        if let Some(s2) = unify(first, f, s) {
            out.extend(homs(facts, rest, &s2));
        }
    }
    out
}

pub fn has_hom(facts: &BTreeSet<Atom>, atoms: &[Atom], s: &Subst) -> bool {
    let Some((first, rest)) = atoms.split_first() else {
        return true;
    };
    facts
        .iter()
        .any(|f| unify(first, f, s).is_some_and(|s2| has_hom(facts, rest, &s2)))
}

pub fn subst(a: &Atom, s: &Subst) -> Atom {
    Atom {
        pred: a.pred,
        args: a
            .args
            .iter()
            .map(|&t| match t {
                Term::Var(v) => s.get(&v).copied().unwrap_or(t),
                _ => t,
            })
            .collect(),
    }
}

/// Naive bottom-up fixpoint of the Datalog rules among `rules`.
pub fn naive_saturate(rules: &[Tgd], facts: impl IntoIterator<Item = Atom>) -> BTreeSet<Atom> {
    let mut db: BTreeSet<Atom> = facts.into_iter().collect();
    loop {
        let mut new = Vec::new();
        for r in rules.iter().filter(|r| r.existentials.is_empty()) {
            for s in homs(&db, &r.body, &Subst::new()) {
                for h in &r.head {
                    let g = subst(h, &s);
                    if !db.contains(&g) {
                        new.push(g);
                    }
                }
            }
        }
        if new.is_empty() {
            return db;
        }
        db.extend(new);
    }
}

/// Whether the Datalog rules entail `∀(body → head)`: freeze every
/// variable, materialize the body, then look for the frozen head.
pub fn naive_entails(rules: &[Tgd], body: &[Atom], head: &[Atom]) -> bool {
    let mut freeze = Subst::new();
    for a in body.iter().chain(head) {
        for &t in &a.args {
            if let Term::Var(v) = t {
                let n = freeze.len();
                freeze.entry(v).or_insert_with(|| Term::constant(&format!("~oracle{n}")));
            }
        }
    }
    let db = naive_saturate(rules, body.iter().map(|a| subst(a, &freeze)));
    has_hom(&db, head, &freeze)
}

pub fn to_set(store: &FactStore) -> BTreeSet<Atom> {
    store.iter().cloned().collect()
}

pub fn naive_bcq(facts: &BTreeSet<Atom>, q: &Bcq) -> bool {
    has_hom(facts, &q.atoms, &Subst::new())
}

/// Whether `interp` satisfies every rule of `p`.
pub fn is_model(p: &Program, interp: &BTreeSet<Atom>) -> bool {
    p.rules().iter().all(|r| {
        homs(interp, &r.body, &Subst::new())
            .iter()
            .all(|s| has_hom(interp, &r.head, s))
    })
}

/// Elements of each set null, read off `su(X, S, S)` facts.
pub fn set_members(interp: &FactStore) -> BTreeMap<Term, BTreeSet<Term>> {
    let mut out: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for a in interp.iter().filter(|a| a.pred.as_str() == "su") {
        if a.args[1] == a.args[2] && a.args[1].is_null() {
            out.entry(a.args[1]).or_default().insert(a.args[0]);
        }
    }
    out
}

/// Number of nonempty sequences of distinct elements drawn from `n`.
pub fn arrangements(n: u64) -> u64 {
    (1..=n).map(|k| (n - k + 1..=n).product::<u64>()).sum()
}
