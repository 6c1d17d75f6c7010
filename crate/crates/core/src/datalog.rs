//! Semi-naive Datalog evaluation and frozen-variable entailment.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use crate::matching::{search, Binding, Order, PAtom, PTerm, Pattern};
use crate::model::{Atom, FactStore, Program, Term, Tgd, VarId};

/// A rule compiled for repeated matching: body pattern plus head templates
/// over the same slots. Existential variables get slots after the body's.
#[derive(Clone, Debug)]
pub struct CompiledRule {
    pub rule: usize,
    pub body: Pattern,
    pub head: Vec<PAtom>,
    head_pat: Pattern,
    /// Slots of the frontier variables, in the rule's frontier order.
    pub frontier_slots: Vec<usize>,
    /// Slots of the existential variables, in the rule's order.
    pub exist_slots: Vec<usize>,
}

impl CompiledRule {
    pub fn new(r: &Tgd) -> CompiledRule {
        let mut body = Pattern::compile(&r.body);
        let nbody = body.vars.len();
        body.vars.extend(r.existentials.iter().copied());
        let slot = |v: VarId| body.vars.iter().position(|&w| w == v).expect("rule variable");
        let head = r
            .head
            .iter()
            .map(|a| PAtom {
                pred: a.pred,
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => PTerm::Var(slot(*v)),
                        other => PTerm::Fixed(*other),
                    })
                    .collect(),
            })
            .collect::<Vec<PAtom>>();
        let head_pat = Pattern {
            atoms: head.clone(),
            vars: body.vars.clone(),
        };
        let frontier_slots = r.frontier.iter().map(|&v| slot(v)).collect();
        let exist_slots = (nbody..nbody + r.existentials.len()).collect();
        CompiledRule {
            rule: r.id,
            body,
            head,
            head_pat,
            frontier_slots,
            exist_slots,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.body.vars.len()
    }

    pub fn body_len(&self) -> usize {
        self.body.atoms.len()
    }

    pub fn head_atom(&self, i: usize, b: &Binding) -> Atom {
        let a = &self.head[i];
        Atom {
            pred: a.pred,
            args: a
                .args
                .iter()
                .map(|t| match t {
                    PTerm::Fixed(t) => *t,
                    PTerm::Var(s) => b[*s].expect("head variable bound"),
                })
                .collect(),
        }
    }

    pub fn head_atoms(&self, b: &Binding) -> Vec<Atom> {
        (0..self.head.len()).map(|i| self.head_atom(i, b)).collect()
    }

    /// Whether the head can be embedded into `store` extending the frontier
    /// part of `b` (the restricted-chase satisfaction test).
    pub fn head_satisfied(&self, store: &FactStore, b: &Binding) -> bool {
        let mut hb: Binding = vec![None; self.slot_count()];
        for &s in &self.frontier_slots {
            hb[s] = b[s];
        }
        search(store, &self.head_pat, &mut hb, Order::Dynamic, None, |_, _| {
            ControlFlow::Break(())
        })
        .is_break()
    }

    /// Enumerates body matches using the semi-naive split at `delta`:
    /// atom `k` ranges over `[delta.0, delta.1)`, atoms before it over
    /// `[0, delta.0)` and atoms after it over `[0, delta.1)`.
    pub fn delta_matches(
        &self,
        store: &FactStore,
        delta: (u32, u32),
        mut f: impl FnMut(&Binding, &[u32]),
    ) {
        let n = self.body_len();
        if delta.0 >= delta.1 {
            return;
        }
        for k in 0..n {
            let ranges: Vec<(u32, u32)> = (0..n)
                .map(|j| match j.cmp(&k) {
                    std::cmp::Ordering::Less => (0, delta.0),
                    std::cmp::Ordering::Equal => delta,
                    std::cmp::Ordering::Greater => (0, delta.1),
                })
                .collect();
            let mut order: Vec<usize> = (0..n).filter(|&j| j != k).collect();
            order.sort_by_key(|&j| (store.with_pred(self.body.atoms[j].pred).len(), j));
            order.insert(0, k);
            let mut b = vec![None; self.slot_count()];
            let _ = search(store, &self.body, &mut b, Order::Static(&order), Some(&ranges), |b, m| {
                f(b, m);
                ControlFlow::Continue(())
            });
        }
    }
}

/// Least fixpoint of the Datalog rules of `rules` over `facts`.
/// Rules with existential variables are ignored.
pub fn saturate(rules: &[Tgd], facts: &FactStore) -> FactStore {
    let mut store = facts.clone();
    let compiled: Vec<CompiledRule> = rules
        .iter()
        .filter(|r| r.is_datalog())
        .map(CompiledRule::new)
        .collect();
    saturate_in_place(&compiled, &mut store, 0);
    store
}

/// Saturates `store` in place, treating facts from index `from` on as the
/// initial delta. Returns the number of facts added.
pub fn saturate_in_place(rules: &[CompiledRule], store: &mut FactStore, from: usize) -> usize {
    let start = store.len();
    let mut lo = from as u32;
    loop {
        let hi = store.len() as u32;
        if lo >= hi {
            break;
        }
        let mut derived = Vec::new();
        for r in rules {
            r.delta_matches(store, (lo, hi), |b, _| {
                for i in 0..r.head.len() {
                    let a = r.head_atom(i, b);
                    if !store.contains(&a) {
                        derived.push(a);
                    }
                }
            });
        }
        for a in derived {
            store.insert(a);
        }
        lo = hi;
    }
    store.len() - start
}

pub fn saturate_program(p: &Program, facts: &FactStore) -> FactStore {
    saturate(p.rules(), facts)
}

/// Variables of `atoms` in order of first occurrence.
pub fn vars_of(atoms: &[Atom]) -> Vec<VarId> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for a in atoms {
        for v in a.vars() {
            if seen.insert(v) {
                out.push(v);
            }
        }
    }
    out
}

/// Replaces every variable of `body` and `head` by a reserved constant.
pub fn freeze(body: &[Atom], head: &[Atom]) -> (Vec<Atom>, Vec<Atom>) {
    let mut all = body.to_vec();
    all.extend_from_slice(head);
    let map: HashMap<VarId, Term> = vars_of(&all)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, Term::frozen(i)))
        .collect();
    let f = |a: &Atom| crate::matching::apply(a, &map);
    (body.iter().map(f).collect(), head.iter().map(f).collect())
}

/// Whether the Datalog rules among `rules` entail `∀(body → head)`.
///
/// Decided by freezing every variable to a reserved constant, saturating the
/// frozen body and testing membership of the frozen head.
pub fn entails(rules: &[Tgd], body: &[Atom], head: &[Atom]) -> bool {
    let (fb, fh) = freeze(body, head);
    let store = saturate(rules, &FactStore::from_atoms(fb));
    fh.iter().all(|a| store.contains(a))
}

/// [`entails`] with precompiled rules.
pub fn entails_compiled(rules: &[CompiledRule], body: &[Atom], head: &[Atom]) -> bool {
    let (fb, fh) = freeze(body, head);
    if fh.iter().all(|a| fb.contains(a)) {
        return true;
    }
    let mut store = FactStore::from_atoms(fb);
    saturate_in_place(rules, &mut store, 0);
    fh.iter().all(|a| store.contains(a))
}
