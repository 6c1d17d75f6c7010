//! Backtracking homomorphism search of conjunctions into a [`FactStore`].

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::model::{Atom, FactStore, Sym, Term, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PTerm {
    Var(usize),
    Fixed(Term),
}

#[derive(Clone, Debug)]
pub struct PAtom {
    pub pred: Sym,
    pub args: Vec<PTerm>,
}

/// A conjunction whose variables are renumbered to dense local slots.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub atoms: Vec<PAtom>,
    /// `vars[i]` is the variable stored in slot `i`.
    pub vars: Vec<VarId>,
}

pub type Binding = Vec<Option<Term>>;

/// Atom visiting order for [`search`].
#[derive(Clone, Copy, Debug)]
pub enum Order<'a> {
    /// Next atom is the one with the fewest index candidates.
    Dynamic,
    /// Fixed order of atom indices.
    Static(&'a [usize]),
}

impl Pattern {
    pub fn compile(atoms: &[Atom]) -> Pattern {
        Pattern::compile_with(atoms, &[])
    }

    /// Compiles `atoms`, giving `first` the leading slots in that order.
    pub fn compile_with(atoms: &[Atom], first: &[VarId]) -> Pattern {
        let mut vars: Vec<VarId> = first.to_vec();
        let mut slot: HashMap<VarId, usize> =
            vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let atoms = atoms
            .iter()
            .map(|a| PAtom {
                pred: a.pred,
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => PTerm::Var(*slot.entry(*v).or_insert_with(|| {
                            vars.push(*v);
                            vars.len() - 1
                        })),
                        other => PTerm::Fixed(*other),
                    })
                    .collect(),
            })
            .collect();
        Pattern { atoms, vars }
    }

    pub fn slot(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|&w| w == v)
    }

    pub fn empty_binding(&self) -> Binding {
        vec![None; self.vars.len()]
    }

    /// Binding with the given variables fixed; unknown variables are ignored.
    pub fn binding_from(&self, fixed: &HashMap<VarId, Term>) -> Binding {
        self.vars.iter().map(|v| fixed.get(v).copied()).collect()
    }

    pub fn to_map(&self, b: &Binding) -> HashMap<VarId, Term> {
        self.vars
            .iter()
            .zip(b)
            .filter_map(|(&v, t)| t.map(|t| (v, t)))
            .collect()
    }

    pub fn instantiate(&self, idx: usize, b: &Binding) -> Option<Atom> {
        let a = &self.atoms[idx];
        let mut args = Vec::with_capacity(a.args.len());
        for t in &a.args {
            args.push(match t {
                PTerm::Fixed(t) => *t,
                PTerm::Var(s) => b[*s]?,
            });
        }
        Some(Atom { pred: a.pred, args })
    }
}

fn clip(list: &[u32], range: Option<(u32, u32)>) -> &[u32] {
    match range {
        None => list,
        Some((lo, hi)) => {
            let a = list.partition_point(|&x| x < lo);
            let b = list.partition_point(|&x| x < hi);
            &list[a..b]
        }
    }
}

fn candidates<'s>(
    store: &'s FactStore,
    atom: &PAtom,
    b: &Binding,
    range: Option<(u32, u32)>,
) -> &'s [u32] {
    let mut best = clip(store.with_pred(atom.pred), range);
    for (i, t) in atom.args.iter().enumerate() {
        let bound = match t {
            PTerm::Fixed(t) => Some(*t),
            PTerm::Var(s) => b[*s],
        };
        if let Some(t) = bound {
            let l = clip(store.with_term(atom.pred, i as u32, t), range);
            if l.len() < best.len() {
                best = l;
                if best.is_empty() {
                    break;
                }
            }
        }
    }
    best
}

fn unify(atom: &PAtom, fact: &Atom, b: &mut Binding, trail: &mut Vec<usize>) -> bool {
    if fact.args.len() != atom.args.len() {
        return false;
    }
    for (p, &t) in atom.args.iter().zip(&fact.args) {
        match *p {
            PTerm::Fixed(f) => {
                if f != t {
                    return false;
                }
            }
            PTerm::Var(s) => match b[s] {
                Some(cur) => {
                    if cur != t {
                        return false;
                    }
                }
                None => {
                    b[s] = Some(t);
                    trail.push(s);
                }
            },
        }
    }
    true
}

struct Search<'a, F> {
    store: &'a FactStore,
    pat: &'a Pattern,
    order: Order<'a>,
    ranges: Option<&'a [(u32, u32)]>,
    used: Vec<bool>,
    matched: Vec<u32>,
    f: F,
}

impl<F: FnMut(&Binding, &[u32]) -> ControlFlow<()>> Search<'_, F> {
    fn range(&self, i: usize) -> Option<(u32, u32)> {
        self.ranges.map(|r| r[i])
    }

    fn go(&mut self, depth: usize, b: &mut Binding) -> ControlFlow<()> {
        if depth == self.pat.atoms.len() {
            return (self.f)(b, &self.matched);
        }
        let (ai, cands) = match self.order {
            Order::Static(o) => {
                let ai = o[depth];
                (ai, candidates(self.store, &self.pat.atoms[ai], b, self.range(ai)))
            }
            Order::Dynamic => {
                let mut pick: Option<(usize, &[u32])> = None;
                for ai in 0..self.pat.atoms.len() {
                    if self.used[ai] {
                        continue;
                    }
                    let c = candidates(self.store, &self.pat.atoms[ai], b, self.range(ai));
                    if pick.map_or(true, |(_, p)| c.len() < p.len()) {
                        pick = Some((ai, c));
                        if c.is_empty() {
                            break;
                        }
                    }
                }
                pick.expect("unvisited atom remains")
            }
        };
        if cands.is_empty() {
            return ControlFlow::Continue(());
        }
        self.used[ai] = true;
        let mut trail = Vec::new();
        for &fi in cands {
            let fact = self.store.get(fi);
            if unify(&self.pat.atoms[ai], fact, b, &mut trail) {
                self.matched[ai] = fi;
                let r = self.go(depth + 1, b);
                if r.is_break() {
                    for s in trail.drain(..) {
                        b[s] = None;
                    }
                    self.used[ai] = false;
                    return r;
                }
            }
            for s in trail.drain(..) {
                b[s] = None;
            }
        }
        self.used[ai] = false;
        ControlFlow::Continue(())
    }
}

/// Enumerates all extensions of `b` that map the pattern into `store`.
///
/// `ranges[i]`, when given, restricts atom `i` to facts whose insertion index
/// lies in the half-open range. The callback receives the binding and the
/// matched fact index per atom.
pub fn search<F>(
    store: &FactStore,
    pat: &Pattern,
    b: &mut Binding,
    order: Order<'_>,
    ranges: Option<&[(u32, u32)]>,
    f: F,
) -> ControlFlow<()>
where
    F: FnMut(&Binding, &[u32]) -> ControlFlow<()>,
{
    let n = pat.atoms.len();
    let mut s = Search {
        store,
        pat,
        order,
        ranges,
        used: vec![false; n],
        matched: vec![0; n],
        f,
    };
    s.go(0, b)
}

/// Whether some extension of `fixed` maps `atoms` into `store`.
pub fn has_match(store: &FactStore, atoms: &[Atom], fixed: &HashMap<VarId, Term>) -> bool {
    find_match(store, atoms, fixed).is_some()
}

/// First extension of `fixed` mapping `atoms` into `store`.
pub fn find_match(
    store: &FactStore,
    atoms: &[Atom],
    fixed: &HashMap<VarId, Term>,
) -> Option<HashMap<VarId, Term>> {
    let pat = Pattern::compile(atoms);
    let mut b = pat.binding_from(fixed);
    let mut out = None;
    let _ = search(store, &pat, &mut b, Order::Dynamic, None, |b, _| {
        out = Some(pat.to_map(b));
        ControlFlow::Break(())
    });
    out.map(|mut m| {
        for (k, v) in fixed {
            m.entry(*k).or_insert(*v);
        }
        m
    })
}

/// All extensions of `fixed` mapping `atoms` into `store`.
pub fn all_matches(
    store: &FactStore,
    atoms: &[Atom],
    fixed: &HashMap<VarId, Term>,
) -> Vec<HashMap<VarId, Term>> {
    let pat = Pattern::compile(atoms);
    let mut b = pat.binding_from(fixed);
    let mut out = Vec::new();
    let _ = search(store, &pat, &mut b, Order::Dynamic, None, |b, _| {
        let mut m = pat.to_map(b);
        for (k, v) in fixed {
            m.entry(*k).or_insert(*v);
        }
        out.push(m);
        ControlFlow::Continue(())
    });
    out
}

/// Applies a substitution to an atom; unmapped variables stay.
pub fn apply(a: &Atom, s: &HashMap<VarId, Term>) -> Atom {
    a.map_terms(|t| match t {
        Term::Var(v) => s.get(&v).copied().unwrap_or(t),
        other => other,
    })
}
