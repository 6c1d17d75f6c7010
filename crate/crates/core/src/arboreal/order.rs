use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ArboreousInfo;
use crate::depgraph::{LabelledDepGraph, SccAnalysis};
use crate::model::{Position, Program, Term, VarId};

/// Which head condition deleted a pair `⟨p,i⟩ ⪯ ⟨p,j⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Removal {
    /// `t_i` a `Ĉ` existential, `t_j` an existential outside `Ĉ`.
    Root,
    /// `t_i ∈ V_Ê`, `t_j` universal.
    NewBag,
    /// `t_i` a `Ĉ` existential, `t_j` universal outside `λ(t_i)`.
    NewStart,
    /// `t_i`, `t_j` universal with `t_i ⋬ t_j`.
    Propagation,
    /// `t_j` a constant while `t_i` is universal or a `Ĉ` existential.
    Constant,
}

#[derive(Clone, Debug)]
pub struct PositionOrder {
    pub pairs: BTreeSet<(Position, Position)>,
    pub removed: BTreeMap<(Position, Position), Removal>,
    /// Reflexive-transitive `⊴` as an explicit set of pairs.
    pub var_le: BTreeSet<(VarId, VarId)>,
    pub omega_hat: BTreeSet<Position>,
    /// `Ĉ`-affected body variables per rule.
    pub affected: Vec<Vec<VarId>>,
    pub rounds: usize,
}

impl PositionOrder {
    pub fn holds(&self, a: Position, b: Position) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn le(&self, x: VarId, y: VarId) -> bool {
        x == y || self.var_le.contains(&(x, y))
    }

    /// Non-reflexive pairs as `[p, i, p, j]`.
    pub fn to_json(&self) -> Vec<(String, u32, String, u32)> {
        self.pairs
            .iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.pred.to_string(), a.index, b.pred.to_string(), b.index))
            .collect()
    }
}

fn var_closure(p: &Program, pairs: &BTreeSet<(Position, Position)>) -> BTreeSet<(VarId, VarId)> {
    let mut out = BTreeSet::new();
    for r in p.rules() {
        let mut succ: BTreeMap<VarId, BTreeSet<VarId>> = BTreeMap::new();
        for a in &r.body {
            for (i, ti) in a.args.iter().enumerate() {
                for (j, tj) in a.args.iter().enumerate() {
                    let (Term::Var(x), Term::Var(y)) = (ti, tj) else { continue };
                    let pi = Position { pred: a.pred, index: i as u32 + 1 };
                    let pj = Position { pred: a.pred, index: j as u32 + 1 };
                    if x != y && pairs.contains(&(pi, pj)) {
                        succ.entry(*x).or_default().insert(*y);
                    }
                }
            }
        }
        for &x in succ.keys() {
            let mut stack = vec![x];
            let mut seen = BTreeSet::new();
            while let Some(u) = stack.pop() {
                for &w in succ.get(&u).into_iter().flatten() {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            out.extend(seen.into_iter().filter(|&w| w != x).map(|w| (x, w)));
        }
    }
    out
}

/// Greatest fixpoint of `⪯`, recomputing `⊴` after each deletion round.
pub fn compute_position_order(
    p: &Program,
    graph: &LabelledDepGraph,
    scc: &SccAnalysis,
    info: &ArboreousInfo,
) -> PositionOrder {
    let mut pairs = BTreeSet::new();
    for (pred, n) in p.signature().iter() {
        for i in 1..=n as u32 {
            for j in 1..=n as u32 {
                pairs.insert((Position { pred, index: i }, Position { pred, index: j }));
            }
        }
    }
    let mut removed = BTreeMap::new();
    let empty = BTreeSet::new();
    let mut rounds = 0;
    let var_le = loop {
        rounds += 1;
        let le = var_closure(p, &pairs);
        let mut changed = false;
        for r in p.rules() {
            let is_exist = |v: &VarId| r.existentials.contains(v);
            for a in &r.head {
                for (i, &ti) in a.args.iter().enumerate() {
                    for (j, &tj) in a.args.iter().enumerate() {
                        let key = (
                            Position { pred: a.pred, index: i as u32 + 1 },
                            Position { pred: a.pred, index: j as u32 + 1 },
                        );
                        if !pairs.contains(&key) {
                            continue;
                        }
                        let why = match (ti, tj) {
                            (Term::Var(x), Term::Var(y)) if is_exist(&x) => {
                                let in_c = info.c_hat.contains(&x);
                                if in_c && is_exist(&y) && !info.c_hat.contains(&y) {
                                    Some(Removal::Root)
                                } else if !is_exist(&y) && info.v_e.contains(&x) {
                                    Some(Removal::NewBag)
                                } else if in_c && !is_exist(&y) && !scc.lambda.get(&x).unwrap_or(&empty).contains(&y) {
                                    Some(Removal::NewStart)
                                } else {
                                    None
                                }
                            }
                            (Term::Var(x), Term::Var(y)) if !is_exist(&y) => {
                                (x != y && !le.contains(&(x, y))).then_some(Removal::Propagation)
                            }
                            (Term::Var(x), Term::Const(_)) => {
                                (!is_exist(&x) || info.c_hat.contains(&x)).then_some(Removal::Constant)
                            }
                            _ => None,
                        };
                        if let Some(w) = why {
                            pairs.remove(&key);
                            removed.insert(key, w);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break le;
        }
    };
    let omega_hat: BTreeSet<Position> = info
        .c_hat
        .iter()
        .filter_map(|v| graph.omega.get(v))
        .flatten()
        .copied()
        .collect();
    let affected = p
        .rules()
        .iter()
        .map(|r| {
            r.body_vars()
                .into_iter()
                .filter(|&x| r.body_positions(x).is_subset(&omega_hat))
                .collect()
        })
        .collect();
    PositionOrder {
        pairs,
        removed,
        var_le,
        omega_hat,
        affected,
        rounds,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathGuardedness {
    pub guarded: bool,
    /// Rule id with its `⊴`-incomparable affected variable pairs.
    pub offending: Vec<(usize, Vec<(VarId, VarId)>)>,
}

pub fn is_path_guarded(order: &PositionOrder) -> PathGuardedness {
    let mut offending = Vec::new();
    for (rid, vars) in order.affected.iter().enumerate() {
        let mut bad = Vec::new();
        for (k, &x) in vars.iter().enumerate() {
            for &y in &vars[k + 1..] {
                if !order.le(x, y) && !order.le(y, x) {
                    bad.push((x, y));
                }
            }
        }
        if !bad.is_empty() {
            offending.push((rid, bad));
        }
    }
    PathGuardedness {
        guarded: offending.is_empty(),
        offending,
    }
}
