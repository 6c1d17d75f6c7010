//! Predicate positions, `Ω_v`, the labelled existential dependency graph,
//! its strongly connected components, confluence and ranks.

mod dot;
mod rank;
mod scc;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Position, Program, VarId};

pub use dot::ledgraph_dot;
pub use rank::{compute_rank, ComponentRank, RankError, RankReport};
pub use scc::{scc_analysis, Component, SccAnalysis};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Body,
    Head,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DepGraphError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(VarId),
    #[error("variable {0:?} is not existential")]
    NotExistential(VarId),
}

/// `B_x` or `H_x`: the positions where `v` occurs in the body or head of its rule.
pub fn positions_of(p: &Program, v: VarId, side: Side) -> Result<BTreeSet<Position>, DepGraphError> {
    if v.0 as usize >= p.var_count() {
        return Err(DepGraphError::UnknownVariable(v));
    }
    let r = p.rule(p.rule_of_var(v));
    Ok(match side {
        Side::Body => r.body_positions(v),
        Side::Head => r.head_positions(v),
    })
}

/// A labelled edge `from →label to`; `label` is a frontier variable of the
/// rule of `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub from: VarId,
    pub label: VarId,
    pub to: VarId,
}

impl Edge {
    pub fn display(&self, p: &Program) -> String {
        format!(
            "{} -{}-> {}",
            vertex_name(p, self.from),
            p.var_name(self.label),
            vertex_name(p, self.to)
        )
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.from.0, self.label.0, self.to.0)
    }
}

/// `name@ruleR` display for an existential variable.
pub fn vertex_name(p: &Program, v: VarId) -> String {
    format!("{}@rule{}", p.var_name(v), p.rule_of_var(v))
}

/// Body/head position sets of every universal variable of the program.
fn flows(p: &Program) -> Vec<(BTreeSet<Position>, BTreeSet<Position>)> {
    let mut out = Vec::new();
    for r in p.rules() {
        for &x in &r.frontier {
            out.push((r.body_positions(x), r.head_positions(x)));
        }
    }
    out
}

fn omega_with(p: &Program, flows: &[(BTreeSet<Position>, BTreeSet<Position>)], v: VarId) -> BTreeSet<Position> {
    let mut om = p.rule(p.rule_of_var(v)).head_positions(v);
    let mut done = vec![false; flows.len()];
    loop {
        let mut changed = false;
        for (i, (b, h)) in flows.iter().enumerate() {
            if !done[i] && b.is_subset(&om) {
                done[i] = true;
                for pos in h {
                    changed |= om.insert(*pos);
                }
            }
        }
        if !changed {
            return om;
        }
    }
}

/// `Ω_v`: the least position set containing `H_v` and closed under
/// `B_x ⊆ Ω_v ⇒ H_x ⊆ Ω_v` for universal variables `x`.
pub fn omega(p: &Program, v: VarId) -> Result<BTreeSet<Position>, DepGraphError> {
    if v.0 as usize >= p.var_count() {
        return Err(DepGraphError::UnknownVariable(v));
    }
    if !p.rule(p.rule_of_var(v)).existentials.contains(&v) {
        return Err(DepGraphError::NotExistential(v));
    }
    Ok(omega_with(p, &flows(p), v))
}

#[derive(Clone, Debug)]
pub struct LabelledDepGraph {
    pub vertices: Vec<VarId>,
    pub edges: Vec<Edge>,
    pub omega: BTreeMap<VarId, BTreeSet<Position>>,
}

impl LabelledDepGraph {
    pub fn in_edges(&self, v: VarId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.to == v)
    }

    pub fn out_edges(&self, v: VarId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.from == v)
    }

    pub fn is_acyclic(&self) -> bool {
        scc_analysis(self).components.iter().all(|c| !c.nontrivial)
    }
}

/// Builds the labelled existential dependency graph: one vertex per
/// existential variable and an edge `v →y w` whenever `y` is a frontier
/// variable of the rule of `w` with `B_y ⊆ Ω_v`.
pub fn build_ledgraph(p: &Program) -> LabelledDepGraph {
    let fl = flows(p);
    let vertices = p.existential_vars();
    let omega: BTreeMap<VarId, BTreeSet<Position>> =
        vertices.iter().map(|&v| (v, omega_with(p, &fl, v))).collect();
    let mut edges = Vec::new();
    for &v in &vertices {
        let om = &omega[&v];
        for r in p.rules().iter().filter(|r| !r.is_datalog()) {
            for &y in &r.frontier {
                if r.body_positions(y).is_subset(om) {
                    for &w in &r.existentials {
                        edges.push(Edge {
                            from: v,
                            label: y,
                            to: w,
                        });
                    }
                }
            }
        }
    }
    edges.sort();
    edges.dedup();
    LabelledDepGraph {
        vertices,
        edges,
        omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_program;

    pub(crate) const DEXP: &str = "first(Z) -> lvl(f, Z), lvl(t, Z) .
        lvl(X1, Z), lvl(X2, Z) -> cat(X1, X2, Z, V) .
        cat(X1, X2, Z, X) -> part(X1, X), part(X2, X) .
        cat(X1, X2, Z, X), next(Z, Zp) -> up(X, Zp, W) .
        cat(X1, X2, Z, X), next(Z, Zp), up(X, Zp, Xb) -> lvl(Xb, Zp) .";

    fn pos(list: &[(&str, u32)]) -> BTreeSet<Position> {
        list.iter().map(|&(p, i)| Position::new(p, i)).collect()
    }

    #[test]
    fn positions_read_off_rules() {
        let p = parse_program(DEXP).unwrap();
        let x5 = p.var_by_name(3, "X").unwrap();
        assert_eq!(positions_of(&p, x5, Side::Body).unwrap(), pos(&[("cat", 4)]));
        let v = p.var_by_name(1, "V").unwrap();
        assert_eq!(positions_of(&p, v, Side::Head).unwrap(), pos(&[("cat", 4)]));
        assert!(positions_of(&p, v, Side::Body).unwrap().is_empty());
        assert!(positions_of(&p, VarId(9999), Side::Body).is_err());
    }

    #[test]
    fn omega_of_dexp() {
        let p = parse_program(DEXP).unwrap();
        let v = p.var_by_name(1, "V").unwrap();
        let w = p.var_by_name(3, "W").unwrap();
        assert_eq!(omega(&p, v).unwrap(), pos(&[("cat", 4), ("part", 2), ("up", 1)]));
        assert_eq!(
            omega(&p, w).unwrap(),
            pos(&[("up", 3), ("lvl", 1), ("cat", 1), ("cat", 2), ("part", 1)])
        );
    }

    #[test]
    fn omega_without_flow() {
        let p = parse_program("a(X) -> p(V) .").unwrap();
        let v = p.rule(0).existentials[0];
        assert_eq!(omega(&p, v).unwrap(), pos(&[("p", 1)]));
    }

    #[test]
    fn dexp_has_three_edges() {
        let p = parse_program(DEXP).unwrap();
        let g = build_ledgraph(&p);
        let shown: BTreeSet<String> = g.edges.iter().map(|e| e.display(&p)).collect();
        let want: BTreeSet<String> = [
            "V@rule1 -X-> W@rule3",
            "W@rule3 -X1-> V@rule1",
            "W@rule3 -X2-> V@rule1",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(shown, want);
    }

    #[test]
    fn datalog_program_has_empty_graph() {
        let p = parse_program("e(X,Y) -> t(X,Y) .").unwrap();
        let g = build_ledgraph(&p);
        assert!(g.vertices.is_empty() && g.edges.is_empty());
    }

    #[test]
    fn sets_self_loop() {
        let p = parse_program(
            "elem(X), set(S) -> set(V), su(X, S, V), su(X, V, V) .
             su(X, S, T), su(Y, S, S) -> su(Y, T, T) .",
        )
        .unwrap();
        let g = build_ledgraph(&p);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].display(&p), "V@rule0 -S-> V@rule0");
    }
}
