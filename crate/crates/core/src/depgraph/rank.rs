use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Edge, LabelledDepGraph, SccAnalysis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("no edge set given for nontrivial component {0}")]
    MissingCertificate(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRank {
    pub component: usize,
    pub r_in: usize,
    pub r_cxt: usize,
    /// Components feeding a differently labelled edge into an `E`-target.
    pub context: Vec<usize>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub components: Vec<ComponentRank>,
    pub program_rank: usize,
}

impl RankReport {
    pub fn rank_of(&self, component: usize) -> usize {
        self.components[component].rank
    }
}

/// Ranks components in topological order.
///
/// The context set of `C_i` collects components `C_j ≠ C_i` with an edge
/// `u →y v` into the target `v` of some `w →x v ∈ E_{C_i}` where `y ≠ x`.
pub fn compute_rank(
    g: &LabelledDepGraph,
    scc: &SccAnalysis,
    certs: &BTreeMap<usize, Vec<Edge>>,
) -> Result<RankReport, RankError> {
    let mut out: Vec<ComponentRank> = Vec::with_capacity(scc.components.len());
    for c in &scc.components {
        let i = c.id;
        let empty = Vec::new();
        let e_set = match certs.get(&i) {
            Some(e) => e,
            None if c.nontrivial => return Err(RankError::MissingCertificate(i)),
            None => &empty,
        };
        let r_in = scc
            .ancestors(i)
            .iter()
            .map(|&j| out[j].rank)
            .max()
            .unwrap_or(0);
        let mut context = BTreeSet::new();
        for e in e_set {
            for f in g.in_edges(e.to) {
                let j = scc.comp_of[&f.from];
                if f.label != e.label && j != i {
                    context.insert(j);
                }
            }
        }
        let r_cxt = context.iter().map(|&j| out[j].rank).max().unwrap_or(0);
        let rank = match c.beta {
            0 => r_in,
            1 => r_in.max(r_cxt + 1),
            _ => r_in.max(r_cxt + 2),
        };
        out.push(ComponentRank {
            component: i,
            r_in,
            r_cxt,
            context: context.into_iter().collect(),
            rank,
        });
    }
    let program_rank = out.iter().map(|c| c.rank).max().unwrap_or(0);
    Ok(RankReport {
        components: out,
        program_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::{build_ledgraph, scc_analysis};
    use crate::model::parse_program;

    #[test]
    fn dexp_rank_two() {
        let p = parse_program(crate::depgraph::tests::DEXP).unwrap();
        let g = build_ledgraph(&p);
        let s = scc_analysis(&g);
        let e: Vec<Edge> = g
            .edges
            .iter()
            .filter(|e| p.var_name(e.label) == "X")
            .copied()
            .collect();
        let r = compute_rank(&g, &s, &BTreeMap::from([(0, e)])).unwrap();
        assert_eq!(r.program_rank, 2);
        assert_eq!((r.components[0].r_in, r.components[0].r_cxt), (0, 0));
    }

    #[test]
    fn sets_rank_one() {
        let p = parse_program(
            "elem(X), set(S) -> set(V), su(X, S, V), su(X, V, V) .
             su(X, S, T), su(Y, S, S) -> su(Y, T, T) .",
        )
        .unwrap();
        let g = build_ledgraph(&p);
        let s = scc_analysis(&g);
        let r = compute_rank(&g, &s, &BTreeMap::from([(0, g.edges.clone())])).unwrap();
        assert_eq!(r.program_rank, 1);
    }

    #[test]
    fn acyclic_rank_zero_and_missing_certificate() {
        let p = parse_program("a(X) -> b(X, V) .\nb(X, Y) -> c(Y, W) .").unwrap();
        let g = build_ledgraph(&p);
        let s = scc_analysis(&g);
        let r = compute_rank(&g, &s, &BTreeMap::new()).unwrap();
        assert!(r.components.iter().all(|c| c.rank == 0));
        let p = parse_program("a(X) -> b(X, V), a(V) .").unwrap();
        let g = build_ledgraph(&p);
        let s = scc_analysis(&g);
        assert_eq!(
            compute_rank(&g, &s, &BTreeMap::new()).unwrap_err(),
            RankError::MissingCertificate(0)
        );
    }
}
