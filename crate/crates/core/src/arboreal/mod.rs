//! Arboreous programs: the unique maximal-rank component, null forest, term
//! tree, position order and path-guardedness.

mod forest;
mod order;
mod trace;

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use crate::depgraph::{vertex_name, Edge, RankReport, SccAnalysis};
use crate::model::{Program, VarId};

pub use forest::{build_null_forest, build_term_tree, term_tree_dot, InvariantViolation, NullForest, TermTree, TreeNode};
pub use order::{compute_position_order, is_path_guarded, PathGuardedness, PositionOrder, Removal};
pub use trace::{check_locality, check_order_soundness, LocalityViolation, OrderViolation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArboreousInfo {
    /// Id of `Ĉ`.
    pub component: usize,
    pub c_hat: BTreeSet<VarId>,
    pub e_hat: Vec<Edge>,
    /// Rules with an existential targeted by an `Ê` edge.
    pub e_rules: BTreeSet<usize>,
    /// `V_Ê`: existentials in `Ĉ` occurring in some `Ê`-rule.
    pub v_e: BTreeSet<VarId>,
    pub rank: usize,
}

impl ArboreousInfo {
    pub fn to_json(&self, p: &Program) -> Value {
        json!({
            "Chat": self.c_hat.iter().map(|&v| vertex_name(p, v)).collect::<Vec<_>>(),
            "Ehat": self.e_hat.iter().map(|e| e.display(p)).collect::<Vec<_>>(),
            "EhatRules": self.e_rules,
            "VEhat": self.v_e.iter().map(|&v| vertex_name(p, v)).collect::<Vec<_>>(),
            "rank": self.rank,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArboreousVerdict {
    Arboreous(ArboreousInfo),
    NotArboreous(String),
    /// Rank 0: the full chase is already polynomial, the tree chase does not apply.
    NotApplicable(String),
}

impl ArboreousVerdict {
    pub fn info(&self) -> Option<&ArboreousInfo> {
        match self {
            ArboreousVerdict::Arboreous(i) => Some(i),
            _ => None,
        }
    }

    pub fn is_arboreous(&self) -> bool {
        self.info().is_some()
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            ArboreousVerdict::Arboreous(_) => None,
            ArboreousVerdict::NotArboreous(r) | ArboreousVerdict::NotApplicable(r) => Some(r),
        }
    }
}

/// Checks arboreousness of a saturating program given its certificate edge
/// sets and ranks.
pub fn check_arboreous(
    p: &Program,
    scc: &SccAnalysis,
    ranks: &RankReport,
    edge_sets: &BTreeMap<usize, Vec<Edge>>,
) -> ArboreousVerdict {
    let top = ranks.program_rank;
    if top == 0 {
        return ArboreousVerdict::NotApplicable("rank 0: use the full chase".into());
    }
    let maxima: Vec<usize> = ranks
        .components
        .iter()
        .filter(|c| c.rank == top)
        .map(|c| c.component)
        .collect();
    if maxima.len() != 1 {
        return ArboreousVerdict::NotArboreous(format!(
            "{} components share the maximal rank {top}",
            maxima.len()
        ));
    }
    let c = &scc.components[maxima[0]];
    if c.beta > 1 {
        return ArboreousVerdict::NotArboreous(format!(
            "component {} has confluence {} > 1",
            c.id, c.beta
        ));
    }
    let Some(e_hat) = edge_sets.get(&c.id) else {
        return ArboreousVerdict::NotArboreous(format!("component {} has no certificate", c.id));
    };
    let c_hat: BTreeSet<VarId> = c.vertices.iter().copied().collect();
    let e_rules: BTreeSet<usize> = e_hat.iter().map(|e| p.rule_of_var(e.to)).collect();
    let v_e = e_rules
        .iter()
        .flat_map(|&r| p.rule(r).existentials.iter().copied())
        .filter(|v| c_hat.contains(v))
        .collect();
    ArboreousVerdict::Arboreous(ArboreousInfo {
        component: c.id,
        c_hat,
        e_hat: e_hat.clone(),
        e_rules,
        v_e,
        rank: top,
    })
}
